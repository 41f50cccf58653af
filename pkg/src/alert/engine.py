"""
ALERT Engine
Asynchronous event-by-event token updates with on-demand snapshot readout
"""

import math
from typing import Iterator, Optional

import numpy as np
from loguru import logger

from src.alert.models import AlertConfig, CounterMode, InitMode, ReadoutSchedule, Snapshot
from src.alert.token_state import TokenState, decayed
from src.embedder.lert import Embedder, build_inputs
from src.events.models import EventStream
from src.grid.patch_grid import normalize_events
from src.utils.errors import ConfigError, PreconditionError, StreamOrderError


class AlertEngine:
    """
    Live token grid fed by an event stream

    Each event is normalized, time-encoded and passed through the shared MLP;
    its feature then competes channel-wise against the decayed token of its
    patch. Features of up to k events are computed per call, but the token
    updates are applied one event per global step, so k never changes results.
    """

    def __init__(self, embedder: Embedder, cfg: AlertConfig, state: Optional[TokenState] = None):
        """
        Initialize engine

        Args:
            embedder: Feature generator and positional table (TELERT)
            cfg: Decay and batching parameters
            state: Existing state to continue from (default: cold)

        Raises:
            PreconditionError: If time encoding is disabled
        """
        if not embedder.cfg.te.enabled:
            raise PreconditionError("Asynchronous updates need TELERT (te.enabled=true)")

        self.embedder = embedder
        self.cfg = cfg
        self.grid = embedder.cfg.grid
        self.width = embedder.cfg.token_width
        self.unset = self._resolve_unset()
        self.ages = cfg.counter_mode == CounterMode.PER_UPDATE

        if state is None:
            state = TokenState.initialize(self.grid, self.width, self.unset, self.ages)
        elif state.values.shape != (self.grid.num_patches, self.width):
            raise ConfigError(
                f"State shape {state.values.shape} does not match grid {self.grid.num_patches}x{self.width}"
            )
        elif self.ages and state.age is None:
            raise ConfigError("per_update counters need a state created with ages=True")
        self.state = state
        self._last_t: Optional[int] = None
        self._decay_factor = math.exp(-cfg.lambda_)

    def _resolve_unset(self) -> bool:
        if self.cfg.init_mode == InitMode.AUTO:
            return not self.embedder.cfg.mlp.final_relu
        return self.cfg.init_mode == InitMode.UNSET

    def reset(self) -> None:
        """Discard every token and restart the clock"""
        self.state = TokenState.initialize(self.grid, self.width, self.unset, self.ages)
        self._last_t = None

    @property
    def global_step(self) -> int:
        return self.state.global_step

    def update(self, events: np.ndarray) -> int:
        """
        Absorb one arrival batch of at most k events

        Args:
            events: Structured event array in arrival order

        Returns:
            Global step after the batch

        Raises:
            EventBoundsError: On events outside the sensor
            StreamOrderError: On a timestamp regression
        """
        if len(events) == 0:
            return self.state.global_step
        if len(events) > self.cfg.k:
            raise ConfigError(f"Batch of {len(events)} events exceeds k={self.cfg.k}")

        self._check_order(events)
        batch = normalize_events(self.grid, events)
        features = self.embedder.generator.forward(build_inputs(self.embedder.cfg, batch))

        if self.cfg.counter_mode == CounterMode.PER_UPDATE:
            for patch, feature in zip(batch.patch, features):
                self._absorb_counted(int(patch), feature)
        else:
            for patch, feature in zip(batch.patch, features):
                self._absorb(int(patch), feature)
        self._last_t = int(events['t'][-1])
        return self.state.global_step

    def ingest(self, events: np.ndarray) -> int:
        """Feed any number of events in chunks of k"""
        k = self.cfg.k
        for start in range(0, len(events), k):
            self.update(events[start:start + k])
        return self.state.global_step

    def _check_order(self, events: np.ndarray) -> None:
        t = events['t']
        if self._last_t is not None and int(t[0]) < self._last_t:
            raise StreamOrderError(
                f"Timestamp {int(t[0])} arrives after {self._last_t}",
                {"step": self.state.global_step + 1}
            )
        regressions = np.flatnonzero(np.diff(t.astype(np.int64)) < 0)
        if regressions.size:
            i = int(regressions[0]) + 1
            raise StreamOrderError(
                f"Timestamp {int(t[i])} arrives after {int(t[i - 1])}",
                {"step": self.state.global_step + i + 1}
            )

    def _absorb(self, patch: int, feature: np.ndarray) -> None:
        state = self.state
        step = state.global_step + 1
        stored = state.values[patch]
        last_win = state.last_win[patch]

        lam = self.cfg.lambda_
        if lam > 0.0:
            excess = step - last_win - self.cfg.n_threshold
            stale = (excess > 0) & np.isfinite(stored)
            if stale.any():
                current = stored.astype(np.float64)
                current[stale] *= np.exp(-lam * excess[stale])
                win = feature >= current
            else:
                win = feature >= stored
        else:
            win = feature >= stored

        stored[win] = feature[win]
        last_win[win] = step
        state.counts[patch] += 1
        state.touched[patch] = True
        state.global_step = step

    def _absorb_counted(self, patch: int, feature: np.ndarray) -> None:
        # Per-token age counters: only the updated patch ages, decay is written back
        state = self.state
        step = state.global_step + 1
        stored = state.values[patch]
        age = state.age[patch]

        win = feature >= stored
        stored[win] = feature[win]
        state.last_win[patch][win] = step
        age[win] = 0
        age[~win] += 1
        if self.cfg.lambda_ > 0.0:
            decay = age > self.cfg.n_threshold
            stored[decay] *= np.float32(self._decay_factor)

        state.counts[patch] += 1
        state.touched[patch] = True
        state.global_step = step

    def close_interval(self) -> int:
        """
        Activity accounting at a readout boundary

        Patches whose token is decaying on a majority of channels lose one
        count (floored at 0). No-op without decay.

        Returns:
            Number of patches decremented
        """
        if self.cfg.lambda_ == 0.0:
            return 0
        state = self.state
        majority = state.decaying_channels(self.cfg).mean(axis=1) > 0.5
        hit = majority & state.touched & (state.counts > 0)
        state.counts[hit] -= 1
        return int(hit.sum())

    def active_patches(self) -> np.ndarray:
        state = self.state
        return np.flatnonzero(state.touched & (state.counts >= self.grid.activation_threshold))

    def snapshot(self, readout_time: Optional[int] = None) -> Snapshot:
        """
        Materialize the active tokens at the current global step

        Leaves the state untouched; two snapshots without intervening
        events are identical.

        Returns:
            Row-major Snapshot with positional embeddings applied
        """
        state = self.state
        active = self.active_patches()
        if active.size == 0:
            tokens = np.zeros((0, self.width), dtype=np.float32)
        else:
            if self.cfg.lambda_ == 0.0 or self.cfg.counter_mode == CounterMode.PER_UPDATE:
                values = state.values[active]
            else:
                values = decayed(
                    state.values[active], state.global_step - state.last_win[active], self.cfg
                ).astype(np.float32)
            tokens = values + self.embedder.table.table[active]

        return Snapshot(
            patches=active.astype(np.int64),
            tokens=tokens.astype(np.float32),
            grid_w=self.grid.grid_w,
            step=state.global_step,
            readout_time=readout_time
        )

    def run_stream(self, stream: EventStream, schedule: ReadoutSchedule) -> Iterator[Snapshot]:
        """
        Replay a stream and read tokens out on a schedule

        Events between two readouts are fed in chunks of k; readouts split
        chunks, so every k yields the same snapshots at the same steps. An
        empty stream yields nothing.

        Args:
            stream: Sorted event stream
            schedule: Time, count or end-of-stream readouts

        Yields:
            Snapshot per readout
        """
        events = stream.events
        cuts = schedule.cut_points(events['t'])
        logger.info(
            f"Replaying {len(events)} events with {len(cuts)} readouts "
            f"({schedule.mode.value}, k={self.cfg.k}, lambda={self.cfg.lambda_})"
        )

        start = 0
        for index, readout_time in cuts:
            self.ingest(events[start:index])
            start = index
            self.close_interval()
            yield self.snapshot(readout_time)
