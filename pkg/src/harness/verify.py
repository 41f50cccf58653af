"""
Equivalence Verifier
Batch-vs-incremental, batching-invariance and lazy-vs-eager decay oracles
"""

from enum import Enum
from typing import List, Optional, Sequence

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field

from src.alert.engine import AlertEngine
from src.alert.models import AlertConfig, CounterMode, ReadoutSchedule, Snapshot
from src.alert.token_state import EagerTokenState
from src.embedder.lert import Embedder, build_inputs
from src.embedder.models import TokenSequence
from src.events.models import EventStream
from src.events.sampling import random_ccim_windows
from src.grid.patch_grid import normalize_events
from src.harness.config import Settings


DECAY_TOLERANCE = 1e-6
DEFAULT_BATCHINGS = (1, 8, 64, 1024)


class VerifyMode(str, Enum):
    """Which oracle to run"""
    STRICT = "strict"
    BATCHING = "batching"
    DECAY = "decay"


class Divergence(BaseModel):
    """First point where two replays disagree"""
    trial: int = Field(..., ge=0)
    patch: int = Field(..., description="Flat patch index, -1 when the active sets differ in size")
    channel: int = Field(..., description="Channel, -1 when the patch sets differ")
    step: int = Field(..., ge=0, description="Global step of the compared state")


class VerifyReport(BaseModel):
    """Pass/fail summary of one oracle"""
    mode: VerifyMode
    trials: int = Field(..., ge=0)
    matches: int = Field(..., ge=0)
    max_abs_diff: float = Field(0.0, ge=0)
    first_divergence: Optional[Divergence] = None

    @property
    def passed(self) -> bool:
        return self.matches == self.trials and self.first_divergence is None

    def to_lines(self) -> List[str]:
        status = "PASS" if self.passed else "FAIL"
        line = f"{status} mode={self.mode.value} matches={self.matches}/{self.trials} max_abs_diff={self.max_abs_diff:.3e}"
        if self.first_divergence is not None:
            d = self.first_divergence
            line += f" trial={d.trial} patch={d.patch} channel={d.channel} step={d.step}"
        return [line]


def compare_tokens(expected: TokenSequence, actual: TokenSequence, trial: int, step: int) -> Optional[Divergence]:
    """Exact comparison of two token sequences; None when bit-identical"""
    if len(expected) != len(actual) or not np.array_equal(expected.patches, actual.patches):
        mismatch = _first_patch_mismatch(expected.patches, actual.patches)
        return Divergence(trial=trial, patch=mismatch, channel=-1, step=step)

    differs = expected.tokens != actual.tokens
    if differs.any():
        row, channel = (int(i) for i in np.argwhere(differs)[0])
        return Divergence(trial=trial, patch=int(expected.patches[row]), channel=channel, step=step)
    return None


def _first_patch_mismatch(a: np.ndarray, b: np.ndarray) -> int:
    for x, y in zip(a, b):
        if x != y:
            return int(min(x, y))
    longer = a if len(a) > len(b) else b
    return int(longer[min(len(a), len(b))]) if len(a) != len(b) else -1


def verify_strict(
    embedder: Embedder,
    cfg: AlertConfig,
    stream: EventStream,
    ne: int,
    trials: int,
    seed: int = 0
) -> VerifyReport:
    """
    TELERT batch tokens vs event-by-event replay on random CCIM windows

    Decay is forced off; every window must match bit for bit.

    Args:
        embedder: Shared weights for both paths
        cfg: Engine settings (k and counter mode are kept)
        stream: Source stream
        ne: Events per window
        trials: Number of windows
        seed: Window placement seed

    Returns:
        VerifyReport with the first diverging (patch, channel, step)
    """
    cfg = cfg.model_copy(update={'lambda_': 0.0})
    matches = 0
    first = None
    for trial, (_, events) in enumerate(random_ccim_windows(stream, ne, trials, seed)):
        batch = embedder.embed_sample(events)
        engine = AlertEngine(embedder, cfg)
        engine.ingest(events)
        snapshot = engine.snapshot()

        divergence = compare_tokens(batch, snapshot, trial, snapshot.step)
        if divergence is None:
            matches += 1
        elif first is None:
            first = divergence
            logger.error(f"Batch/incremental mismatch in window {trial}: {divergence}")

    return VerifyReport(mode=VerifyMode.STRICT, trials=trials, matches=matches, first_divergence=first)


def verify_batching(
    embedder: Embedder,
    cfg: AlertConfig,
    stream: EventStream,
    schedule: ReadoutSchedule,
    batchings: Sequence[int] = DEFAULT_BATCHINGS
) -> VerifyReport:
    """
    Replay one stream once per k and require identical snapshots at identical steps

    The first k in `batchings` is the reference.
    """
    runs: List[List[Snapshot]] = []
    for k in batchings:
        engine = AlertEngine(embedder, cfg.model_copy(update={'k': k}))
        runs.append(list(engine.run_stream(stream, schedule)))

    reference = runs[0]
    matches = 1
    first = None
    for trial, run in enumerate(runs[1:], start=1):
        divergence = None
        if len(run) != len(reference):
            divergence = Divergence(trial=trial, patch=-1, channel=-1, step=0)
        else:
            for expected, actual in zip(reference, run):
                if expected.step != actual.step:
                    divergence = Divergence(trial=trial, patch=-1, channel=-1, step=actual.step)
                else:
                    divergence = compare_tokens(expected, actual, trial, actual.step)
                if divergence is not None:
                    break
        if divergence is None:
            matches += 1
        elif first is None:
            first = divergence
            logger.error(f"k={batchings[trial]} diverges from k={batchings[0]}: {divergence}")

    return VerifyReport(mode=VerifyMode.BATCHING, trials=len(batchings), matches=matches, first_divergence=first)


def verify_decay(
    embedder: Embedder,
    cfg: AlertConfig,
    events: np.ndarray,
    tolerance: float = DECAY_TOLERANCE
) -> VerifyReport:
    """
    Lazy closed-form decay vs an eager per-step sweep

    Both replays see the same features; after every event the effective
    values of all touched channels are compared.

    Args:
        embedder: Feature source
        cfg: Decay parameters (lambda > 0 for a meaningful check)
        events: Structured events replayed one per step
        tolerance: Maximum absolute difference

    Returns:
        VerifyReport with one trial per step
    """
    cfg = cfg.model_copy(update={'k': 1, 'counter_mode': CounterMode.GLOBAL_STEP})
    engine = AlertEngine(embedder, cfg)
    state = engine.state
    eager = EagerTokenState(state.num_patches, state.width, unset=engine.unset)

    batch = normalize_events(embedder.cfg.grid, events)
    features = embedder.generator.forward(build_inputs(embedder.cfg, batch))

    max_diff = 0.0
    matches = 0
    first = None
    for i, (patch, feature) in enumerate(zip(batch.patch, features)):
        engine.update(events[i:i + 1])
        eager.step(int(patch), feature, cfg)

        lazy = engine.state.effective_values(cfg)
        finite = np.isfinite(eager.values)
        diff = np.zeros_like(lazy)
        diff[finite] = np.abs(lazy[finite] - eager.values[finite])
        step_max = float(diff.max())
        max_diff = max(max_diff, step_max)
        if step_max <= tolerance and np.array_equal(finite, np.isfinite(lazy)):
            matches += 1
        elif first is None:
            p, c = (int(j) for j in np.unravel_index(int(np.argmax(diff)), diff.shape))
            first = Divergence(trial=i, patch=p, channel=c, step=engine.global_step)
            logger.error(f"Lazy/eager decay mismatch {step_max:.3e} at {first}")

    return VerifyReport(
        mode=VerifyMode.DECAY,
        trials=len(events),
        matches=matches,
        max_abs_diff=max_diff,
        first_divergence=first
    )


def verify_equivalence(
    embedder: Embedder,
    settings: Settings,
    stream: EventStream,
    trials: Optional[int] = None,
    modes: Sequence[VerifyMode] = tuple(VerifyMode),
    decay_steps: int = 1000,
    fallback_lambda: float = 0.05
) -> List[VerifyReport]:
    """
    Run the selected oracles with one settings bundle

    Args:
        embedder: Shared weights
        settings: Sampling, readout and engine settings
        stream: Source stream
        trials: Strict-mode windows (default: sample.windows)
        modes: Oracles to run
        decay_steps: Events replayed by the decay oracle
        fallback_lambda: Decay rate used when the settings disable decay

    Returns:
        One VerifyReport per mode
    """
    cfg = settings.alert
    reports = []
    for mode in modes:
        if mode == VerifyMode.STRICT:
            ne = min(settings.sample.ne, len(stream))
            report = verify_strict(embedder, cfg, stream, ne, trials or settings.sample.windows, settings.sample.seed)
        elif mode == VerifyMode.BATCHING:
            report = verify_batching(embedder, cfg, stream, settings.readout.schedule())
        else:
            decay_cfg = cfg if cfg.lambda_ > 0 else cfg.model_copy(update={'lambda_': fallback_lambda})
            report = verify_decay(embedder, decay_cfg, stream.events[:decay_steps])
        logger.info(report.to_lines()[0])
        reports.append(report)
    return reports
