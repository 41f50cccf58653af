"""
ALERT Models
Asynchronous update configuration, readout schedules and snapshots
"""

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from src.embedder.models import TokenSequence


class CounterMode(str, Enum):
    """Staleness clock used by Old Maximum Value Decay"""
    GLOBAL_STEP = "global_step"
    PER_UPDATE = "per_update"


class InitMode(str, Enum):
    """Initial token value before a channel's first win"""
    AUTO = "auto"
    ZERO = "zero"
    UNSET = "unset"


class AlertConfig(BaseModel):
    """Old Maximum Value Decay and batching parameters"""
    lambda_: float = Field(0.0, ge=0, alias="lambda", description="Decay rate per decay step")
    n_threshold: int = Field(0, ge=0, description="Steps a channel may go un-won before it decays")
    k: int = Field(1, ge=1, description="Events per update batch")
    counter_mode: CounterMode = Field(CounterMode.GLOBAL_STEP, description="Staleness clock")
    init_mode: InitMode = Field(InitMode.AUTO, description="zero, unset (-inf), or auto from the MLP output range")

    model_config = {"frozen": True, "populate_by_name": True}


class ScheduleMode(str, Enum):
    """When run_stream reads tokens out"""
    TIME = "time"
    COUNT = "count"
    END = "end"


class ReadoutSchedule(BaseModel):
    """Readout every delta_t microseconds, every n events, or once at the end"""
    mode: ScheduleMode = Field(ScheduleMode.TIME)
    every: Optional[int] = Field(None, ge=1, description="Microseconds (time) or events (count)")

    model_config = {"frozen": True}

    @model_validator(mode='after')
    def check_every(self) -> 'ReadoutSchedule':
        if self.mode != ScheduleMode.END and self.every is None:
            raise ValueError(f"{self.mode.value} schedule needs 'every'")
        return self

    def cut_points(self, t: np.ndarray) -> List[Tuple[int, Optional[int]]]:
        """
        Readout positions over a sorted timestamp array

        Returns:
            (event index, readout time) pairs; a readout at index i sees
            events [0, i). The final pair always closes the stream.
        """
        n = len(t)
        if n == 0:
            return []

        cuts: List[Tuple[int, Optional[int]]] = []
        if self.mode == ScheduleMode.TIME:
            origin = int(t[0])
            boundary = origin + self.every
            while boundary <= int(t[-1]):
                index = int(np.searchsorted(t, np.uint64(boundary), side='left'))
                cuts.append((index, boundary))
                boundary += self.every
            cuts.append((n, boundary))
        elif self.mode == ScheduleMode.COUNT:
            cuts.extend((i, None) for i in range(self.every, n, self.every))
            cuts.append((n, None))
        else:
            cuts.append((n, None))
        return cuts


@dataclass
class Snapshot(TokenSequence):
    """Active tokens materialized at one global step"""
    step: int = 0
    readout_time: Optional[int] = None
