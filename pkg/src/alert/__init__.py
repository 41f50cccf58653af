"""Asynchronous token updates with Old Maximum Value Decay and on-demand readout"""

from .models import AlertConfig, CounterMode, InitMode, ReadoutSchedule, ScheduleMode, Snapshot
from .token_state import EagerTokenState, TokenState, decayed, init_state
from .engine import AlertEngine

__all__ = [
    'AlertConfig',
    'CounterMode',
    'InitMode',
    'ReadoutSchedule',
    'ScheduleMode',
    'Snapshot',
    'EagerTokenState',
    'TokenState',
    'decayed',
    'init_state',
    'AlertEngine'
]
