"""Configuration, CLI, FLOP accounting, latency bench, voting evaluation and equivalence oracles"""

from .config import (
    EvalConfig,
    GenerationConfig,
    PositionalConfig,
    ReadoutConfig,
    SamplingConfig,
    Settings,
    load_settings,
    resolve_config_path,
    weights_path
)
from .flops import FlopReport, SampleStats, count_flops, count_params, head_flops, mean_stats, sample_stats, sweep
from .evaluation import EvalReport, evaluate, majority_vote, window_votes
from .verify import (
    Divergence,
    VerifyMode,
    VerifyReport,
    verify_batching,
    verify_decay,
    verify_equivalence,
    verify_strict
)
from .bench import BenchReport, bench
from .pipeline import init_weights, load_models, replay_predictions, synthetic_files

__all__ = [
    'EvalConfig',
    'GenerationConfig',
    'PositionalConfig',
    'ReadoutConfig',
    'SamplingConfig',
    'Settings',
    'load_settings',
    'resolve_config_path',
    'weights_path',
    'FlopReport',
    'SampleStats',
    'count_flops',
    'count_params',
    'head_flops',
    'mean_stats',
    'sample_stats',
    'sweep',
    'EvalReport',
    'evaluate',
    'majority_vote',
    'window_votes',
    'Divergence',
    'VerifyMode',
    'VerifyReport',
    'verify_batching',
    'verify_decay',
    'verify_equivalence',
    'verify_strict',
    'BenchReport',
    'bench',
    'init_weights',
    'load_models',
    'replay_predictions',
    'synthetic_files'
]
