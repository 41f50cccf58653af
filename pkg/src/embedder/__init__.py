"""Synchronous (TE)LERT embedder: time encoding, shared MLP, max pooling, positional embeddings"""

from .models import EmbedderConfig, MlpConfig, PatchToken, TimeEncodingConfig, TokenSequence
from .time_encoding import encode_time, encode_times, shift_time_origin
from .feature_generator import FeatureGenerator, LayerWeights, event_feature, init_feature_tensors
from .lert import (
    Embedder,
    PositionalTable,
    add_positional,
    build_inputs,
    embed_sample,
    init_embedder_tensors,
    pool_patch
)

__all__ = [
    'EmbedderConfig',
    'MlpConfig',
    'PatchToken',
    'TimeEncodingConfig',
    'TokenSequence',
    'encode_time',
    'encode_times',
    'shift_time_origin',
    'FeatureGenerator',
    'LayerWeights',
    'event_feature',
    'init_feature_tensors',
    'Embedder',
    'PositionalTable',
    'add_positional',
    'build_inputs',
    'embed_sample',
    'init_embedder_tensors',
    'pool_patch'
]
