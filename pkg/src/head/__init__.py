"""Transformer encoder and classification head consuming token snapshots"""

from .models import HeadConfig, Prediction
from .transformer import (
    EncoderLayerWeights,
    HeadWeights,
    attention,
    encode,
    encoder_block,
    gelu,
    init_head_tensors,
    layer_norm
)
from .classifier import classify, logits, softmax

__all__ = [
    'HeadConfig',
    'Prediction',
    'EncoderLayerWeights',
    'HeadWeights',
    'attention',
    'encode',
    'encoder_block',
    'gelu',
    'init_head_tensors',
    'layer_norm',
    'classify',
    'logits',
    'softmax'
]
