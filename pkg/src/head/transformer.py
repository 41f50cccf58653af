"""
Transformer Encoder
Inference-only pre-norm encoder blocks over a variable-length token sequence
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
from loguru import logger

from src.head.models import HeadConfig
from src.utils.errors import DegenerateInputError, NumericError
from src.utils.weight_archive import WeightArchive


LN_EPS = 1e-5


@dataclass(frozen=True)
class EncoderLayerWeights:
    """One pre-norm block"""
    ln1_weight: np.ndarray
    ln1_bias: np.ndarray
    qkv_weight: np.ndarray
    qkv_bias: np.ndarray
    attn_out_weight: np.ndarray
    attn_out_bias: np.ndarray
    ln2_weight: np.ndarray
    ln2_bias: np.ndarray
    ff1_weight: np.ndarray
    ff1_bias: np.ndarray
    ff2_weight: np.ndarray
    ff2_bias: np.ndarray


@dataclass(frozen=True)
class HeadWeights:
    """Encoder blocks, optional class token, final norm and classifier (float64 copies)"""
    layers: List[EncoderLayerWeights]
    cls_token: Optional[np.ndarray]
    final_norm_weight: Optional[np.ndarray]
    final_norm_bias: Optional[np.ndarray]
    classifier_weight: np.ndarray
    classifier_bias: np.ndarray

    @classmethod
    def from_archive(cls, cfg: HeadConfig, archive: WeightArchive) -> 'HeadWeights':
        """
        Load head.* tensors

        Raises:
            ConfigError: On missing, mis-shaped or non-finite tensors
        """
        c, hidden = cfg.token_width, cfg.hidden_width

        def load(name, shape):
            return archive.require(name, shape).astype(np.float64)

        shapes = {
            "ln1.weight": (c,), "ln1.bias": (c,),
            "qkv.weight": (3 * c, c), "qkv.bias": (3 * c,),
            "attn_out.weight": (c, c), "attn_out.bias": (c,),
            "ln2.weight": (c,), "ln2.bias": (c,),
            "ff1.weight": (hidden, c), "ff1.bias": (hidden,),
            "ff2.weight": (c, hidden), "ff2.bias": (c,)
        }
        layers = []
        for i in range(cfg.layers):
            loaded = {
                name.replace(".", "_"): load(f"head.layer{i}.{name}", shape)
                for name, shape in shapes.items()
            }
            layers.append(EncoderLayerWeights(**loaded))

        return cls(
            layers=layers,
            cls_token=load("head.cls_token", (c,)) if cfg.use_class_token else None,
            final_norm_weight=load("head.final_norm.weight", (c,)) if cfg.final_norm else None,
            final_norm_bias=load("head.final_norm.bias", (c,)) if cfg.final_norm else None,
            classifier_weight=load("head.classifier.weight", (cfg.num_classes, c)),
            classifier_bias=load("head.classifier.bias", (cfg.num_classes,))
        )


def layer_norm(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Normalize the last axis to zero mean and unit variance, then scale and shift"""
    mean = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    return (x - mean) / np.sqrt(var + LN_EPS) * weight + bias


def gelu(x: np.ndarray) -> np.ndarray:
    """tanh approximation"""
    return 0.5 * x * (1.0 + np.tanh(math.sqrt(2.0 / math.pi) * (x + 0.044715 * x ** 3)))


def attention(cfg: HeadConfig, layer: EncoderLayerWeights, x: np.ndarray) -> np.ndarray:
    """
    Multi-head self-attention

    Args:
        cfg: Head shape
        layer: Block weights
        x: (n, c) normalized tokens

    Returns:
        (n, c) projected attention output
    """
    n, c = x.shape
    qkv = x @ layer.qkv_weight.T + layer.qkv_bias
    q, k, v = (part.reshape(n, cfg.heads, cfg.head_dim).transpose(1, 0, 2) for part in np.split(qkv, 3, axis=1))

    scores = q @ k.transpose(0, 2, 1) / math.sqrt(cfg.head_dim)
    scores -= scores.max(axis=-1, keepdims=True)
    weights = np.exp(scores)
    weights /= weights.sum(axis=-1, keepdims=True)

    mixed = (weights @ v).transpose(1, 0, 2).reshape(n, c)
    return mixed @ layer.attn_out_weight.T + layer.attn_out_bias


def encoder_block(cfg: HeadConfig, layer: EncoderLayerWeights, x: np.ndarray) -> np.ndarray:
    x = x + attention(cfg, layer, layer_norm(x, layer.ln1_weight, layer.ln1_bias))
    hidden = gelu(layer_norm(x, layer.ln2_weight, layer.ln2_bias) @ layer.ff1_weight.T + layer.ff1_bias)
    return x + hidden @ layer.ff2_weight.T + layer.ff2_bias


def encode(cfg: HeadConfig, weights: HeadWeights, tokens: np.ndarray) -> np.ndarray:
    """
    Run the encoder stack

    The class token, when configured, is prepended before the first block.

    Args:
        cfg: Head shape
        weights: Loaded head weights
        tokens: (n, c) token sequence

    Returns:
        (n, c) float64, or (n + 1, c) with the class token first

    Raises:
        DegenerateInputError: On an empty sequence
        NumericError: On non-finite output
    """
    x = np.asarray(tokens, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise DegenerateInputError("Encoder needs at least one token")
    if weights.cls_token is not None:
        x = np.vstack([weights.cls_token[None, :], x])

    for layer in weights.layers:
        x = encoder_block(cfg, layer, x)

    if not np.all(np.isfinite(x)):
        raise NumericError("Encoder produced non-finite values")
    return x


def init_head_tensors(cfg: HeadConfig, rng: np.random.Generator) -> Dict[str, np.ndarray]:
    """Random head.* tensors: scaled normal projections, unit norms, zero biases"""
    c, hidden = cfg.token_width, cfg.hidden_width
    tensors = {}
    for i in range(cfg.layers):
        prefix = f"head.layer{i}"
        tensors[f"{prefix}.ln1.weight"] = np.ones(c)
        tensors[f"{prefix}.ln1.bias"] = np.zeros(c)
        tensors[f"{prefix}.qkv.weight"] = rng.normal(0.0, 1.0 / math.sqrt(c), (3 * c, c))
        tensors[f"{prefix}.qkv.bias"] = np.zeros(3 * c)
        tensors[f"{prefix}.attn_out.weight"] = rng.normal(0.0, 1.0 / math.sqrt(c), (c, c))
        tensors[f"{prefix}.attn_out.bias"] = np.zeros(c)
        tensors[f"{prefix}.ln2.weight"] = np.ones(c)
        tensors[f"{prefix}.ln2.bias"] = np.zeros(c)
        tensors[f"{prefix}.ff1.weight"] = rng.normal(0.0, 1.0 / math.sqrt(c), (hidden, c))
        tensors[f"{prefix}.ff1.bias"] = np.zeros(hidden)
        tensors[f"{prefix}.ff2.weight"] = rng.normal(0.0, 1.0 / math.sqrt(hidden), (c, hidden))
        tensors[f"{prefix}.ff2.bias"] = np.zeros(c)

    if cfg.use_class_token:
        tensors["head.cls_token"] = rng.normal(0.0, 0.02, c)
    if cfg.final_norm:
        tensors["head.final_norm.weight"] = np.ones(c)
        tensors["head.final_norm.bias"] = np.zeros(c)
    tensors["head.classifier.weight"] = rng.normal(0.0, 1.0 / math.sqrt(c), (cfg.num_classes, c))
    tensors["head.classifier.bias"] = np.zeros(cfg.num_classes)

    logger.debug(f"Initialized head: {cfg.layers} layers, {cfg.heads} heads, width {c}")
    return {name: value.astype(np.float32) for name, value in tensors.items()}
