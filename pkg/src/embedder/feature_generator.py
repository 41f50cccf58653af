"""
Feature Generator
Shared per-event MLP with inference-folded batch normalization
"""

from dataclasses import dataclass
from typing import Dict, List

import numpy as np
from loguru import logger

from src.embedder.models import MlpConfig
from src.utils.errors import ConfigError, NumericError
from src.utils.weight_archive import WeightArchive


@dataclass(frozen=True)
class LayerWeights:
    """One 1x1-conv layer: affine, folded norm, optional rectifier"""
    weight: np.ndarray
    bias: np.ndarray
    scale: np.ndarray
    shift: np.ndarray
    relu: bool

    @property
    def in_features(self) -> int:
        return self.weight.shape[1]

    @property
    def out_features(self) -> int:
        return self.weight.shape[0]


class FeatureGenerator:
    """
    Shared MLP mapping each input event vector to a c-dimensional feature

    The affine step accumulates over input channels in a fixed order with
    elementwise float32 operations, so a row's output is bit-identical
    whether it is computed alone or inside a batch of any size.
    """

    def __init__(self, cfg: MlpConfig, input_dim: int, layers: List[LayerWeights]):
        widths = cfg.layer_widths(input_dim)
        if len(layers) != cfg.depth:
            raise ConfigError(f"Expected {cfg.depth} MLP layers, got {len(layers)}")
        for i, layer in enumerate(layers):
            if layer.weight.shape != (widths[i + 1], widths[i]):
                raise ConfigError(
                    f"Layer {i} weight shape {layer.weight.shape}, expected {(widths[i + 1], widths[i])}",
                    {"layer": i}
                )

        self.cfg = cfg
        self.input_dim = input_dim
        self.layers = layers
        # Transposed copies make each accumulation step a contiguous row read
        self._weights_t = [np.ascontiguousarray(layer.weight.T) for layer in layers]

    @property
    def out_channels(self) -> int:
        return self.cfg.out_channels

    @classmethod
    def from_archive(cls, cfg: MlpConfig, input_dim: int, archive: WeightArchive) -> 'FeatureGenerator':
        """
        Load fg.layer{i}.weight/.bias/.scale/.shift tensors

        Raises:
            ConfigError: On missing or mis-shaped tensors
        """
        widths = cfg.layer_widths(input_dim)
        layers = []
        for i in range(cfg.depth):
            out_dim, in_dim = widths[i + 1], widths[i]
            layers.append(LayerWeights(
                weight=archive.require(f"fg.layer{i}.weight", (out_dim, in_dim)),
                bias=archive.require(f"fg.layer{i}.bias", (out_dim,)),
                scale=archive.require(f"fg.layer{i}.scale", (out_dim,)),
                shift=archive.require(f"fg.layer{i}.shift", (out_dim,)),
                relu=(i < cfg.depth - 1) or cfg.final_relu
            ))
        return cls(cfg, input_dim, layers)

    def forward(self, inputs: np.ndarray) -> np.ndarray:
        """
        Per-event features

        Args:
            inputs: (n, input_dim) float32 event vectors

        Returns:
            (n, c) float32 features

        Raises:
            ConfigError: On an input width mismatch
            NumericError: If any output is non-finite
        """
        x = np.asarray(inputs, dtype=np.float32)
        if x.ndim == 1:
            x = x[None, :]
        if x.shape[1] != self.input_dim:
            raise ConfigError(f"Event vector width {x.shape[1]}, MLP expects {self.input_dim}")

        for layer, weight_t in zip(self.layers, self._weights_t):
            acc = np.zeros((x.shape[0], layer.out_features), dtype=np.float32)
            term = np.empty_like(acc)
            for i in range(layer.in_features):
                np.multiply(x[:, i, None], weight_t[i], out=term)
                acc += term
            acc += layer.bias
            acc *= layer.scale
            acc += layer.shift
            if layer.relu:
                np.maximum(acc, 0.0, out=acc)
            x = acc

        if not np.all(np.isfinite(x)):
            raise NumericError("Feature generator produced non-finite values")
        return x


def event_feature(generator: FeatureGenerator, vector: np.ndarray) -> np.ndarray:
    """Feature of a single event vector (length input_dim) as a length-c array"""
    return generator.forward(np.asarray(vector, dtype=np.float32)[None, :])[0]


def init_feature_tensors(cfg: MlpConfig, input_dim: int, rng: np.random.Generator) -> Dict[str, np.ndarray]:
    """
    Random fg.* tensors: He-scaled normal weights, small biases, identity folded norm

    Args:
        cfg: MLP shape
        input_dim: Event vector width
        rng: Random generator

    Returns:
        Canonical name to float32 array
    """
    widths = cfg.layer_widths(input_dim)
    tensors = {}
    for i in range(cfg.depth):
        out_dim, in_dim = widths[i + 1], widths[i]
        tensors[f"fg.layer{i}.weight"] = rng.normal(0.0, np.sqrt(2.0 / in_dim), (out_dim, in_dim))
        tensors[f"fg.layer{i}.bias"] = rng.normal(0.0, 0.01, out_dim)
        tensors[f"fg.layer{i}.scale"] = np.ones(out_dim)
        tensors[f"fg.layer{i}.shift"] = np.zeros(out_dim)

    logger.debug(f"Initialized feature generator {widths}")
    return {name: value.astype(np.float32) for name, value in tensors.items()}
