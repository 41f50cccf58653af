"""
Embedder Configuration Models
Time encoding, feature generator (shared MLP) and the embedder bundle
"""

from dataclasses import dataclass
from typing import Iterator, List, Tuple

import numpy as np
from pydantic import BaseModel, Field

from src.grid.patch_grid import GridConfig, PatchId


class TimeEncodingConfig(BaseModel):
    """Sinusoidal time encoding; disabled means plain LERT"""
    alpha: float = Field(1.0, gt=0, description="Amplitude")
    f_hz: float = Field(4.0, gt=0, description="Frequency in Hz")
    phi: float = Field(0.0, description="Phase in radians")
    enabled: bool = Field(True, description="TELERT when true, LERT when false")

    model_config = {"frozen": True}


class MlpConfig(BaseModel):
    """Shared per-event MLP shape: hidden_i = expansion * hidden_{i-1}"""
    depth: int = Field(2, ge=1, description="Number of layers")
    base_channels: int = Field(12, ge=1, description="Width of the first hidden layer")
    expansion: float = Field(2.0, ge=1.0, description="Width growth factor between hidden layers")
    out_channels: int = Field(128, ge=1, description="Token width c")
    final_relu: bool = Field(False, description="Rectify the last layer too")

    model_config = {"frozen": True}

    def layer_widths(self, input_dim: int) -> List[int]:
        """
        Width schedule from input to token

        Returns:
            [input_dim, hidden_0, ..., hidden_{depth-2}, out_channels]
        """
        hidden = [
            int(round(self.base_channels * self.expansion ** i))
            for i in range(self.depth - 1)
        ]
        return [input_dim] + hidden + [self.out_channels]


class EmbedderConfig(BaseModel):
    """Everything the (TE)LERT embedder needs besides weights"""
    grid: GridConfig = Field(default_factory=GridConfig)
    te: TimeEncodingConfig = Field(default_factory=TimeEncodingConfig)
    mlp: MlpConfig = Field(default_factory=MlpConfig)
    pos_enabled: bool = Field(True, description="Add positional embeddings to tokens")

    model_config = {"frozen": True}

    @property
    def input_dim(self) -> int:
        """5 for TELERT (t_x, t_y, x, y, p), 4 for LERT (t, x, y, p)"""
        return 5 if self.te.enabled else 4

    @property
    def token_width(self) -> int:
        return self.mlp.out_channels


@dataclass
class PatchToken:
    """Pooled feature of one patch"""
    values: np.ndarray
    patch: PatchId


@dataclass
class TokenSequence:
    """Row-major ordered tokens of the active patches"""
    patches: np.ndarray
    tokens: np.ndarray
    grid_w: int

    def __len__(self) -> int:
        return len(self.patches)

    def items(self) -> Iterator[Tuple[PatchId, PatchToken]]:
        for index, values in zip(self.patches, self.tokens):
            patch = PatchId.from_flat(int(index), self.grid_w)
            yield patch, PatchToken(values=values, patch=patch)

    @classmethod
    def empty(cls, width: int, grid_w: int) -> 'TokenSequence':
        return cls(
            patches=np.zeros(0, dtype=np.int64),
            tokens=np.zeros((0, width), dtype=np.float32),
            grid_w=grid_w
        )
