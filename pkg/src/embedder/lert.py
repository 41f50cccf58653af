"""
(TE)LERT Embedder
Synchronous events-to-tokens conversion: partition, filter, normalize, encode time,
shared MLP, channel-wise max pooling and positional embeddings
"""

from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from loguru import logger

from src.embedder.feature_generator import FeatureGenerator, init_feature_tensors
from src.embedder.models import EmbedderConfig, PatchToken, TokenSequence
from src.embedder.time_encoding import US_TO_S, encode_times, shift_time_origin
from src.grid.patch_grid import NormalizedBatch, PatchId, filter_active, partition_sample
from src.utils.errors import ConfigError, PreconditionError
from src.utils.weight_archive import WeightArchive


class PositionalTable:
    """One learnt c-vector per grid cell, indexed by flat patch id"""

    def __init__(self, table: np.ndarray, grid_w: int):
        self.table = np.asarray(table, dtype=np.float32)
        self.grid_w = grid_w

    @classmethod
    def zeros(cls, num_patches: int, width: int, grid_w: int) -> 'PositionalTable':
        """Identity table, used when positional embeddings are disabled"""
        return cls(np.zeros((num_patches, width), dtype=np.float32), grid_w)

    def __len__(self) -> int:
        return self.table.shape[0]

    def row(self, patch: Union[PatchId, int]) -> np.ndarray:
        index = patch.flat(self.grid_w) if isinstance(patch, PatchId) else int(patch)
        if not 0 <= index < len(self):
            raise ConfigError(f"No positional row for patch {patch}", {"patch": index})
        return self.table[index]

    def is_unique(self) -> bool:
        """True when no two grid cells share an embedding"""
        return len(np.unique(self.table, axis=0)) == len(self)


def pool_patch(features: Union[np.ndarray, Sequence[np.ndarray]], patch: Optional[PatchId] = None) -> PatchToken:
    """
    Channel-wise maximum over a patch's event features

    Args:
        features: (n, c) array or list of c-vectors, n >= 1
        patch: Patch the features belong to

    Returns:
        PatchToken with out[j] = max_i features[i][j]

    Raises:
        PreconditionError: On an empty feature set
    """
    stacked = np.asarray(features, dtype=np.float32)
    if stacked.ndim != 2 or stacked.shape[0] == 0:
        raise PreconditionError("pool_patch needs at least one feature vector")
    return PatchToken(values=stacked.max(axis=0), patch=patch)


def add_positional(token: PatchToken, table: PositionalTable) -> PatchToken:
    """
    Add the patch's positional row to a pooled token

    Raises:
        ConfigError: If the table has no row for the patch
    """
    return PatchToken(values=token.values + table.row(token.patch), patch=token.patch)


def build_inputs(cfg: EmbedderConfig, batch: NormalizedBatch, t_origin: int = 0) -> np.ndarray:
    """
    Assemble MLP input vectors for normalized events

    TELERT rows are (t_x, t_y, xn, yn, p) on absolute time; LERT rows are
    (t, xn, yn, p) with t in seconds relative to t_origin.

    Returns:
        (n, input_dim) float32
    """
    n = len(batch)
    inputs = np.empty((n, cfg.input_dim), dtype=np.float32)
    if cfg.te.enabled:
        t_x, t_y = encode_times(cfg.te, batch.t)
        inputs[:, 0] = t_x
        inputs[:, 1] = t_y
        column = 2
    else:
        inputs[:, 0] = (batch.t.astype(np.int64) - int(t_origin)).astype(np.float64) * US_TO_S
        column = 1
    inputs[:, column] = batch.xn
    inputs[:, column + 1] = batch.yn
    inputs[:, column + 2] = batch.p
    return inputs


class Embedder:
    """Feature generator plus positional table for one EmbedderConfig"""

    def __init__(self, cfg: EmbedderConfig, generator: FeatureGenerator, table: PositionalTable):
        grid = cfg.grid
        if table.table.shape != (grid.num_patches, cfg.token_width):
            raise ConfigError(
                f"Positional table shape {table.table.shape}, expected {(grid.num_patches, cfg.token_width)}"
            )
        self.cfg = cfg
        self.generator = generator
        self.table = table

    @classmethod
    def from_archive(cls, cfg: EmbedderConfig, archive: WeightArchive) -> 'Embedder':
        """Load fg.* and pos.table (the latter only when positional embeddings are enabled)"""
        generator = FeatureGenerator.from_archive(cfg.mlp, cfg.input_dim, archive)
        grid = cfg.grid
        if cfg.pos_enabled:
            table = PositionalTable(
                archive.require("pos.table", (grid.num_patches, cfg.token_width)),
                grid.grid_w
            )
            if not table.is_unique():
                logger.warning("pos.table has repeated rows; tokens of different patches can coincide")
        else:
            table = PositionalTable.zeros(grid.num_patches, cfg.token_width, grid.grid_w)
        return cls(cfg, generator, table)

    def embed_sample(self, events: np.ndarray) -> TokenSequence:
        """
        Tokens for one sample

        partition -> filter -> normalize -> (encode time) -> MLP -> max pool
        -> positional embedding, one token per active patch in row-major order.

        Args:
            events: Structured event array (one CCIM/CTIM sample)

        Returns:
            TokenSequence (empty when no patch is active)
        """
        grid = self.cfg.grid
        if len(events) == 0:
            return TokenSequence.empty(self.cfg.token_width, grid.grid_w)

        if not self.cfg.te.enabled:
            events = shift_time_origin(events)

        active, partition = filter_active(grid, partition_sample(grid, events))
        if not active:
            logger.debug(f"No active patch among {len(events)} events")
            return TokenSequence.empty(self.cfg.token_width, grid.grid_w)

        groups = [partition.patches[index] for index in active]
        merged = NormalizedBatch(
            t=np.concatenate([g.t for g in groups]),
            xn=np.concatenate([g.xn for g in groups]),
            yn=np.concatenate([g.yn for g in groups]),
            p=np.concatenate([g.p for g in groups]),
            patch=np.concatenate([g.patch for g in groups])
        )
        features = self.generator.forward(build_inputs(self.cfg, merged))

        starts = np.cumsum([0] + [len(g) for g in groups[:-1]])
        pooled = np.maximum.reduceat(features, starts, axis=0)
        tokens = pooled + self.table.table[active]

        logger.debug(f"Embedded {len(merged)} active events into {len(active)} tokens")
        return TokenSequence(
            patches=np.asarray(active, dtype=np.int64),
            tokens=tokens.astype(np.float32),
            grid_w=grid.grid_w
        )


def embed_sample(cfg: EmbedderConfig, archive: WeightArchive, events: np.ndarray) -> List[tuple]:
    """Functional form of Embedder.embed_sample returning (PatchId, PatchToken) pairs"""
    return list(Embedder.from_archive(cfg, archive).embed_sample(events).items())


def init_embedder_tensors(cfg: EmbedderConfig, rng: np.random.Generator) -> Dict[str, np.ndarray]:
    """Random fg.* tensors plus a unique pos.table"""
    tensors = init_feature_tensors(cfg.mlp, cfg.input_dim, rng)
    if cfg.pos_enabled:
        shape = (cfg.grid.num_patches, cfg.token_width)
        tensors["pos.table"] = rng.normal(0.0, 0.02, shape).astype(np.float32)
    return tensors
