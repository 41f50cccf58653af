"""
FLOP Accounting
Analytic per-event and per-sample cost model for the embedder and the transformer head
"""

import itertools
from typing import Dict, List, Mapping, Sequence

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel, Field

from src.embedder.models import EmbedderConfig, MlpConfig
from src.events.models import EventStream
from src.events.sampling import random_ccim_windows
from src.grid.patch_grid import filter_active, partition_sample
from src.harness.config import load_settings, parse_override
from src.head.models import HeadConfig


# Fixed costs: the sin/cos pair with its argument, and the two coordinate normalizations
TIME_ENCODING_FLOPS = 8
TIME_SHIFT_FLOPS = 2
NORMALIZE_FLOPS = 4
LAYER_NORM_FLOPS = 5
GELU_FLOPS = 8
SOFTMAX_FLOPS = 4


class SampleStats(BaseModel):
    """Event and patch counts of one sample"""
    events: int = Field(..., ge=0, description="Events in the sample")
    active_events: int = Field(..., ge=0, description="Events inside active patches")
    active_patches: int = Field(..., ge=0, description="Tokens handed to the head")


class FlopReport(BaseModel):
    """Analytic FLOP and parameter counts"""
    flops_per_event: int = Field(..., ge=0, description="Embedder path for one event")
    flops_per_sample: int = Field(..., ge=0, description="Embedder over the active events plus head over one readout")
    breakdown: Dict[str, int] = Field(default_factory=dict, description="Per-stage counts")
    params_embedder: int = Field(0, ge=0)
    params_head: int = Field(0, ge=0)
    params_total: int = Field(0, ge=0)

    def to_lines(self) -> List[str]:
        lines = [
            f"flops_per_event={self.flops_per_event}",
            f"flops_per_sample={self.flops_per_sample}",
            f"params_embedder={self.params_embedder}",
            f"params_head={self.params_head}",
            f"params_total={self.params_total}"
        ]
        lines.extend(f"breakdown.{name}={value}" for name, value in self.breakdown.items())
        return lines


def count_flops_layer(in_features: int, out_features: int, relu: bool) -> int:
    """2*in*out (MAC = 2 FLOPs) + bias + folded norm (scale, shift) + rectifier"""
    flops = 2 * in_features * out_features + out_features + 2 * out_features
    if relu:
        flops += out_features
    return flops


def mlp_layer_flops(mlp: MlpConfig, input_dim: int) -> Dict[str, int]:
    widths = mlp.layer_widths(input_dim)
    return {
        f"fg.layer{i}": count_flops_layer(widths[i], widths[i + 1], (i < mlp.depth - 1) or mlp.final_relu)
        for i in range(mlp.depth)
    }


def head_flops(head: HeadConfig, tokens: int) -> Dict[str, int]:
    """
    Head cost for one readout of `tokens` patch tokens

    Args:
        head: Encoder shape
        tokens: Active patches (the class token is added here when configured)

    Returns:
        Per-stage counts; all zero for an empty readout
    """
    if tokens == 0:
        return {"head.encoder": 0, "head.pool": 0, "head.classifier": 0}

    n = tokens + (1 if head.use_class_token else 0)
    c, h, k = head.token_width, head.hidden_width, head.num_classes
    per_layer = (
        2 * LAYER_NORM_FLOPS * n * c          # ln1, ln2
        + 2 * n * c * 3 * c + 3 * n * c       # qkv projection
        + 2 * n * n * c + head.heads * n * n  # scores and scaling
        + SOFTMAX_FLOPS * head.heads * n * n
        + 2 * n * n * c                       # weighted sum
        + 2 * n * c * c + n * c               # output projection
        + 2 * n * c * h + n * h               # ff1
        + GELU_FLOPS * n * h
        + 2 * n * h * c + n * c               # ff2
        + 2 * n * c                           # residuals
    )
    pool = 0 if head.use_class_token else n * c
    classifier = 2 * c * k + k + SOFTMAX_FLOPS * k
    if head.final_norm:
        classifier += LAYER_NORM_FLOPS * c
    return {"head.encoder": head.layers * per_layer, "head.pool": pool, "head.classifier": classifier}


def count_params(cfg: EmbedderConfig, head: HeadConfig) -> Dict[str, int]:
    widths = cfg.mlp.layer_widths(cfg.input_dim)
    embedder = sum(widths[i] * widths[i + 1] + 3 * widths[i + 1] for i in range(cfg.mlp.depth))
    if cfg.pos_enabled:
        embedder += cfg.grid.num_patches * cfg.token_width

    c, h = head.token_width, head.hidden_width
    per_layer = 4 * c + (3 * c * c + 3 * c) + (c * c + c) + (h * c + h) + (c * h + c)
    params_head = head.layers * per_layer + head.num_classes * c + head.num_classes
    if head.use_class_token:
        params_head += c
    if head.final_norm:
        params_head += 2 * c
    return {"embedder": embedder, "head": params_head}


def count_flops(cfg: EmbedderConfig, head: HeadConfig, stats: SampleStats) -> FlopReport:
    """
    Analytic FLOPs under MAC = 2 FLOPs

    Per event: time encoding (or origin shift), coordinate normalization,
    every MLP layer and one max per channel for pooling. Per sample: the
    per-event cost over the active events, one positional add per token,
    and the head over the active patches.

    Args:
        cfg: Embedder shape
        head: Head shape
        stats: Sample event and patch counts

    Returns:
        FlopReport
    """
    layers = mlp_layer_flops(cfg.mlp, cfg.input_dim)
    time_cost = TIME_ENCODING_FLOPS if cfg.te.enabled else TIME_SHIFT_FLOPS
    pool = cfg.token_width

    breakdown = {"time": time_cost, "normalize": NORMALIZE_FLOPS}
    breakdown.update(layers)
    breakdown["fg"] = sum(layers.values())
    breakdown["pool"] = pool
    per_event = time_cost + NORMALIZE_FLOPS + breakdown["fg"] + pool

    positional = stats.active_patches * cfg.token_width if cfg.pos_enabled else 0
    head_costs = head_flops(head, stats.active_patches)
    breakdown["events"] = per_event * stats.active_events
    breakdown["positional"] = positional
    breakdown.update(head_costs)
    per_sample = breakdown["events"] + positional + sum(head_costs.values())

    params = count_params(cfg, head)
    return FlopReport(
        flops_per_event=per_event,
        flops_per_sample=per_sample,
        breakdown=breakdown,
        params_embedder=params["embedder"],
        params_head=params["head"],
        params_total=params["embedder"] + params["head"]
    )


def sample_stats(cfg: EmbedderConfig, events: np.ndarray) -> SampleStats:
    """Counts after partitioning and activity filtering"""
    active, partition = filter_active(cfg.grid, partition_sample(cfg.grid, events))
    return SampleStats(events=len(events), active_events=partition.total, active_patches=len(active))


def mean_stats(cfg: EmbedderConfig, stream: EventStream, ne: int, windows: int, seed: int) -> SampleStats:
    """Average SampleStats over random CCIM windows (rounded)"""
    stats = [sample_stats(cfg, events) for _, events in random_ccim_windows(stream, ne, windows, seed)]
    return SampleStats(
        events=int(round(np.mean([s.events for s in stats]))),
        active_events=int(round(np.mean([s.active_events for s in stats]))),
        active_patches=int(round(np.mean([s.active_patches for s in stats])))
    )


def parse_sweep(items: Sequence[str]) -> Dict[str, List[str]]:
    """Parse key=v1,v2 arguments into a knob grid"""
    grid = {}
    for item in items:
        key, values = parse_override(item)
        grid[key] = [v.strip() for v in values.split(",") if v.strip()]
    return grid


def sweep(
    config,
    knobs: Mapping[str, Sequence[str]],
    stream: EventStream,
    overrides: Sequence[str] = (),
    windows: int = 8
) -> pd.DataFrame:
    """
    FlopReport over the cartesian product of knob values

    Args:
        config: Base preset name or path
        knobs: Config key to candidate values
        stream: Stream the sample statistics are measured on
        overrides: Fixed overrides applied before each grid point
        windows: Random CCIM windows per grid point

    Returns:
        One row per grid point: knob values, sample stats and report fields
    """
    keys = list(knobs)
    rows = []
    for combo in itertools.product(*(knobs[k] for k in keys)):
        point = [f"{k}={v}" for k, v in zip(keys, combo)]
        settings = load_settings(config, list(overrides) + point)
        ne = min(settings.sample.ne, len(stream))
        stats = mean_stats(settings.embedder, stream, ne, windows, settings.sample.seed)
        report = count_flops(settings.embedder, settings.head, stats)

        row = dict(zip(keys, combo))
        row.update(stats.model_dump())
        row.update(report.model_dump(exclude={'breakdown'}))
        rows.append(row)

    logger.info(f"Swept {len(rows)} grid points over {keys}")
    return pd.DataFrame(rows)
