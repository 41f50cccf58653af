"""
Pipeline
Weight loading, random initialization and end-to-end replay shared by the CLI, bench and API
"""

from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple, Union

import numpy as np
from loguru import logger

from src.alert.engine import AlertEngine
from src.alert.models import ReadoutSchedule
from src.embedder.lert import Embedder, init_embedder_tensors
from src.events.models import EventStream
from src.events.synthetic import generate_synthetic
from src.harness.config import Settings
from src.head.classifier import classify
from src.head.transformer import HeadWeights, init_head_tensors
from src.utils.weight_archive import WeightArchive, read_archive


def init_weights(settings: Settings, seed: int = 0) -> Dict[str, np.ndarray]:
    """Every tensor the configured embedder and head need, randomly initialized"""
    rng = np.random.default_rng(seed)
    tensors = init_embedder_tensors(settings.embedder, rng)
    tensors.update(init_head_tensors(settings.head, rng))
    return tensors


def load_models(
    settings: Settings,
    path: Optional[Union[str, Path]] = None,
    seed: int = 0
) -> Tuple[Embedder, HeadWeights]:
    """
    Build the embedder and head from an archive, or from random weights

    Args:
        settings: Model shapes
        path: WeightArchive file; None means random weights
        seed: Seed for random weights

    Returns:
        (Embedder, HeadWeights)

    Raises:
        ConfigError: If the archive is missing or lacks a tensor
    """
    if path is None:
        logger.warning(f"No weight archive given; using random weights (seed={seed})")
        archive = WeightArchive(init_weights(settings, seed))
    else:
        archive = read_archive(path)
        logger.info(f"Loaded {len(archive)} tensors from {path}")

    embedder = Embedder.from_archive(settings.embedder, archive)
    head = HeadWeights.from_archive(settings.head, archive)
    return embedder, head


def synthetic_files(settings: Settings, files_per_class: int) -> Iterator[Tuple[str, int, EventStream]]:
    """(file_id, class_id, stream) for every synthetic recording of every class"""
    for class_id in range(settings.head.num_classes):
        for index in range(files_per_class):
            seed = settings.gen.seed + 1000 * class_id + index
            stream = generate_synthetic(settings.generator(class_id), seed)
            yield f"class{class_id}_file{index}", class_id, stream


def replay_predictions(
    embedder: Embedder,
    head: HeadWeights,
    settings: Settings,
    stream: EventStream,
    schedule: ReadoutSchedule,
    file_id: str = "stream",
    label: int = -1
) -> List[dict]:
    """
    Classify every readout of one stream

    Returns:
        One row per readout: file_id, sample_index, label, pred, step,
        readout_time, tokens, degenerate
    """
    engine = AlertEngine(embedder, settings.alert)
    rows = []
    for index, snapshot in enumerate(engine.run_stream(stream, schedule)):
        prediction = classify(settings.head, head, snapshot)
        rows.append({
            "file_id": file_id,
            "sample_index": index,
            "label": label,
            "pred": prediction.label,
            "step": snapshot.step,
            "readout_time": snapshot.readout_time,
            "tokens": len(snapshot),
            "degenerate": prediction.degenerate
        })
    return rows
