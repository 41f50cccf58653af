"""
Classifier
Pooling, linear classification layer and softmax over encoder outputs
"""

from typing import Optional, Union

import numpy as np

from src.alert.models import Snapshot
from src.embedder.models import TokenSequence
from src.head.models import HeadConfig, Prediction
from src.head.transformer import HeadWeights, encode, layer_norm


def softmax(logits: np.ndarray) -> np.ndarray:
    """Max-subtracted softmax over the last axis"""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def logits(cfg: HeadConfig, weights: HeadWeights, tokens: np.ndarray) -> np.ndarray:
    """Class logits for a non-empty token sequence"""
    encoded = encode(cfg, weights, tokens)
    pooled = encoded[0] if weights.cls_token is not None else encoded.mean(axis=0)
    if weights.final_norm_weight is not None:
        pooled = layer_norm(pooled, weights.final_norm_weight, weights.final_norm_bias)
    return weights.classifier_weight @ pooled + weights.classifier_bias


def classify(
    cfg: HeadConfig,
    weights: HeadWeights,
    snapshot: Union[Snapshot, TokenSequence, np.ndarray],
    step: Optional[int] = None
) -> Prediction:
    """
    Classify one readout

    Args:
        cfg: Head shape
        weights: Loaded head weights
        snapshot: Snapshot, TokenSequence or bare (n, c) token array
        step: Global step to record (taken from a Snapshot when omitted)

    Returns:
        Prediction; an empty snapshot gives uniform probabilities flagged degenerate
    """
    tokens = snapshot.tokens if isinstance(snapshot, TokenSequence) else np.asarray(snapshot)
    if step is None and isinstance(snapshot, Snapshot):
        step = snapshot.step

    if len(tokens) == 0:
        probs = np.full(cfg.num_classes, 1.0 / cfg.num_classes)
        return Prediction(probs=probs.tolist(), label=0, step=step, degenerate=True)

    probs = softmax(logits(cfg, weights, tokens))
    return Prediction(probs=probs.tolist(), label=int(np.argmax(probs)), step=step)
