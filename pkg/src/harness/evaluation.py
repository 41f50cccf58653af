"""
Evaluation
Sample, file-vote and sliding-window-vote accuracies over tagged predictions
"""

from typing import Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel, Field

from src.utils.errors import PreconditionError


PREDICTION_COLUMNS = ["file_id", "sample_index", "label", "pred"]


class EvalReport(BaseModel):
    """Accuracies plus optional timing of one evaluation run"""
    samples: int = Field(..., ge=0)
    files: int = Field(..., ge=0)
    sa: float = Field(..., ge=0, le=1, description="Sample accuracy")
    fva: float = Field(..., ge=0, le=1, description="File voting accuracy")
    nva: Optional[float] = Field(None, ge=0, le=1, description="N-voting accuracy")
    nva_n: Optional[int] = Field(None, ge=1)
    degenerate: int = Field(0, ge=0, description="Predictions made on empty readouts")
    t_in_ms: Optional[float] = Field(None, ge=0, description="Mean input accumulation time")
    t_p_ms: Optional[float] = Field(None, ge=0, description="Mean inference time")

    def to_lines(self) -> list:
        return [f"{key}={value}" for key, value in self.model_dump().items() if value is not None]


def majority_vote(preds: Sequence[int]) -> int:
    """
    Most frequent label

    Ties go to the label predicted most recently.
    """
    preds = np.asarray(preds)
    if preds.size == 0:
        raise PreconditionError("Cannot vote over zero predictions")

    labels, counts = np.unique(preds, return_counts=True)
    tied = labels[counts == counts.max()]
    if len(tied) == 1:
        return int(tied[0])
    for pred in preds[::-1]:
        if pred in tied:
            return int(pred)
    return int(tied[0])


def window_votes(preds: Sequence[int], n: int) -> np.ndarray:
    """
    Majority of every full length-n window (step 1)

    A sequence shorter than n is one window over everything.
    """
    preds = np.asarray(preds)
    if len(preds) <= n:
        return np.array([majority_vote(preds)])
    return np.array([majority_vote(preds[i:i + n]) for i in range(len(preds) - n + 1)])


def evaluate(predictions: pd.DataFrame, nva_n: Optional[int] = None) -> EvalReport:
    """
    SA, FVA and (optionally) NVA over tagged predictions

    Args:
        predictions: Frame with file_id, sample_index, label (truth) and pred;
            an optional boolean "degenerate" column is counted
        nva_n: Sliding vote window length, or None to skip NVA

    Returns:
        EvalReport

    Raises:
        PreconditionError: On an empty frame or missing columns
    """
    missing = [c for c in PREDICTION_COLUMNS if c not in predictions.columns]
    if missing:
        raise PreconditionError(f"Prediction frame lacks columns {missing}")
    if predictions.empty:
        raise PreconditionError("Cannot evaluate an empty prediction set")

    frame = predictions.sort_values(["file_id", "sample_index"], kind="stable")
    sa = float((frame["pred"] == frame["label"]).mean())

    file_correct = []
    window_correct = []
    for _, group in frame.groupby("file_id", sort=False):
        truth = int(group["label"].iloc[-1])
        preds = group["pred"].to_numpy()
        file_correct.append(majority_vote(preds) == truth)
        if nva_n is not None:
            window_correct.extend(window_votes(preds, nva_n) == truth)

    degenerate = int(frame["degenerate"].sum()) if "degenerate" in frame.columns else 0
    report = EvalReport(
        samples=len(frame),
        files=len(file_correct),
        sa=sa,
        fva=float(np.mean(file_correct)),
        nva=float(np.mean(window_correct)) if nva_n is not None else None,
        nva_n=nva_n,
        degenerate=degenerate
    )
    logger.info(f"Evaluated {report.samples} samples over {report.files} files: SA={report.sa:.4f} FVA={report.fva:.4f}")
    return report
