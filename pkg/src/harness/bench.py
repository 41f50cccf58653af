"""
Latency Bench
Per-event update latency, readout inference time and time-to-accuracy over a scheduled replay
"""

import time
from typing import List

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field

from src.alert.engine import AlertEngine
from src.alert.models import AlertConfig, ReadoutSchedule, ScheduleMode
from src.embedder.lert import Embedder
from src.events.models import EventStream
from src.head.classifier import classify
from src.head.models import HeadConfig
from src.head.transformer import HeadWeights


NS_PER_US = 1_000
NS_PER_MS = 1_000_000
US_PER_MS = 1_000


class BenchReport(BaseModel):
    """Wall-clock timings; machine-dependent and informational only"""
    events: int = Field(..., ge=0)
    readouts: int = Field(..., ge=0)
    k: int = Field(..., ge=1)
    update_us_p50: float = Field(..., ge=0, description="Per-event update latency, median")
    update_us_p99: float = Field(..., ge=0, description="Per-event update latency, 99th percentile")
    t_p_ms_mean: float = Field(..., ge=0, description="Snapshot + classify time per readout")
    t_p_ms_p99: float = Field(..., ge=0)
    t_in_ms_mean: float = Field(..., ge=0, description="Input accumulation time per readout")
    tta_ms: float = Field(..., ge=0, description="t_in + t_p")

    def to_lines(self) -> List[str]:
        return [f"{key}={value}" for key, value in self.model_dump().items()]


def _input_spans_ms(stream: EventStream, schedule: ReadoutSchedule, cuts: list) -> List[float]:
    t = stream.events['t']
    spans = []
    previous_time = int(t[0])
    previous_index = 0
    for index, readout_time in cuts:
        if schedule.mode == ScheduleMode.TIME:
            spans.append((readout_time - previous_time) / US_PER_MS)
            previous_time = readout_time
        elif index > previous_index:
            spans.append((int(t[index - 1]) - int(t[previous_index])) / US_PER_MS)
        else:
            spans.append(0.0)
        previous_index = index
    return spans


def bench(
    embedder: Embedder,
    cfg: AlertConfig,
    head_cfg: HeadConfig,
    head: HeadWeights,
    stream: EventStream,
    schedule: ReadoutSchedule,
    warmup: int = 1000
) -> BenchReport:
    """
    Time a scheduled replay

    A throwaway engine first absorbs `warmup` events. Update latency is
    measured per k-batch and divided by its size; t_p covers snapshot plus
    classification; t_in is the stream time each readout waited for.

    Args:
        embedder: Feature source
        cfg: Engine settings
        head_cfg: Head shape
        head: Head weights
        stream: Non-empty sorted stream
        schedule: Readout schedule
        warmup: Events fed to the throwaway engine

    Returns:
        BenchReport
    """
    events = stream.events
    AlertEngine(embedder, cfg).ingest(events[:min(warmup, len(events))])

    engine = AlertEngine(embedder, cfg)
    cuts = schedule.cut_points(events['t'])
    per_event_ns: List[float] = []
    readout_ns: List[int] = []

    start = 0
    for index, _ in cuts:
        for chunk_start in range(start, index, cfg.k):
            chunk = events[chunk_start:min(chunk_start + cfg.k, index)]
            began = time.perf_counter_ns()
            engine.update(chunk)
            per_event_ns.append((time.perf_counter_ns() - began) / len(chunk))
        start = index

        began = time.perf_counter_ns()
        engine.close_interval()
        classify(head_cfg, head, engine.snapshot())
        readout_ns.append(time.perf_counter_ns() - began)

    spans = _input_spans_ms(stream, schedule, cuts) if cuts else [0.0]
    latencies = np.asarray(per_event_ns) if per_event_ns else np.zeros(1)
    readouts = np.asarray(readout_ns, dtype=np.float64) if readout_ns else np.zeros(1)

    t_in = float(np.mean(spans))
    t_p = float(readouts.mean() / NS_PER_MS)
    report = BenchReport(
        events=len(events),
        readouts=len(readout_ns),
        k=cfg.k,
        update_us_p50=float(np.percentile(latencies, 50) / NS_PER_US),
        update_us_p99=float(np.percentile(latencies, 99) / NS_PER_US),
        t_p_ms_mean=t_p,
        t_p_ms_p99=float(np.percentile(readouts, 99) / NS_PER_MS),
        t_in_ms_mean=t_in,
        tta_ms=t_in + t_p
    )
    logger.info(f"Bench: {report.events} events, {report.readouts} readouts, TtA {report.tta_ms:.2f} ms")
    return report
