"""
Command Line Interface
alert gen|init-weights|embed|stream|classify|verify|flops|bench|eval
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd
from dotenv import load_dotenv
from loguru import logger

from src.alert.engine import AlertEngine
from src.events.models import EventStream, InputMode
from src.events.sampling import iter_ccim, iter_ctim
from src.events.stream_io import read_stream, write_stream
from src.events.synthetic import generate_synthetic
from src.harness.bench import bench
from src.harness.config import Settings, load_settings, weights_path
from src.harness.evaluation import evaluate
from src.harness.flops import count_flops, mean_stats, parse_sweep, sweep
from src.harness.pipeline import init_weights, load_models, replay_predictions, synthetic_files
from src.harness.verify import VerifyMode, verify_equivalence
from src.head.classifier import classify
from src.utils.errors import AlertError, ConfigError, UsageError
from src.utils.log_setup import configure_logging
from src.utils.weight_archive import read_archive, write_archive


class ArgumentParser(argparse.ArgumentParser):
    """argparse that raises UsageError instead of exiting"""

    def error(self, message: str):
        raise UsageError(message)


def _emit(lines: List[str]) -> None:
    for line in lines:
        print(line)


def _input_stream(args, settings: Settings) -> EventStream:
    if getattr(args, "input", None):
        sensor_size = (settings.grid.sensor_width, settings.grid.sensor_height)
        return read_stream(args.input, sensor_size=sensor_size)
    logger.info("No --input given; generating a class-0 synthetic stream")
    return generate_synthetic(settings.generator(0), settings.gen.seed)


def _models(args, settings: Settings):
    return load_models(settings, weights_path(args.weights), seed=args.seed)


def cmd_gen(args, settings: Settings) -> int:
    seed = settings.gen.seed if args.seed is None else args.seed
    stream = generate_synthetic(settings.generator(args.class_id), seed)
    write_stream(stream, stream.header, args.out)
    _emit([f"events={len(stream)}", f"duration={stream.header.duration}", f"out={args.out}"])
    return 0


def cmd_init_weights(args, settings: Settings) -> int:
    tensors = init_weights(settings, args.seed)
    write_archive(tensors, args.out)
    _emit([f"tensors={len(tensors)}", f"out={args.out}"])
    return 0


def cmd_embed(args, settings: Settings) -> int:
    stream = _input_stream(args, settings)
    embedder, _ = _models(args, settings)
    if settings.sample.mode == InputMode.CCIM:
        samples = iter_ccim(stream, settings.sample.ne)
    else:
        samples = iter_ctim(stream, settings.sample.delta_t)

    dump = {}
    for index, (window, events) in enumerate(samples):
        tokens = embedder.embed_sample(events)
        dump[f"sample{index}.patches"] = tokens.patches.astype(np.float32)
        dump[f"sample{index}.tokens"] = tokens.tokens
        print(f"sample={index} start={window.start_time} events={window.event_count} tokens={len(tokens)}")

    if args.out:
        write_archive(dump, args.out)
    return 0


def cmd_stream(args, settings: Settings) -> int:
    stream = _input_stream(args, settings)
    embedder, head = _models(args, settings)
    engine = AlertEngine(embedder, settings.alert)

    dump = {}
    for index, snapshot in enumerate(engine.run_stream(stream, settings.readout.schedule())):
        line = f"readout={index} step={snapshot.step} time={snapshot.readout_time} tokens={len(snapshot)}"
        if args.classify:
            prediction = classify(settings.head, head, snapshot)
            probs = ",".join(f"{p:.6f}" for p in prediction.probs)
            line += f" label={prediction.label} probs={probs} degenerate={prediction.degenerate}"
        print(line)
        dump[f"snapshot{index}.patches"] = snapshot.patches.astype(np.float32)
        dump[f"snapshot{index}.tokens"] = snapshot.tokens
        dump[f"snapshot{index}.step"] = np.array([snapshot.step], dtype=np.float32)

    if args.out:
        write_archive(dump, args.out)
    if args.dump_state:
        write_archive(engine.state.to_tensors(), args.dump_state)
    return 0


def cmd_classify(args, settings: Settings) -> int:
    archive = read_archive(args.snapshots)
    _, head = _models(args, settings)

    index = 0
    while f"snapshot{index}.tokens" in archive:
        tokens = archive[f"snapshot{index}.tokens"]
        step_tensor = archive.get(f"snapshot{index}.step")
        step = int(step_tensor[0]) if step_tensor is not None else None
        prediction = classify(settings.head, head, tokens, step=step)
        probs = ",".join(f"{p:.6f}" for p in prediction.probs)
        print(f"readout={index} step={step} label={prediction.label} probs={probs} degenerate={prediction.degenerate}")
        index += 1

    if index == 0:
        raise ConfigError(f"No snapshot tensors in {args.snapshots}", {"path": str(args.snapshots)})
    return 0


def cmd_verify(args, settings: Settings) -> int:
    stream = _input_stream(args, settings)
    embedder, _ = _models(args, settings)
    modes = [VerifyMode(m) for m in args.mode] if args.mode else list(VerifyMode)

    reports = verify_equivalence(
        embedder, settings, stream,
        trials=args.trials, modes=modes, decay_steps=args.decay_steps
    )
    for report in reports:
        _emit(report.to_lines())

    passed = all(r.passed for r in reports)
    print("PASS" if passed else "FAIL")
    return 0 if passed else 1


def cmd_flops(args, settings: Settings) -> int:
    stream = _input_stream(args, settings)
    ne = min(settings.sample.ne, len(stream))

    if args.sweep:
        frame = sweep(args.config, parse_sweep(args.sweep), stream, args.overrides, windows=args.windows)
        if args.csv:
            Path(args.csv).parent.mkdir(parents=True, exist_ok=True)
            frame.to_csv(args.csv, index=False)
            print(f"rows={len(frame)} out={args.csv}")
        else:
            print(frame.to_csv(index=False), end="")
        return 0

    stats = mean_stats(settings.embedder, stream, ne, args.windows, settings.sample.seed)
    report = count_flops(settings.embedder, settings.head, stats)
    _emit([f"events={stats.events}", f"active_events={stats.active_events}", f"active_patches={stats.active_patches}"])
    _emit(report.to_lines())
    return 0


def cmd_bench(args, settings: Settings) -> int:
    stream = _input_stream(args, settings)
    embedder, head = _models(args, settings)
    report = bench(embedder, settings.alert, settings.head, head, stream, settings.readout.schedule(), args.warmup)
    _emit(report.to_lines())
    return 0


def cmd_eval(args, settings: Settings) -> int:
    if args.predictions:
        if not Path(args.predictions).exists():
            raise ConfigError(f"Predictions file not found: {args.predictions}", {"path": str(args.predictions)})
        frame = pd.read_csv(args.predictions)
    else:
        embedder, head = _models(args, settings)
        files_per_class = args.files_per_class or settings.eval.files_per_class
        schedule = settings.readout.schedule()
        rows = []
        for file_id, class_id, stream in synthetic_files(settings, files_per_class):
            rows.extend(replay_predictions(embedder, head, settings, stream, schedule, file_id, class_id))
        frame = pd.DataFrame(rows)

    report = evaluate(frame, settings.eval.nva_n)
    _emit(report.to_lines())
    if args.csv:
        Path(args.csv).parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(args.csv, index=False)
    return 0


def build_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="Preset name or config file (default: $ALERT_CONFIG or 'default')")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    common.add_argument("--log-level", default=None)
    common.add_argument("--log-file", default=None)

    parser = ArgumentParser(prog="alert", description="Asynchronous event-camera token engine")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    def add(name, handler, help_text):
        sub = commands.add_parser(name, parents=[common], help=help_text)
        sub.set_defaults(handler=handler)
        return sub

    def model_args(sub):
        sub.add_argument("--weights", default=None, help="Weight archive (default: $ALERT_WEIGHTS, else random)")
        sub.add_argument("--seed", type=int, default=0, help="Seed for random weights")

    gen = add("gen", cmd_gen, "Write a synthetic event stream")
    gen.add_argument("--out", required=True)
    gen.add_argument("--class-id", type=int, default=0)
    gen.add_argument("--seed", type=int, default=None)

    init = add("init-weights", cmd_init_weights, "Write randomly initialized weights")
    init.add_argument("--out", required=True)
    init.add_argument("--seed", type=int, default=0)

    embed = add("embed", cmd_embed, "Batch (TE)LERT tokens per sample")
    embed.add_argument("--input", default=None)
    embed.add_argument("--out", default=None, help="Token dump archive")
    model_args(embed)

    stream = add("stream", cmd_stream, "Asynchronous replay with scheduled readouts")
    stream.add_argument("--input", default=None)
    stream.add_argument("--out", default=None, help="Snapshot dump archive")
    stream.add_argument("--dump-state", default=None, help="Final token state archive")
    stream.add_argument("--classify", action="store_true")
    model_args(stream)

    classify_cmd = add("classify", cmd_classify, "Classify dumped snapshots")
    classify_cmd.add_argument("--snapshots", required=True)
    model_args(classify_cmd)

    verify = add("verify", cmd_verify, "Batch/incremental, batching and decay oracles")
    verify.add_argument("--input", default=None)
    verify.add_argument("--mode", action="append", choices=[m.value for m in VerifyMode])
    verify.add_argument("--trials", type=int, default=None)
    verify.add_argument("--decay-steps", type=int, default=1000)
    model_args(verify)

    flops = add("flops", cmd_flops, "Analytic FLOP and parameter counts")
    flops.add_argument("--input", default=None)
    flops.add_argument("--sweep", action="append", default=[], metavar="KEY=V1,V2")
    flops.add_argument("--csv", default=None)
    flops.add_argument("--windows", type=int, default=8)

    bench_cmd = add("bench", cmd_bench, "Latency and time-to-accuracy")
    bench_cmd.add_argument("--input", default=None)
    bench_cmd.add_argument("--warmup", type=int, default=1000)
    model_args(bench_cmd)

    ev = add("eval", cmd_eval, "SA / FVA / NVA")
    ev.add_argument("--predictions", default=None, help="CSV with file_id,sample_index,label,pred")
    ev.add_argument("--files-per-class", type=int, default=None)
    ev.add_argument("--csv", default=None, help="Write per-sample predictions")
    model_args(ev)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one subcommand

    Returns:
        0 on success, 1 on failure, 2 on usage errors; failures print one
        error=<code> line to stderr
    """
    load_dotenv()
    try:
        args = build_parser().parse_args(argv)
        configure_logging(args.log_level, args.log_file)
        settings = load_settings(args.config, args.overrides)
        return args.handler(args, settings)
    except AlertError as e:
        print(e.to_line(), file=sys.stderr)
        return 2 if isinstance(e, UsageError) else 1
