"""Configuration loading, FLOP accounting, voting evaluation, oracles, bench and the CLI"""

import numpy as np
import pandas as pd
import pytest

from src.alert.models import ReadoutSchedule, ScheduleMode
from src.embedder.models import EmbedderConfig, MlpConfig, TimeEncodingConfig
from src.events.stream_io import read_stream
from src.harness.bench import bench
from src.harness.cli import main
from src.harness.config import load_settings, parse_override, resolve_config_path, weights_path
from src.harness.evaluation import evaluate, majority_vote, window_votes
from src.harness.flops import SampleStats, count_flops, count_flops_layer, head_flops, mean_stats, parse_sweep, sweep
from src.harness.pipeline import init_weights, load_models, replay_predictions, synthetic_files
from src.harness.verify import VerifyMode, verify_equivalence
from src.head.models import HeadConfig
from src.utils.errors import ConfigError, PreconditionError, UsageError
from src.utils.log_setup import configure_logging
from src.utils.weight_archive import read_archive, write_archive


class TestConfig:

    @pytest.mark.parametrize("preset", ["default", "lmm", "rm", "ncars"])
    def test_presets_load(self, preset):
        settings = load_settings(preset)
        assert settings.head.token_width == settings.mlp.out_channels

    def test_preset_values(self):
        rm = load_settings("rm")
        assert rm.embedder.mlp.layer_widths(rm.embedder.input_dim) == [5, 80, 160, 320, 640, 512]
        assert (rm.head.layers, rm.head.heads, rm.alert.k) == (4, 8, 64)
        ncars = load_settings("ncars")
        assert (ncars.grid.grid_w, ncars.grid.grid_h) == (12, 10)
        assert ncars.sample.delta_t == 100_000

    def test_overrides_and_alias(self):
        settings = load_settings("default", ["alert.lambda=0.2", "grid.patch_w=4"])
        assert settings.alert.lambda_ == 0.2
        assert settings.grid.grid_w == 32

    def test_unknown_key(self):
        with pytest.raises(UsageError):
            load_settings("default", ["grid.bogus=1"])
        with pytest.raises(UsageError):
            load_settings("default", ["nosection.patch_w=1"])

    def test_bad_value(self):
        with pytest.raises(ConfigError) as excinfo:
            load_settings("default", ["grid.patch_w=abc"])
        assert excinfo.value.details["key"] == "grid.patch_w"
        with pytest.raises(ConfigError):
            load_settings("default", ["grid.patch_w=0"])

    def test_width_mismatch(self):
        with pytest.raises(ConfigError):
            load_settings("default", ["head.token_width=64"])

    def test_malformed_override(self):
        with pytest.raises(UsageError):
            parse_override("grid.patch_w")

    def test_missing_config(self, tmp_path):
        with pytest.raises(ConfigError) as excinfo:
            resolve_config_path(tmp_path / "absent.env")
        assert "absent.env" in excinfo.value.details["path"]

    def test_environment_defaults(self, monkeypatch, small_config_file):
        monkeypatch.setenv("ALERT_CONFIG", str(small_config_file))
        monkeypatch.setenv("ALERT_WEIGHTS", "w.alrt")
        assert load_settings().head.num_classes == 3
        assert weights_path().name == "w.alrt"
        assert weights_path("other.alrt").name == "other.alrt"

    def test_generator_class_bound(self, small_settings):
        assert small_settings.generator(2).class_id == 2
        with pytest.raises(ConfigError) as excinfo:
            small_settings.generator(5)
        assert excinfo.value.details == {"class_id": 5, "num_classes": 3}

    def test_flat_keys(self):
        flat = load_settings("default").flat()
        assert flat["alert.lambda"] == 0.0
        assert flat["grid.patch_w"] == 8


class TestFlops:

    def test_single_layer(self):
        assert count_flops_layer(4, 8, relu=True) == 96
        cfg = EmbedderConfig(
            te=TimeEncodingConfig(enabled=False),
            mlp=MlpConfig(depth=1, base_channels=8, out_channels=8, final_relu=True)
        )
        report = count_flops(cfg, HeadConfig(token_width=8, heads=2), SampleStats(events=1, active_events=1, active_patches=1))
        assert report.breakdown["fg.layer0"] == 96

    def test_lmm_band(self):
        settings = load_settings("lmm")
        report = count_flops(settings.embedder, settings.head, SampleStats(events=8192, active_events=8192, active_patches=200))
        assert report.flops_per_event == 3764
        assert abs(report.flops_per_event - 4_000) <= 0.25 * 4_000

    def test_rm_band(self):
        settings = load_settings("rm")
        report = count_flops(settings.embedder, settings.head, SampleStats(events=8192, active_events=8192, active_patches=200))
        assert report.flops_per_event == 1_200_620
        assert abs(report.flops_per_event - 1_218_000) <= 0.25 * 1_218_000

    def test_linear_in_active_events(self):
        settings = load_settings("lmm")
        costs = [
            count_flops(settings.embedder, settings.head, SampleStats(events=n, active_events=n, active_patches=10)).flops_per_sample
            for n in (1000, 2000, 3000)
        ]
        assert costs[1] - costs[0] == costs[2] - costs[1] == 1000 * 3764

    def test_empty_readout_has_no_head_cost(self):
        assert sum(head_flops(HeadConfig(), 0).values()) == 0
        assert head_flops(HeadConfig(), 3)["head.encoder"] < head_flops(HeadConfig(), 30)["head.encoder"]

    def test_params(self):
        settings = load_settings("lmm")
        report = count_flops(settings.embedder, settings.head, SampleStats(events=0, active_events=0, active_patches=0))
        tensors = init_weights(settings)
        assert report.params_total == report.params_embedder + report.params_head
        assert report.params_embedder == sum(v.size for k, v in tensors.items() if not k.startswith("head."))
        assert report.params_head == sum(v.size for k, v in tensors.items() if k.startswith("head."))

    def test_mean_stats_bounds(self, small_settings, small_stream):
        stats = mean_stats(small_settings.embedder, small_stream, 512, 4, seed=0)
        assert stats.events == 512
        assert stats.active_patches <= small_settings.grid.num_patches

    def test_sweep(self, small_stream):
        knobs = parse_sweep(["grid.patch_w=4,8", "grid.activation_threshold=0,20"])
        frame = sweep("default", knobs, small_stream, ["sample.ne=256"], windows=2)
        assert len(frame) == 4
        assert {"grid.patch_w", "flops_per_event", "active_patches"} <= set(frame.columns)
        for patch_w, group in frame.groupby("grid.patch_w"):
            low = group[group["grid.activation_threshold"] == "0"]["active_patches"].iloc[0]
            high = group[group["grid.activation_threshold"] == "20"]["active_patches"].iloc[0]
            assert high <= low


class TestEvaluation:

    def test_sample_and_file_accuracy(self):
        frame = pd.DataFrame({"file_id": ["f"] * 3, "sample_index": [0, 1, 2], "label": [0, 0, 0], "pred": [0, 0, 1]})
        report = evaluate(frame)
        assert report.sa == pytest.approx(2 / 3)
        assert report.fva == 1.0
        assert report.nva is None

    def test_majority_ties_go_to_latest(self):
        assert majority_vote([0, 1]) == 1
        assert majority_vote([1, 0, 0, 1]) == 1
        assert majority_vote([2, 2, 1]) == 2
        with pytest.raises(PreconditionError):
            majority_vote([])

    def test_window_votes(self):
        assert list(window_votes([0, 0, 1, 1, 1], 3)) == [0, 1, 1]
        assert list(window_votes([0, 1], 5)) == [1]

    def test_nva(self):
        frame = pd.DataFrame({"file_id": ["a"] * 5, "sample_index": range(5), "label": [1] * 5, "pred": [0, 0, 1, 1, 1]})
        assert evaluate(frame, nva_n=3).nva == pytest.approx(2 / 3)

    def test_random_predictions(self):
        rng = np.random.default_rng(0)
        frame = pd.DataFrame({
            "file_id": rng.integers(0, 50, 1000),
            "sample_index": np.arange(1000),
            "label": np.zeros(1000, dtype=int),
            "pred": rng.integers(0, 11, 1000)
        })
        frame["label"] = frame["file_id"] % 11
        report = evaluate(frame, nva_n=5)
        assert report.samples == 1000 and report.files == 50
        assert abs(report.sa - 1 / 11) <= 0.05
        assert 0.0 <= report.fva <= 1.0 and 0.0 <= report.nva <= 1.0

    def test_bad_frames(self):
        with pytest.raises(PreconditionError):
            evaluate(pd.DataFrame(columns=["file_id", "sample_index", "label", "pred"]))
        with pytest.raises(PreconditionError):
            evaluate(pd.DataFrame({"file_id": [1], "pred": [0]}))


class TestVerify:

    def test_all_oracles_pass(self, small_settings, small_stream, embedder):
        reports = verify_equivalence(embedder, small_settings, small_stream, trials=4, decay_steps=800)
        assert [r.mode for r in reports] == list(VerifyMode)
        for report in reports:
            assert report.passed, report.to_lines()
            assert report.to_lines()[0].startswith("PASS")


class TestPipeline:

    def test_weights_round_trip(self, tmp_path, small_settings, small_stream):
        path = tmp_path / "w.alrt"
        write_archive(init_weights(small_settings, seed=5), path)
        loaded, head = load_models(small_settings, path)
        random, _ = load_models(small_settings, None, seed=5)
        events = small_stream.events[:200]
        assert np.array_equal(loaded.embed_sample(events).tokens, random.embed_sample(events).tokens)
        assert head.classifier_weight.shape == (3, 16)

    def test_missing_weights(self, tmp_path, small_settings):
        with pytest.raises(ConfigError):
            load_models(small_settings, tmp_path / "none.alrt")

    def test_synthetic_files(self, small_settings):
        files = list(synthetic_files(small_settings, 2))
        assert [(f, c) for f, c, _ in files] == [
            ("class0_file0", 0), ("class0_file1", 0), ("class1_file0", 1),
            ("class1_file1", 1), ("class2_file0", 2), ("class2_file1", 2)
        ]

    def test_one_prediction_per_readout(self, small_settings, small_stream, small_models):
        embedder, head = small_models
        schedule = small_settings.readout.schedule()
        rows = replay_predictions(embedder, head, small_settings, small_stream, schedule, "f", 0)
        assert len(rows) == len(schedule.cut_points(small_stream.t))
        assert [r["sample_index"] for r in rows] == list(range(len(rows)))
        assert rows[-1]["step"] == len(small_stream)

    def test_count_schedule_replay(self, small_settings, small_models):
        embedder, head = small_models
        schedule = ReadoutSchedule(mode=ScheduleMode.COUNT, every=100)
        rows = []
        for file_id, class_id, stream in synthetic_files(small_settings, 1):
            rows.extend(replay_predictions(embedder, head, small_settings, stream, schedule, file_id, class_id))
        frame = pd.DataFrame(rows)
        assert sorted(frame["label"].unique()) == [0, 1, 2]
        assert frame.groupby("file_id")["step"].diff().dropna().le(100).all()
        report = evaluate(frame, nva_n=5)
        assert report.files == 3 and report.samples == len(rows)

    @pytest.mark.slow
    def test_two_class_smoke(self, small_settings):
        settings = small_settings.model_copy(update={
            'head': small_settings.head.model_copy(update={'num_classes': 2}),
            'gen': small_settings.gen.model_copy(update={'rate_hz': 62_000, 'duration_us': 1_000_000})
        })
        embedder, head = load_models(settings, None, seed=11)
        schedule = ReadoutSchedule(mode=ScheduleMode.COUNT, every=100)
        rows = []
        for file_id, class_id, stream in synthetic_files(settings, 2):
            replayed = replay_predictions(embedder, head, settings, stream, schedule, file_id, class_id)
            assert len(replayed) == len(schedule.cut_points(stream.t))
            rows.extend(replayed)
        assert len(rows) >= 2000
        report = evaluate(pd.DataFrame(rows), nva_n=5)
        assert report.samples == len(rows) and report.files == 4
        assert abs(report.sa - 0.5) <= 0.05


def test_bench_report(small_settings, small_stream, small_models):
    embedder, head = small_models
    report = bench(embedder, small_settings.alert, small_settings.head, head, small_stream, small_settings.readout.schedule(), warmup=100)
    assert report.events == len(small_stream)
    assert report.readouts == len(small_settings.readout.schedule().cut_points(small_stream.t))
    assert report.t_in_ms_mean == pytest.approx(20.0)
    assert report.tta_ms == pytest.approx(report.t_in_ms_mean + report.t_p_ms_mean)


def test_file_log_sink(tmp_path):
    from loguru import logger

    log_file = tmp_path / "alert.log"
    configure_logging("INFO", log_file)
    logger.info("sink check")
    assert "sink check" in log_file.read_text()
    configure_logging("WARNING")


class TestCli:

    def test_flops_lmm(self, capsys):
        assert main(["flops", "--config", "lmm", "--set", "gen.duration_us=200000", "--windows", "2"]) == 0
        out = capsys.readouterr().out
        assert "flops_per_event=3764" in out
        assert "params_total=" in out

    def test_usage_errors(self, capsys):
        assert main(["bogus"]) == 2
        assert main(["flops", "--set", "grid.nope=1"]) == 2
        assert "error=UsageError" in capsys.readouterr().err

    def test_class_id_out_of_range(self, capsys, tmp_path, small_config_file):
        code = main(["gen", "--config", str(small_config_file), "--out", str(tmp_path / "s.evt"), "--class-id", "5"])
        assert code == 1
        assert "error=ConfigError" in capsys.readouterr().err
        assert not (tmp_path / "s.evt").exists()

    def test_missing_predictions(self, capsys, tmp_path):
        assert main(["eval", "--predictions", str(tmp_path / "nope.csv")]) == 1
        err = capsys.readouterr().err
        assert "error=ConfigError" in err
        assert "nope.csv" in err

    def test_zero_width_stream(self, capsys, tmp_path, small_config_file):
        events = tmp_path / "s.evt"
        assert main(["gen", "--config", str(small_config_file), "--out", str(events)]) == 0
        data = bytearray(events.read_bytes())
        data[8:10] = b"\x00\x00"
        events.write_bytes(bytes(data))
        capsys.readouterr()

        assert main(["flops", "--config", str(small_config_file), "--input", str(events)]) == 1
        assert "error=FormatError" in capsys.readouterr().err

    def test_plain_csv_input(self, capsys, tmp_path, small_config_file):
        rows = [f"{10 * i},{i % 32},{(7 * i) % 32},{1 if i % 3 else -1}" for i in range(600)]
        path = tmp_path / "plain.csv"
        path.write_text("t,x,y,p\n" + "\n".join(rows) + "\n")

        assert main(["flops", "--config", str(small_config_file), "--input", str(path), "--windows", "2"]) == 0
        out = capsys.readouterr().out
        assert "events=512" in out
        assert "flops_per_event=" in out

    def test_missing_weights(self, capsys, tmp_path):
        code = main(["stream", "--set", "gen.duration_us=50000", "--weights", str(tmp_path / "missing.alrt")])
        assert code == 1
        assert "error=ConfigError" in capsys.readouterr().err

    def test_stream_classify_round_trip(self, capsys, tmp_path, small_config_file):
        common = ["--config", str(small_config_file)]
        events, weights, snaps = tmp_path / "s.evt", tmp_path / "w.alrt", tmp_path / "snaps.alrt"
        assert main(["gen", *common, "--out", str(events), "--class-id", "1"]) == 0
        assert main(["init-weights", *common, "--out", str(weights), "--seed", "2"]) == 0
        assert main(["stream", *common, "--input", str(events), "--weights", str(weights), "--out", str(snaps), "--classify"]) == 0
        readouts = len(load_settings(str(small_config_file)).readout.schedule().cut_points(read_stream(events).t))
        streamed = [line for line in capsys.readouterr().out.splitlines() if line.startswith("readout=")]
        assert len(streamed) == readouts
        assert all("probs=" in line for line in streamed)

        assert main(["classify", *common, "--snapshots", str(snaps), "--weights", str(weights)]) == 0
        classified = capsys.readouterr().out.splitlines()
        assert len(classified) == readouts
        assert [line.split()[2] for line in classified] == [line.split()[4] for line in streamed]
        assert f"snapshot{readouts - 1}.step" in read_archive(snaps)

    def test_eval_synthetic(self, capsys, small_config_file):
        assert main(["eval", "--config", str(small_config_file), "--files-per-class", "1"]) == 0
        out = capsys.readouterr().out
        assert "files=3" in out
        assert "nva_n=5" in out

    def test_verify_command(self, capsys, small_config_file):
        assert main(["verify", "--config", str(small_config_file), "--mode", "strict", "--mode", "batching", "--trials", "3"]) == 0
        assert capsys.readouterr().out.splitlines()[-1] == "PASS"

    def test_eval_from_predictions(self, capsys, tmp_path):
        path = tmp_path / "preds.csv"
        pd.DataFrame({"file_id": ["a", "a", "b"], "sample_index": [0, 1, 0], "label": [0, 0, 1], "pred": [1, 0, 1]}).to_csv(path, index=False)
        assert main(["eval", "--predictions", str(path)]) == 0
        out = capsys.readouterr().out
        assert "sa=0.6666666666666666" in out
        assert "fva=1.0" in out
