"""CLI behaviour: subcommands, output files, and exit codes.

Runs ``main(argv)`` in process so no network or subprocess is involved,
plus one subprocess check of the installed entry point.
"""

import subprocess
import sys

import pytest

from dcakit.cli import main
from dcakit.config import parse_config_text
from dcakit.datasets import make_synthetic, render_csv
from dcakit.experiments import run_accuracy_experiment
from dcakit.results import parse_results, render_results

ACC_CFG = """
synth_classes = 2
synth_dims = 4
synth_rows = 120
synth_spread = 1.0
institutions = 2
rows_per_institution = 20
anchor_multiplier = 2
contribution_threshold = 0.9
methods = individual, dca_gep
distribution_seeds = 1
holdout_repetitions = 2
"""

TIM_CFG = """
synth_classes = 2
synth_dims = 4
synth_rows = 150
synth_spread = 1.0
institutions = 2, 3
rows_per_institution = 20
anchor_multiplier = 1
intermediate_dim = 3
methods = dca_gep
distribution_seeds = 1
"""


@pytest.fixture()
def acc_config(tmp_path):
    path = tmp_path / "acc.cfg"
    path.write_text(ACC_CFG)
    return path


class TestSynth:
    def test_writes_expected_csv(self, tmp_path, capsys):
        out = tmp_path / "data.csv"
        code = main(["synth", "--classes", "3", "--dims", "4", "--rows", "30",
                     "--spread", "1.5", "--seed", "7", "--out", str(out)])
        assert code == 0
        feats, labels, names = make_synthetic(3, 4, 30, 1.5, 7)
        assert out.read_text(encoding="utf-8") == render_csv(feats, labels, names)
        assert "30 rows" in capsys.readouterr().out

    def test_degenerate_params_exit_2(self, tmp_path, capsys):
        out = tmp_path / "data.csv"
        code = main(["synth", "--classes", "5", "--dims", "4", "--rows", "3",
                     "--spread", "1.0", "--out", str(out)])
        assert code == 2
        assert "error (data)" in capsys.readouterr().err
        assert not out.exists()


class TestAccuracy:
    def test_happy_path_matches_library(self, acc_config, tmp_path, capsys):
        out = tmp_path / "results.csv"
        code = main(["accuracy", "--config", str(acc_config),
                     "--out", str(out)])
        assert code == 0
        local = run_accuracy_experiment(parse_config_text(ACC_CFG))
        assert out.read_text(encoding="utf-8") == render_results(local, "csv")
        stdout = capsys.readouterr().out
        assert "4 records (0 failed)" in stdout
        assert "method=individual" in stdout

    def test_jsonl_format(self, acc_config, tmp_path):
        out = tmp_path / "results.jsonl"
        code = main(["accuracy", "--config", str(acc_config),
                     "--out", str(out), "--format", "jsonl"])
        assert code == 0
        parsed = parse_results(out.read_text(encoding="utf-8"), "jsonl")
        assert parsed.mode == "accuracy"
        assert len(parsed.records) == 4

    def test_reruns_byte_identical(self, acc_config, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        assert main(["accuracy", "--config", str(acc_config), "--out", str(a)]) == 0
        assert main(["accuracy", "--config", str(acc_config), "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_threads_do_not_change_bytes(self, acc_config, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        assert main(["accuracy", "--config", str(acc_config), "--out", str(a),
                     "--threads", "1"]) == 0
        assert main(["accuracy", "--config", str(acc_config), "--out", str(b),
                     "--threads", "4"]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_seed_override_changes_bytes(self, acc_config, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        assert main(["accuracy", "--config", str(acc_config), "--out", str(a)]) == 0
        assert main(["accuracy", "--config", str(acc_config), "--out", str(b),
                     "--seed", "5"]) == 0
        assert a.read_bytes() != b.read_bytes()

    def test_missing_config_exit_1(self, tmp_path, capsys):
        code = main(["accuracy", "--config", str(tmp_path / "nope.cfg"),
                     "--out", str(tmp_path / "o.csv")])
        assert code == 1
        assert "error (config)" in capsys.readouterr().err

    def test_invalid_config_exit_1(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("bogus = 1\n")
        code = main(["accuracy", "--config", str(cfg),
                     "--out", str(tmp_path / "o.csv")])
        assert code == 1
        assert "error (config)" in capsys.readouterr().err

    def test_missing_dataset_exit_2(self, tmp_path, capsys):
        cfg = tmp_path / "ds.cfg"
        cfg.write_text(
            "dataset = /nonexistent/file.csv\n"
            "label_column = label\n"
            "institutions = 2\n"
            "rows_per_institution = 10\n"
            "anchor_multiplier = 2\n"
            "intermediate_dim = 2\n"
            "methods = dca_gep\n"
            "distribution_seeds = 1\n"
        )
        code = main(["accuracy", "--config", str(cfg),
                     "--out", str(tmp_path / "o.csv")])
        assert code == 2
        assert "error (data)" in capsys.readouterr().err

    def test_all_failed_exit_3(self, tmp_path, capsys):
        cfg = tmp_path / "fail.cfg"
        cfg.write_text(ACC_CFG
                       .replace("contribution_threshold = 0.9",
                                "intermediate_dim = 50")
                       .replace("methods = individual, dca_gep",
                                "methods = dca_gep"))
        out = tmp_path / "o.csv"
        code = main(["accuracy", "--config", str(cfg), "--out", str(out)])
        assert code == 3
        assert "error (solver)" in capsys.readouterr().err
        assert not out.exists()


class TestTiming:
    def test_happy_path(self, tmp_path, capsys):
        cfg = tmp_path / "tim.cfg"
        cfg.write_text(TIM_CFG)
        out = tmp_path / "timing.csv"
        code = main(["timing", "--config", str(cfg), "--out", str(out)])
        assert code == 0
        parsed = parse_results(out.read_text(encoding="utf-8"), "csv")
        assert parsed.mode == "timing"
        assert len(parsed.records) == 2
        assert "2 records (0 failed)" in capsys.readouterr().out

    def test_baseline_method_exit_1(self, acc_config, tmp_path, capsys):
        code = main(["timing", "--config", str(acc_config),
                     "--out", str(tmp_path / "o.csv")])
        assert code == 1
        assert "error (config)" in capsys.readouterr().err


class TestEntryPoint:
    def test_installed_script_runs(self, tmp_path):
        out = tmp_path / "data.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "dcakit.cli", "synth", "--classes", "2",
             "--dims", "3", "--rows", "10", "--spread", "1.0",
             "--out", str(out)],
            capture_output=True, text=True, timeout=120,
        )
        assert proc.returncode == 0, proc.stderr
        assert out.exists()

    def test_bad_server_url_is_transport_error(self, acc_config, tmp_path,
                                               capsys):
        code = main(["accuracy", "--config", str(acc_config),
                     "--out", str(tmp_path / "o.csv"),
                     "--server", "http://127.0.0.1:1"])
        assert code == 1
        assert "error (transport)" in capsys.readouterr().err
