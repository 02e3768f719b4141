"""Command line behavior: exit codes, config merging, artifact wiring."""

import json
from pathlib import Path

import pytest

from ocboost.cli import EXIT_DATA, EXIT_NUMERIC, EXIT_USAGE, main
from ocboost.errors import NumericOverflowError

SMALL = [
    "--seeds", "0", "--segments", "2", "--rows-per-segment", "40",
    "--n-hypotheses", "3", "--warm-start", "15", "--orders", "0,1",
    "--smoothing", "0.05",
]


def run_small_synth(out):
    return main(["synth", "--out", str(out)] + SMALL)


# -- exit codes ------------------------------------------------------------------

def test_no_arguments_is_usage_error(capsys):
    assert main([]) == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_unknown_flag_is_usage_error(capsys):
    assert main(["synth", "--bogus"]) == EXIT_USAGE


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "synth" in capsys.readouterr().out


def test_config_error_exits_one(tmp_path, capsys):
    code = main([
        "synth", "--out", str(tmp_path), "--seeds", "0", "--segments", "2",
        "--rows-per-segment", "40", "--warm-start", "9999",
    ])
    assert code == EXIT_USAGE
    assert "ocboost:" in capsys.readouterr().err


def test_bad_data_file_exits_two(tmp_path, capsys):
    garbage = tmp_path / "garbage"
    garbage.write_bytes(b"\x00\x01\x02\x03" * 8)
    code = main([
        "mnist", "--out", str(tmp_path / "out"),
        "--train-images", str(garbage), "--train-labels", str(garbage),
        "--test-images", str(garbage), "--test-labels", str(garbage),
    ])
    assert code == EXIT_DATA
    assert "ocboost:" in capsys.readouterr().err


def test_numeric_failure_exits_three(tmp_path, monkeypatch, capsys):
    def explode(cfg, halt_after=None, resume_from=None):
        raise NumericOverflowError("weight cell overflow", coordinate=1, example_index=7)

    monkeypatch.setattr("ocboost.cli.run_synthetic", explode)
    code = main(["synth", "--out", str(tmp_path)] + SMALL)
    assert code == EXIT_NUMERIC
    assert "overflow" in capsys.readouterr().err


def test_unwritable_output_exits_two(tmp_path, capsys):
    assert run_small_synth(tmp_path / "run") == 0
    capsys.readouterr()
    code = main([
        "plot", str(tmp_path / "run" / "synthetic.csv"),
        "--out-file", str(tmp_path / "no" / "such" / "dir" / "x.svg"),
    ])
    assert code == EXIT_DATA


# -- synth wiring -----------------------------------------------------------------

def test_synth_writes_artifacts_and_reruns_identically(tmp_path, capsys):
    assert run_small_synth(tmp_path / "a") == 0
    printed = capsys.readouterr().out
    assert "csv:" in printed
    assert run_small_synth(tmp_path / "b") == 0
    a = (tmp_path / "a" / "synthetic.csv").read_bytes()
    b = (tmp_path / "b" / "synthetic.csv").read_bytes()
    assert a == b


def test_synth_halt_then_resume_matches_full_run(tmp_path):
    assert run_small_synth(tmp_path / "full") == 0
    part = tmp_path / "part"
    assert main(["synth", "--out", str(part), "--halt-after", "50"] + SMALL) == 0
    assert (part / "checkpoints").is_dir()
    assert main(["synth", "--out", str(part), "--resume", str(part)] + SMALL) == 0
    full_bytes = (tmp_path / "full" / "synthetic.csv").read_bytes()
    assert (part / "synthetic.csv").read_bytes() == full_bytes


def test_halt_and_resume_flags_conflict(tmp_path, capsys):
    code = main(
        ["synth", "--out", str(tmp_path), "--halt-after", "50",
         "--resume", str(tmp_path)] + SMALL
    )
    assert code == EXIT_USAGE
    assert "cannot be combined" in capsys.readouterr().err


def test_out_dir_falls_back_to_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("OCBOOST_OUT", str(tmp_path / "from-env"))
    assert main(["synth"] + SMALL) == 0
    assert (tmp_path / "from-env" / "synthetic.csv").is_file()


def test_config_file_merges_below_flags(tmp_path):
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps({
        "seeds": [0], "segments": 2, "rows_per_segment": 30,
        "n_hypotheses": 3, "warm_start": 10, "orders": [0], "smoothing": 0.05,
    }))
    out = tmp_path / "out"
    code = main([
        "synth", "--out", str(out), "--config", str(cfg_file),
        "--rows-per-segment", "40",
    ])
    assert code == 0
    saved = json.loads((out / "config.json").read_text())
    assert saved["rows_per_segment"] == 40  # flag beats file
    assert saved["segments"] == 2           # file beats default
    assert saved["orders"] == [0]
    assert main(["synth", "--out", str(out), "--config", "missing.json"]) == EXIT_USAGE


# -- other subcommands ---------------------------------------------------------------

def test_oracle_compare_command(tmp_path):
    out = tmp_path / "cmp"
    assert main(["oracle-compare", "--out", str(out)] + SMALL) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert set(summary["mean_approx_error"]) == {"as_written", "theorem_consistent"}


def test_mnist_requires_some_data_source(tmp_path, monkeypatch, capsys):
    monkeypatch.delenv("OCBOOST_MNIST_DIR", raising=False)
    assert main(["mnist", "--out", str(tmp_path)]) == EXIT_USAGE
    assert "no digit data" in capsys.readouterr().err


def test_mnist_surrogate_run(tmp_path):
    out = tmp_path / "mn"
    code = main([
        "mnist", "--out", str(out), "--surrogate",
        "--stream-size", "200", "--mnist-warm-start", "60",
        "--eval-every", "100", "--preselect-size", "120",
        "--sample-size", "25", "--per-digit-hypotheses", "2", "--order", "1",
    ])
    assert code == 0
    assert (out / "mnist.csv").is_file()
    assert (out / "surrogate-data" / "train-images-idx3-ubyte").is_file()
    header = (out / "mnist.csv").read_text().splitlines()[0]
    assert header == "examples_seen,learner,digit,test_error,approx_error,ova_error"


def test_mnist_data_dir_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("OCBOOST_MNIST_DIR", str(tmp_path / "nowhere"))
    code = main(["mnist", "--out", str(tmp_path / "out")])
    # files resolved from the env dir do not exist, so validation rejects them
    assert code == EXIT_USAGE
    assert "not a readable file" in capsys.readouterr().err


def test_plot_renders_svg(tmp_path):
    assert run_small_synth(tmp_path / "run") == 0
    csv_path = tmp_path / "run" / "synthetic.csv"
    assert main(["plot", str(csv_path)]) == 0
    svg = csv_path.with_suffix(".svg")
    assert svg.is_file()
    text = svg.read_text()
    assert text.startswith("<svg") and text.rstrip().endswith("</svg>")
    again = tmp_path / "again.svg"
    assert main(["plot", str(csv_path), "--out-file", str(again), "--title", "t"]) == 0
    assert main(["plot", str(tmp_path / "missing.csv")]) == EXIT_USAGE
