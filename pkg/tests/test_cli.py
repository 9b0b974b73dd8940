"""
Tests for the fraisse command line

Tests cover:
- Every subcommand's output and exit code
- Input errors (exit 1) and sampler amalgamation failures (exit 2)
"""

import json
import logging
from unittest.mock import MagicMock

import pytest

from fraisse import main as cli
from fraisse.constants import EXIT_AMALGAMATION_FAILURE, EXIT_CONFIG_ERROR, EXIT_OK
from fraisse.errors import AmalgamationFailure
from fraisse.structures import literal

pytestmark = pytest.mark.cli


@pytest.fixture(autouse=True)
def cli_settings(mocker, mock_settings):
    """Keep the CLI away from the user's stored settings"""
    settings = mock_settings
    for key, value in {"enumeration_guard": 24, "isomorphism_guard": 8, "certify_max_level": 4, "threads": 1}.items():
        settings.set(key, value)
    mocker.patch("fraisse.main.Settings", return_value=settings)
    return settings


@pytest.fixture
def experiment_file(tmp_path):
    path = tmp_path / "experiment.json"
    path.write_text(
        json.dumps(
            {
                "name": "cli-graphs",
                "class": "graphs",
                "sizes": [4, 6],
                "battery": {"sentences": ["(forall (x V) (not (E x x)))"]},
                "trials": 8,
                "seed": 2,
            }
        )
    )
    return str(path)


def test_parse_sizes():
    assert cli.parse_sizes("5") == 5
    assert cli.parse_sizes("2,40") == [2, 40]
    with pytest.raises(ValueError, match="Invalid size"):
        cli.parse_sizes("five")


def test_catalog(capsys):
    assert cli.run(["catalog"]) == EXIT_OK
    out = capsys.readouterr().out
    for name in ("graphs", "triangle-free", "two-graph", "feq-bounded-labeled", "cpz"):
        assert name in out
    assert "certified" in out


def test_catalog_export(capsys, tmp_path):
    target = tmp_path / "specs"
    assert cli.run(["catalog", "--export", str(target)]) == EXIT_OK
    printed = capsys.readouterr().out.split()
    assert str(target / "graphs.json") in printed
    assert (target / "triangle-free.json").exists()


def test_enumerate(capsys):
    assert cli.run(["enumerate", "--class", "triangle-free", "--size", "4", "--iso"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "triangle-free: 41 labeled members on 4" in out
    assert "7 isomorphism types" in out


def test_enumerate_emits_literals(capsys):
    assert cli.run(["enumerate", "--class", "graphs", "--size", "2", "--emit"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("# member") == 2
    assert "sort V 2" in out


def test_enumerate_multi_sorted(capsys):
    assert cli.run(["enumerate", "--class", "feq-bounded-labeled:n=2", "--size", "1,2"]) == EXIT_OK
    assert "4 labeled members" in capsys.readouterr().out


def test_enumerate_bad_input():
    assert cli.run(["enumerate", "--class", "no-such-class", "--size", "3"]) == EXIT_CONFIG_ERROR
    assert cli.run(["enumerate", "--class", "graphs", "--size", "x"]) == EXIT_CONFIG_ERROR


def test_check(capsys):
    assert cli.run(["check", "--class", "triangle-free", "--level", "3"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["holds"] is False
    assert report["level"] == 3
    assert report["witness"]["sorts"] == ["V", "V", "V"]


def test_check_all_levels_and_hereditary(capsys):
    assert cli.run(["check", "--class", "graphs", "--all-up-to", "3", "--hereditary", "3"]) == EXIT_OK
    lines = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    assert [line.get("level") for line in lines[:2]] == [2, 3]
    assert all(line["holds"] for line in lines[:2])
    assert lines[2] == {"hereditary": True, "up_to": 3}


def test_sample_summary(capsys):
    argv = ["sample", "--class", "graphs", "--size", "5", "--trials", "3", "--emit", "none", "--seed", "4"]
    assert cli.run(argv) == EXIT_OK
    out = capsys.readouterr().out
    assert "graphs: 3 samples of size 5, mean facts E=" in out


def test_sample_literals_are_reproducible(capsys):
    argv = ["sample", "--class", "triangle-free", "--size", "6", "--trials", "2", "--seed", "9", "--verify"]
    assert cli.run(argv) == EXIT_OK
    first = capsys.readouterr().out
    assert cli.run(argv) == EXIT_OK
    assert capsys.readouterr().out == first
    assert first.count("# trial") == 2
    body = first.split("# trial 1\n")[1]
    assert literal.loads(body, cli.resolve_class("triangle-free").signature).size == 6


def test_sample_uniform_mode(capsys):
    argv = ["sample", "--class", "equivalence", "--size", "4", "--mode", "uniform-partitions", "--emit", "none"]
    assert cli.run(argv) == EXIT_OK
    assert "equivalence: 1 samples" in capsys.readouterr().out


def test_sample_config_errors():
    assert cli.run(["sample", "--class", "graphs", "--size", "4", "--mode", "bounded"]) == EXIT_CONFIG_ERROR
    argv = ["sample", "--class", "triangle-free", "--size", "4", "--mode", "bounded", "--bound", "3"]
    assert cli.run(argv) == EXIT_CONFIG_ERROR


def test_sample_amalgamation_failure(mocker, capsys):
    witness = MagicMock()
    witness.to_dict.return_value = {"sorts": ["V", "V", "V"], "family": {}}
    sampler = mocker.patch("fraisse.main.LevelSampler")
    sampler.return_value.sample.side_effect = AmalgamationFailure(3, witness, "no completion")
    argv = ["sample", "--class", "triangle-free", "--size", "4"]
    assert cli.run(argv) == EXIT_AMALGAMATION_FAILURE
    err = capsys.readouterr().err.strip().splitlines()
    assert json.loads(err[-1]) == {"family": {}, "sorts": ["V", "V", "V"]}


def test_eval(capsys, tmp_path, path3):
    path = tmp_path / "path.txt"
    path.write_text(literal.dumps(path3, with_signature=True))
    argv = ["eval", "--structure", str(path), "--sentence", "(exists ((x V) (y V)) (E x y))"]
    assert cli.run(argv) == EXIT_OK
    assert capsys.readouterr().out.strip() == "true"


def test_eval_with_class_signature(capsys, tmp_path, path3):
    path = tmp_path / "path.txt"
    path.write_text(literal.dumps(path3))
    triangle = "(exists ((x V) (y V) (z V)) (and (E x y) (E y z) (E x z)))"
    assert cli.run(["eval", "--structure", str(path), "--class", "graphs", "--sentence", triangle]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "false"


def test_eval_errors(tmp_path, path3):
    path = tmp_path / "path.txt"
    path.write_text(literal.dumps(path3, with_signature=True))
    assert cli.run(["eval", "--structure", str(path), "--sentence", "(E x y)"]) == EXIT_CONFIG_ERROR
    missing = str(tmp_path / "missing.txt")
    assert cli.run(["eval", "--structure", missing, "--sentence", "(exists (x V) (E x x))"]) == EXIT_CONFIG_ERROR


def test_experiment_to_stdout(capsys, experiment_file):
    assert cli.run(["experiment", "--config", experiment_file, "--format", "table"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.splitlines()[0].split()[0] == "size_index"
    assert "(battery)" in out


def test_experiment_to_file(experiment_file, tmp_path, cli_settings):
    out = tmp_path / "result.csv"
    argv = ["experiment", "--config", experiment_file, "--out", str(out), "--trials", "4", "--sizes", "3", "5"]
    assert cli.run(argv) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0].startswith("size_index,sizes,sentence")
    assert lines[1].startswith("0,3,sentence1,4,4,")
    assert lines[-1].startswith("1,5,(battery),4,4,")


def test_experiment_uses_thread_setting(experiment_file, mocker, cli_settings):
    cli_settings.set("threads", 3)
    run = mocker.patch("fraisse.main.run_experiment")
    run.return_value = MagicMock(rows=[])
    mocker.patch("fraisse.main.summarize", return_value="")
    assert cli.run(["experiment", "--config", experiment_file]) == EXIT_OK
    assert run.call_args.args[1] == 3


def test_experiment_settings_fill_missing_keys(experiment_file, mocker, cli_settings):
    cli_settings.set("output_format", "json")
    cli_settings.set("trial_batch", 4)
    run = mocker.patch("fraisse.main.run_experiment")
    run.return_value = MagicMock(rows=[])
    summarize = mocker.patch("fraisse.main.summarize", return_value="")
    assert cli.run(["experiment", "--config", experiment_file]) == EXIT_OK
    cfg = run.call_args.args[0]
    assert cfg.batch == 4
    assert cfg.format == "json"
    assert summarize.call_args.args[1] == "json"


def test_experiment_bad_config(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"class": "graphs", "sizes": [3], "battery": {"sentences": []}}))
    assert cli.run(["experiment", "--config", str(path)]) == EXIT_CONFIG_ERROR


def test_version():
    with pytest.raises(SystemExit) as excinfo:
        cli.run(["--version"])
    assert excinfo.value.code == 0


def test_main_exits_with_status(capsys):
    with pytest.raises(SystemExit) as excinfo:
        cli.main(["catalog"])
    assert excinfo.value.code == EXIT_OK


def test_debug_log(tmp_path, mocker):
    log_path = tmp_path / "cache" / "debug.log"
    mocker.patch("fraisse.main.DEBUG_LOG_PATH", str(log_path))
    root = logging.getLogger()
    before, level = list(root.handlers), root.level
    try:
        assert cli.run(["--debug", "catalog"]) == EXIT_OK
        assert log_path.exists()
    finally:
        for handler in root.handlers:
            if handler not in before:
                root.removeHandler(handler)
                handler.close()
        root.setLevel(level)
