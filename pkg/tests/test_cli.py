import json
from pathlib import Path

import pytest

from hyper_match.cli import EXIT_INPUT, EXIT_OK, main


GEN = ["--generate", "uniform-mix", "--n", "20", "--batches", "5", "--batch-size", "8", "--seed", "3"]


def _lines(out: str):
    return [json.loads(line) for line in out.splitlines() if line.strip()]


def test_generate_run_prints_deltas_then_stats(capsys: pytest.CaptureFixture):
    code = main(GEN + ["--verify", "every-batch", "--log-level", "WARNING"])
    assert code == EXIT_OK
    records = _lines(capsys.readouterr().out)
    stats = records[-1]
    assert stats["batches"] == 5
    assert stats["updates"] == 40
    assert stats["config"]["seed"] == 3
    for rec in records[:-1]:
        assert list(rec) == ["batch", "change", "edge", "level"]
        assert rec["change"] in ("matched", "unmatched")


def test_same_arguments_same_output(capsys: pytest.CaptureFixture):
    outputs = []
    for _ in range(2):
        assert main(GEN + ["--r", "3", "--log-level", "ERROR"]) == EXIT_OK
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]


def test_input_stream_and_stats_out(tmp_path: Path, capsys: pytest.CaptureFixture):
    stream = tmp_path / "s.txt"
    stream.write_text("BATCH\n+ 1 2\n+ 2 3\nEND\nBATCH\n- 1 2\nEND\n", encoding="utf-8")
    stats_path = tmp_path / "out" / "stats.json"
    code = main(["--input", str(stream), "--verify", "final", "--stats-out", str(stats_path), "--log-level", "ERROR"])
    assert code == EXIT_OK
    records = _lines(capsys.readouterr().out)
    assert all("change" in r for r in records)
    stats = json.loads(stats_path.read_text(encoding="utf-8"))
    assert stats["batches"] == 2 and stats["updates"] == 3


@pytest.mark.parametrize(
    "text",
    [
        "BATCH\n- 1 2\nEND\n",
        "BATCH\n+ 1 2\n+ 2 1\nEND\n",
        "BATCH\n+ 1 2 3\nEND\n",
        "BATCH\n+ 1 2\n",
    ],
)
def test_bad_streams_exit_with_input_error(tmp_path: Path, text: str):
    stream = tmp_path / "s.txt"
    stream.write_text(text, encoding="utf-8")
    assert main(["--input", str(stream), "--log-level", "ERROR"]) == EXIT_INPUT


def test_bad_arguments_exit_with_input_error(tmp_path: Path):
    assert main(["--input", str(tmp_path / "missing.txt"), "--log-level", "ERROR"]) == EXIT_INPUT
    assert main(GEN + ["--r", "1", "--log-level", "ERROR"]) == EXIT_INPUT
    assert main(GEN + ["--log-level", "NOPE"]) == EXIT_INPUT
    assert main(["--generate", "uniform-mix", "--n", "1", "--log-level", "ERROR"]) == EXIT_INPUT


def test_config_file_and_env(tmp_path: Path, monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("r: 3\nseed: 8\nlog_level: ERROR\n", encoding="utf-8")
    monkeypatch.setenv("HYPER_MATCH_SEED", "12")
    args = ["--generate", "hypergraph-random", "--n", "10", "--batches", "2", "--batch-size", "4", "--config", str(cfg)]
    assert main(args) == EXIT_OK
    stats = _lines(capsys.readouterr().out)[-1]
    assert stats["config"]["r"] == 3
    assert stats["config"]["seed"] == 12
