import json

import pytest

from ttopt import cli

FAST = ["--dim", "2", "-q", "6", "--budget", "800"]


def test_run_writes_csv(tmp_path, capsys):
    out = tmp_path / "r.csv"
    code = cli.main(["run", "--benchmark", "F4", "--runs", "2", "--out", str(out), *FAST])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "benchmark,d,method,seed,error,time_s,evals"
    assert len(lines) == 3
    assert "F4" in capsys.readouterr().out


def test_format_from_suffix(tmp_path):
    out = tmp_path / "r.json"
    assert cli.main(["run", "-b", "F1", "--runs", "1", "-o", str(out), *FAST]) == 0
    assert json.loads(out.read_text())["schema"] == 1


def test_random_method(tmp_path):
    out = tmp_path / "r.csv"
    assert cli.main(["run", "-b", "F1", "--runs", "1", "--method", "random", "-o", str(out), *FAST]) == 0
    assert ",random," in out.read_text()


def test_report_markdown(tmp_path, capsys):
    src = tmp_path / "r.json"
    cli.main(["run", "-b", "F8", "--runs", "2", "-o", str(src), *FAST])
    capsys.readouterr()
    assert cli.main(["report", str(src)]) == 0
    out = capsys.readouterr().out
    assert "| ttopt | ε |" in out and "| ttopt | τ |" in out


def test_sweep_modes(tmp_path):
    out = tmp_path / "m.csv"
    code = cli.main(["sweep-modes", "-b", "F1", "--dim", "2", "--qs", "4", "5", "--runs", "1",
                     "--budget", "300", "-o", str(out)])
    assert code == 0
    assert "qtt@32" in out.read_text() and "tt@16" in out.read_text()


def test_sweep_dims(tmp_path):
    out = tmp_path / "d.csv"
    code = cli.main(["sweep-dims", "-b", "F4", "--dims", "2", "3", "--factor", "300", "-q", "5",
                     "--runs", "1", "-o", str(out)])
    assert code == 0
    assert len(out.read_text().splitlines()) == 3


@pytest.mark.parametrize("argv", [
    ["run", "--benchmark", "F99"],
    ["run", "--runs", "0"],
    ["run", "--bogus"],
    ["report", "/nonexistent/file.csv"],
])
def test_config_errors_exit_1(argv, capsys):
    try:
        code = cli.main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 1


def test_run_failure_exit_2(monkeypatch, tmp_path):
    import ttopt.harness as H

    def broken(*args, **kwargs):
        raise ValueError("boom")

    monkeypatch.setattr(H, "minimize", broken)
    assert cli.main(["run", "-b", "F1", "--runs", "1", *FAST]) == 2


def test_wall_time_env(monkeypatch, capsys):
    monkeypatch.setenv("TTOPT_MAX_WALL_TIME", "1e-9")
    assert cli.main(["run", "-b", "F1", "--runs", "3", *FAST]) == 0
    assert "no runs completed" in capsys.readouterr().err
