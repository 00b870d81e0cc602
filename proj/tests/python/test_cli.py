import os
import subprocess

import pytest

CLI = os.environ.get("GREENCRIT_CLI")

pytestmark = pytest.mark.skipif(not CLI, reason="GREENCRIT_CLI not set")


def run(*args, cwd):
    return subprocess.run([CLI, *args], cwd=cwd, capture_output=True, text=True)


def test_report_exit_codes(tmp_path):
    assert run("report", "--criterion", "cond-int1b", "--q", "4", "--output", str(tmp_path), cwd=tmp_path).returncode == 0
    assert run("report", "--criterion", "cond-int1b", "--q", "2", "--output", str(tmp_path), cwd=tmp_path).returncode == 1


def test_config_file_and_errors(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[task]\ncriterion = cond-int1b\nq = 4\n[output]\ndir = out\n")
    (tmp_path / "out").mkdir()
    assert run("report", "--config", str(cfg), cwd=tmp_path).returncode == 0
    assert (tmp_path / "out" / "greencrit_report.txt").exists()
    assert run("report", "--config", str(cfg), "--override", "task.q=2", cwd=tmp_path).returncode == 1
    bad = run("report", "--config", str(cfg), "--override", "task.nope=1", cwd=tmp_path)
    assert bad.returncode == 5
    cfg.write_text("[task]\nq\n")
    broken = run("report", "--config", str(cfg), cwd=tmp_path)
    assert broken.returncode == 5
    assert "line 2" in broken.stderr


def test_scan_bracket_error(tmp_path):
    r = run("scan", "--criterion", "cond-int1b", "--override", "scan.q_lo=4", "--override", "scan.q_hi=5",
            "--output", str(tmp_path), cwd=tmp_path)
    assert r.returncode == 3


def test_threads_env(tmp_path):
    env = dict(os.environ, GREENCRIT_THREADS="2")
    r = subprocess.run([CLI, "scan", "--criterion", "cond-int1b", "--override", "scan.q_lo=2",
                        "--override", "scan.q_hi=5", "--output", str(tmp_path)],
                       cwd=tmp_path, capture_output=True, text=True, env=env)
    assert r.returncode == 0
    assert "q_critical" in (tmp_path / "greencrit_scan.txt").read_text()
