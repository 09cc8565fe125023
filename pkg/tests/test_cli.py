import json
import subprocess
import sys

import pytest

from gentree.cli import main


def run_cli(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def fig2_files(tmp_path_factory):
    d = tmp_path_factory.mktemp("fig2")
    assert main(["truth", "--runner", "builtin:fig2", "--out", str(d / "truth.json")]) == 0
    assert main(["run", "--runner", "builtin:fig2", "--seed", "7", "--out", str(d / "run.json"),
                 "--truth", str(d / "truth.json")]) == 0
    return d


def test_run_fig2(fig2_files, capsys):
    doc = json.loads((fig2_files / "run.json").read_text())
    assert len(doc["locations"]) == 9
    assert doc["report"]["exact"] == 9
    assert doc["locations"]["L3"]["formula"] == "u=1 & v=1"
    entry = doc["locations"]["L8"]
    assert entry["iteration_found"] <= doc["totals"]["iterations"]
    assert entry["tree"].splitlines()[0].endswith("->") or "HIT" in entry["tree"]
    assert (fig2_files / "run.iterations.csv").read_text().startswith("iteration,configs")
    assert (fig2_files / "run.convergence.csv").read_text().strip().endswith(",9,9")


def test_run_is_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert run_cli("run", "--runner", "builtin:fig2", "--seed", 3, "--out", tmp_path / f"{name}.json") == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_compare_identical_files(fig2_files, tmp_path, capsys):
    t = fig2_files / "truth.json"
    assert run_cli("compare", "--inferred", t, "--truth", t, "--out", tmp_path / "c.json") == 0
    doc = json.loads((tmp_path / "c.json").read_text())
    assert doc["exact"] == doc["total"] == 9 and doc["delta_cov"] == 0
    assert "exact 9/9" in capsys.readouterr().out


def test_compare_refuses_other_space(fig2_files, tmp_path, capsys):
    other = tmp_path / "c50.json"
    assert run_cli("truth", "--runner", "builtin:c50limit", "--out", other) == 0
    assert run_cli("compare", "--inferred", other, "--truth", fig2_files / "truth.json") == 1
    assert "different spaces" in capsys.readouterr().err


def test_missing_oracle_exits_2(tmp_path, capsys):
    space = tmp_path / "s.space"
    space.write_text("x: 0,1\n")
    assert run_cli("run", "--space", space, "--runner", "oracle:missing.db") == 2
    assert "missing.db" in capsys.readouterr().err
    assert run_cli("run", "--runner", "oracle:missing.db") == 2


def test_usage_errors_exit_1(tmp_path, capsys):
    assert run_cli("run") == 1
    assert run_cli("frobnicate") == 1
    assert run_cli("run", "--runner", "ftp:x") == 1
    assert run_cli("run", "--runner", "cmd:echo") == 1
    assert run_cli("run", "--runner", "builtin:fig2", "--max-explore", 0) == 1
    assert run_cli("run", "--runner", "builtin:nope") == 1
    bad = tmp_path / "bad.space"
    bad.write_text("x: 0,1\ny 0,1\n")
    assert run_cli("run", "--space", bad, "--runner", "cmd:echo") == 1
    assert "line 2" in capsys.readouterr().err


def test_failing_command_exits_2(tmp_path):
    space = tmp_path / "s.space"
    space.write_text("x: 0,1\n")
    assert run_cli("run", "--space", space, "--runner", f"cmd:{sys.executable} -c 'raise SystemExit(4)'") == 2


def test_command_runner_end_to_end(tmp_path, capsys):
    prog = tmp_path / "prog.py"
    prog.write_text("import sys\nprint('COV A')\nif sys.argv[1] == '1' and sys.argv[2] == 'b':\n    print('COV B')\n")
    space = tmp_path / "s.space"
    space.write_text("x: 0,1\ny: a,b,c\n")
    out = tmp_path / "r.json"
    assert run_cli("run", "--space", space, "--runner", f"cmd:{sys.executable} {prog} {{x}} {{y}}",
                   "--out", out, "--rerun", 2) == 0
    doc = json.loads(out.read_text())
    assert doc["locations"]["A"]["formula"] == "true"
    assert doc["locations"]["B"]["formula"] == "x=1 & y=b"
    assert doc["unstable"] == []


def test_spec_runner_budget_and_initial(tmp_path):
    space = tmp_path / "s.space"
    space.write_text("x: 0,1\ny: 0,1,2\n")
    spec = tmp_path / "p.spec"
    spec.write_text("P: x=1\n")
    init = tmp_path / "init.txt"
    init.write_text("# first\n1,2\n")
    out = tmp_path / "r.json"
    assert run_cli("run", "--space", space, "--runner", f"spec:{spec}", "--budget", 4,
                   "--initial-configs", init, "--out", out) == 0
    doc = json.loads(out.read_text())
    assert doc["totals"]["configs"] == 4 and doc["totals"]["budget_exhausted"]
    init.write_text("1,7\n")
    assert run_cli("run", "--space", space, "--runner", f"spec:{spec}", "--initial-configs", init) == 1


def test_baseline_and_mincov(fig2_files, tmp_path, capsys):
    out = tmp_path / "b.json"
    assert run_cli("baseline", "--runner", "builtin:fig2", "--n", 100, "--truth", fig2_files / "truth.json",
                   "--out", out) == 0
    doc = json.loads(out.read_text())
    assert doc["compare"]["total"] == 9
    assert run_cli("mincov", "--inferred", fig2_files / "run.json", "--out", tmp_path / "m.json") == 0
    m = json.loads((tmp_path / "m.json").read_text())
    assert 2 <= len(m["configs"]) <= 5 and m["skipped"] == []


def test_demo(capsys):
    assert run_cli("demo", "--seed", 1) == 0
    out = capsys.readouterr().out
    assert "L8" in out and "configurations cover every location" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "gentree", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "truth" in proc.stdout
