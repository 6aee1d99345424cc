import json
import subprocess
import sys

import pytest

from coarse_ends.cli import main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_ends_count_plane(data, capsys):
    code, out, _ = run(["ends", "count", "--space", str(data / "z2.json"), "--R", "32"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["freudenthal"] == 1 and rep["schema_version"] == 1


def test_close_axes_apart(data, capsys):
    code, out, _ = run(["close", "--space", str(data / "z2.json"), "--a", str(data / "xaxis.json"),
                        "--b", str(data / "yaxis.json")], capsys)
    assert code == 1 and json.loads(out)["outcome"] == "apart"


def test_close_with_itself(data, capsys):
    code, out, _ = run(["close", "--space", str(data / "z2.json"), "--a", str(data / "xaxis.json"),
                        "--b", str(data / "xaxis.json")], capsys)
    assert code == 0 and json.loads(out)["witness"]["bound"] == 0


def test_cover_commands(data, capsys, tmp_path):
    space, cover = str(data / "z.json"), str(data / "z_cover.json")
    assert run(["cover", "verify", "--space", space, "--cover", cover], capsys)[0] == 0
    out = tmp_path / "star.json"
    assert run(["cover", "star-refine", "--space", space, "--cover", cover, "--out", str(out)], capsys)[0] == 0
    assert json.loads(out.read_text())["certificate"]["verdict"] == "holds"
    code, text, _ = run(["cover", "separate", "--space", str(data / "z2.json"), "--a", str(data / "xaxis.json"),
                         "--b", str(data / "yaxis.json")], capsys)
    assert code == 0 and json.loads(text)["A_vs_complement_C"] == "apart"


def test_relate_is_independent_of_jobs(data, capsys, tmp_path):
    base = ["ends", "relate", "--space", str(data / "z.json"), "--cover", str(data / "z_cover.json"),
            "--endpoints", str(data / "z_endpoints.json")]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(base + ["--out", str(a)], capsys)[0] == 0
    assert run(base + ["--out", str(b), "--jobs", "3", "--dot", str(tmp_path / "r.dot")], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    rel = json.loads(a.read_text())["relation"]
    assert rel["classes"] == [["minus"], ["plus", "plus_detour"]]
    assert "--" not in (tmp_path / "r.dot").read_text()


def test_ends_separate_and_compare(data, capsys):
    code, out, _ = run(["ends", "separate", "--space", str(data / "z2.json"), "--endpoints",
                        str(data / "z2_compass.json"), "--p", "N", "--q", "SW"], capsys)
    assert code == 0 and json.loads(out)["verdict"] == "out"
    code, out, _ = run(["ends", "compare", "--space", str(data / "zplus_pair.json"), "--endpoints",
                        str(data / "zplus_pair_endpoints.json")], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["witness"]["quotient"] == rep["witness"]["freudenthal"] == 2


def test_higson_commands(data, capsys):
    space = str(data / "z.json")
    code, out, _ = run(["higson", "check", "--space", space, "--fn", str(data / "fn_decay.json"),
                        "--eps", "1/100"], capsys)
    assert code == 0 and json.loads(out)["witness"]["R"] == 16
    code, out, _ = run(["higson", "glue", "--space", space, "--cover", str(data / "z_cover.json"),
                        "--f1", str(data / "fn_one.json"), "--f2", str(data / "fn_minus_one.json"),
                        "--g", str(data / "fn_zero.json")], capsys)
    assert code == 0
    code, out, _ = run(["higson", "glue", "--space", space, "--u1", str(data / "xaxis.json"),
                        "--u2", str(data / "xaxis.json"), "--f1", str(data / "fn_one.json"),
                        "--f2", str(data / "fn_zero.json"), "--g", str(data / "fn_zero.json")], capsys)
    assert code == 1 and json.loads(out)["outcome"] == "precondition_failed"


@pytest.mark.parametrize("argv", [
    ["close", "--space", "missing.json", "--a", "x", "--b", "y"],
    ["teleport"],
    ["ends", "count"],
    ["higson", "check", "--space", "SPACE", "--fn", "FN", "--eps", "tiny"],
    ["suite", "--preset", "nope"],
    ["ends", "relate", "--space", "SPACE", "--jobs", "0"],
])
def test_config_errors(argv, data, capsys):
    argv = [str(data / "z.json") if a == "SPACE" else str(data / "fn_decay.json") if a == "FN" else a
            for a in argv]
    assert run(argv, capsys)[0] == 3


def test_space_command(data, capsys):
    code, out, _ = run(["space", "--space", str(data / "tree3.json"), "--R", "3"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["ball_size"] == 1 + 3 + 6 + 12


def test_console_script_runs(data):
    proc = subprocess.run([sys.executable, "-m", "coarse_ends.cli", "space", "--space", str(data / "z.json"),
                           "--R", "4"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["ball_size"] == 9


def test_suite_subset_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(["suite", "--only", "1,2,3", "--out", str(a)], capsys)[0] == 0
    code, table, _ = run(["suite", "--only", "1,2,3", "--out", str(b)], capsys)
    assert code == 0 and a.read_bytes() == b.read_bytes()
    assert "overall: pass" in table
