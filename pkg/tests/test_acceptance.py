"""The twelve acceptance criteria, each printed as one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see a report on the terminal.
The full suite runs once per module; criterion 12 runs it a second time
through the console script and compares the two reports byte for byte.
"""
import json
import subprocess
import sys

import pytest

from coarse_ends.grid import default_grid
from coarse_ends.suite import dumps, run_suite

RUNTIME_LIMITS = {1: 5.0, 3: 30.0, 5: 60.0}


@pytest.fixture(scope="module")
def run():
    times = {}
    report = run_suite("paper-examples", default_grid(), progress=lambda r, t: times.__setitem__(r["id"], t))
    return report, times


@pytest.fixture(scope="module")
def by_id(run):
    return {c["id"]: c for c in run[0]["criteria"]}


def announce(capsys, cid, ok, detail=""):
    with capsys.disabled():
        print(f"\ncriterion {cid:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


def check(capsys, run, by_id, cid):
    c = by_id[cid]
    t = run[1].get(cid)
    ok = c["outcome"] == "pass"
    limit = RUNTIME_LIMITS.get(cid)
    if limit is not None:
        ok = ok and t < limit
    detail = f"{c['title']}: {c['counts']}" + (f", {t:.1f}s" if t is not None else "")
    if limit is not None:
        detail += f" (limit {limit:.0f}s)"
    announce(capsys, cid, ok, detail)
    assert c["outcome"] == "pass", c["exceptions"]
    if limit is not None:
        assert t < limit


@pytest.mark.parametrize("cid", [1, 2, 3, 4, 5, 7, 10, 11])
def test_criterion(cid, capsys, run, by_id):
    check(capsys, run, by_id, cid)


def test_criterion_6_base_axioms(capsys, by_id):
    c = by_id[6]
    total = sum(c["counts"].values())
    rate = c["counts"]["inconclusive"] / total
    ok = c["counts"]["fail"] == 0 and rate <= 0.10
    announce(capsys, 6, ok, f"{c['title']}: {c['counts']}, inconclusive rate {rate:.2f}")
    assert ok


def test_criterion_8_totally_bounded(capsys, by_id):
    c = by_id[8]
    ok = c["counts"]["fail"] == 0 and c["counts"]["pass"] > 0
    announce(capsys, 8, ok, f"{c['title']}: {c['counts']}")
    assert ok


def test_criterion_9_chi_laws(capsys, by_id):
    c = by_id[9]
    laws = c["laws"]
    ok = c["outcome"] == "pass"
    announce(capsys, 9, ok, f"{c['title']} on {c['triples']} triples: {laws}")
    assert c["triples"] == 50
    for law in ("symmetry", "union", "absorption", "thickening_sandwich"):
        assert laws[law] == {"pass": 50, "fail": 0, "inconclusive": 0}, law


@pytest.mark.xfail(strict=True, reason="thickening by n can move the profile by up to 2n and more "
                                       "when the thickened set enters a small ball; only the sandwich law holds")
def test_criterion_9_thickening_within_n(by_id):
    assert by_id[9]["laws"]["thickening"]["fail"] == 0


def test_criterion_12_determinism_and_honesty(capsys, run, by_id, tmp_path):
    report = run[0]
    honest = by_id[12]["outcome"] == "pass"
    out = tmp_path / "report.json"
    proc = subprocess.run([sys.executable, "-m", "coarse_ends.cli", "suite", "--preset", "paper-examples",
                           "--out", str(out)], capture_output=True, text=True, timeout=1800)
    same = out.exists() and out.read_text() == dumps(report)
    expected_code = {"pass": 0, "inconclusive": 2}.get(report["outcome"], 1)
    announce(capsys, 12, honest and same, f"honesty {by_id[12]['counts']}, byte-identical rerun: {same}")
    assert proc.returncode == expected_code, proc.stderr
    assert same
    assert honest
    assert json.loads(out.read_text())["outcome"] == report["outcome"]
    for c in report["criteria"][:11]:
        if c["counts"]["inconclusive"]:
            assert c["outcome"] != "pass"
        assert all(e["result"] in ("fail", "inconclusive") for e in c["exceptions"])
