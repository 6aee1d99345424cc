import json

import pytest

from coarse_ends.errors import ConfigError
from coarse_ends.grid import TruncationGrid, compact_grid, default_grid, grid_for, load_grid
from coarse_ends.spaces import TreeSpace
from coarse_ends.verdict import APART, CLOSE, INCONCLUSIVE, Verdict


def test_defaults():
    g = TruncationGrid()
    assert g.radii == (8, 16, 32, 64, 128)
    assert [g.tau(R) for R in g.radii] == [2, 4, 8, 16, 32]
    assert g.window == 3 and g.r_max == 128


def test_json_round_trip():
    g = TruncationGrid((4, 8, 12), 2, 2)
    assert TruncationGrid.from_json(g.to_json()) == g
    assert load_grid(json.dumps(g.to_json())) == g


@pytest.mark.parametrize("bad", [{"radii": [8, 4, 16]}, {"radii": [1, 2]}, {"window": 0},
                                 {"tau_divisor": 0}, {"nope": 1}])
def test_bad_grids_rejected(bad):
    with pytest.raises(ConfigError):
        TruncationGrid.from_json(bad)


def test_env_override(monkeypatch, tmp_path):
    monkeypatch.setenv("COARSE_ENDS_GRID", '{"radii": [4, 8, 16], "window": 2}')
    assert default_grid().radii == (4, 8, 16)
    p = tmp_path / "g.json"
    p.write_text('{"radii": [6, 12, 24]}')
    monkeypatch.setenv("COARSE_ENDS_GRID", str(p))
    assert default_grid().radii == (6, 12, 24)


def test_grid_for_small_horizon():
    assert grid_for(TreeSpace(3)) == compact_grid()
    assert grid_for(TreeSpace(3, 200)) == TruncationGrid()


def test_verdict_is_three_valued():
    v = Verdict(INCONCLUSIVE)
    assert not v.decisive
    assert Verdict(CLOSE).positive and Verdict(APART).negative
    with pytest.raises(TypeError):
        bool(v)
    with pytest.raises(ValueError):
        Verdict("maybe")
    assert Verdict(CLOSE, {"E": 3}).to_json() == {"outcome": "close", "witness": {"E": 3}}
