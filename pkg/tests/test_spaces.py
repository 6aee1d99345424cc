import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coarse_ends.errors import ConfigError, DomainError
from coarse_ends.spaces import (CoproductSpace, GraphSpace, GridSpace, HalfLineSpace, LineSpace, TreeSpace,
                                load_space, make_space)
from oracles import bfs_ball, weighted_ball

SPACES = {
    "line": LineSpace(30),
    "halfline": HalfLineSpace(30),
    "plane": GridSpace(2, "L1", 14),
    "king": GridSpace(2, "Linf", 8),
    "cube": GridSpace(3, "L1", 6),
    "tree": TreeSpace(3, 6),
    "tree4": TreeSpace(4, 4),
    "pair": CoproductSpace(LineSpace(20), HalfLineSpace(20), 2),
}


@pytest.mark.parametrize("name", sorted(SPACES))
def test_truncation_matches_search(name):
    space = SPACES[name]
    R = space.horizon
    ref = weighted_ball(space, R) if name == "pair" else bfs_ball(space, R)
    t = space.truncation(R)
    assert set(t.points) == set(ref)
    assert [int(n) for n in t.norms] == [ref[p] for p in t.points]
    assert list(t.norms) == sorted(t.norms)
    for r in (0, R // 2, R):
        assert t.count(r) == sum(1 for d in ref.values() if d <= r)


@pytest.mark.parametrize("name", ["line", "plane", "king", "tree", "pair"])
def test_graph_edges_match_neighbors(name):
    space = SPACES[name]
    t = space.truncation()
    adj = t.adjacency()
    for i, p in enumerate(t.points[:200]):
        expected = {t.index[q]: w for q, w in space.neighbors(p) if q in t.index}
        row = adj.getrow(i)
        assert dict(zip(row.indices.tolist(), row.data.tolist())) == expected


def test_ball_sizes():
    # |B(R)| in Z^2 with L1 is 2R^2 + 2R + 1; the 3-regular tree has 1 + 3(2^R - 1)
    assert len(GridSpace(2, "L1", 20).truncation()) == 2 * 400 + 40 + 1
    assert len(TreeSpace(3, 7).truncation()) == 1 + 3 * (2 ** 7 - 1)


points2 = st.tuples(st.integers(-7, 7), st.integers(-7, 7))


@settings(max_examples=60, deadline=None)
@given(points2, points2)
def test_plane_distance_is_graph_distance(p, q):
    space = SPACES["plane"]
    # distances from p inside a ball big enough to hold a geodesic
    ref = bfs_ball(GridSpace(2, "L1", 40), 30)
    shifted = (q[0] - p[0], q[1] - p[1])
    assert space.distance(p, q) == ref[shifted]


words = st.lists(st.integers(0, 1), max_size=5)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2), words, st.integers(0, 2), words)
def test_tree_metric_axioms(a, wa, b, wb):
    T = SPACES["tree"]
    p, q = (a, *wa), (b, *wb)
    assert T.distance(p, q) == T.distance(q, p)
    assert (T.distance(p, q) == 0) == (p == q)
    for r in [(), (a,), (b, 0)]:
        assert T.distance(p, q) <= T.distance(p, r) + T.distance(r, q)


def test_coproduct_cross_distance():
    pair = SPACES["pair"]
    assert pair.distance((0, (3,)), (1, (4,))) == 3 + 2 + 4
    assert pair.norm((1, (0,))) == 2
    assert pair.decode_point([1, [5]]) == (1, (5,))
    with pytest.raises(DomainError):
        pair.decode_point([2, [5]])


def test_make_space_round_trip(tmp_path):
    for space in SPACES.values():
        again = make_space(json.loads(json.dumps(space.descriptor())))
        assert again.descriptor() == space.descriptor()
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"kind": "grid", "dim": 2}))
    assert load_space(p).horizon == 160


@pytest.mark.parametrize("desc", [{"kind": "grid"}, {"kind": "grid", "dim": 0}, {"kind": "moon"},
                                  {"kind": "tree", "valence": 2}, {"kind": "line", "horizon": "big"},
                                  {"kind": "coproduct", "left": {"kind": "line"}}, [1, 2]])
def test_bad_descriptors(desc):
    with pytest.raises(ConfigError):
        make_space(desc)


def test_graph_space_from_csv(tmp_path):
    p = tmp_path / "g.csv"
    p.write_text("u,v\n0,1\n1,2\n2,3\n1,4\n")
    g = make_space({"kind": "graph", "path": "g.csv"}, base_dir=tmp_path)
    assert g.norm(3) == 3 and g.distance(3, 4) == 3
    p.write_text("0,1\n2,3\n")
    with pytest.raises(ConfigError):
        make_space({"kind": "graph", "path": str(p)})


def test_point_checks():
    with pytest.raises(DomainError):
        SPACES["halfline"].check_point((-1,))
    with pytest.raises(DomainError):
        SPACES["tree"].check_point((0, 2))
    assert SPACES["plane"].contains((1, -3))
    assert not SPACES["plane"].contains((1, True))
    assert isinstance(SPACES["plane"].truncation().norms, np.ndarray)
