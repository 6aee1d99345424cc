import pytest
from hypothesis import given, settings, strategies as st

from coarse_ends import samples as smp
from coarse_ends import subsets as ss
from coarse_ends.covers import CoarseCover
from coarse_ends.endpoints import WordRay
from coarse_ends.errors import ConfigError
from coarse_ends.freudenthal import (compare_ends, component_count, ends_quotient, freudenthal_count,
                                     freudenthal_covers)
from coarse_ends.grid import compact_grid
from coarse_ends.spaces import CoproductSpace, GridSpace, HalfLineSpace, LineSpace, TreeSpace
from coarse_ends.verdict import HOLDS, INCONCLUSIVE
from oracles import brute_components

SMALL = {
    "line": LineSpace(40),
    "halfline": HalfLineSpace(40),
    "plane": GridSpace(2, "L1", 18),
    "king": GridSpace(2, "Linf", 12),
    "tree": TreeSpace(3, 7),
    "tree4": TreeSpace(4, 5),
    "line_pair": CoproductSpace(LineSpace(30), LineSpace(30), 1),
    "mixed_pair": CoproductSpace(GridSpace(2, "L1", 14), HalfLineSpace(14), 3),
}


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(sorted(SMALL)), st.integers(0, 8))
def test_component_count_matches_bfs(name, R):
    space = SMALL[name]
    H = space.horizon
    if H < R + 2 * space.max_step:
        return
    assert component_count(space, R).count == brute_components(space, R, H)


@pytest.mark.parametrize("R", range(1, 7))
def test_tree_golden(R):
    assert component_count(smp.tree(), R).count == 3 * 2 ** (R - 1)


def test_golden_end_counts(grid):
    assert freudenthal_count(smp.line(256), grid).witness["count"] == 2
    assert freudenthal_count(smp.line_pair(256), grid).witness["count"] == 4
    assert freudenthal_count(smp.halfline(), grid).witness["count"] == 1


def test_plane_has_one_end():
    v = freudenthal_count(GridSpace(2, "L1", 64), compact_grid())
    assert v.outcome == HOLDS and v.witness["count"] == 1


def test_labels_are_least_points():
    cc = component_count(LineSpace(40), 5)
    assert cc.labels == [[-5], [5]]


def test_tree_count_does_not_stabilise():
    assert freudenthal_count(smp.tree(), compact_grid()).outcome == INCONCLUSIVE


def test_horizon_too_small():
    with pytest.raises(ConfigError):
        component_count(LineSpace(10), 9)


def test_compare_on_the_line(grid):
    Z = smp.line()
    v = compare_ends(Z, smp.line_endpoints(), freudenthal_covers(Z, 8), grid)
    assert v.outcome == HOLDS
    assert v.witness["quotient"] == v.witness["freudenthal"] == 2
    # close endpoints are merged before the quotient is taken
    assert sorted(len(c) for c in v.witness["classes"]) == [1, 1]
    q = ends_quotient(Z, smp.line_endpoints(), freudenthal_covers(Z, 8), grid)
    assert sorted(q["members"]) == [["minus"], ["plus", "plus_detour"]]


def test_compare_on_coproducts(grid):
    space = smp.line_pair()
    v = compare_ends(space, smp.line_pair_endpoints(), freudenthal_covers(space, 8), grid)
    assert v.outcome == HOLDS and v.witness["quotient"] == 4


def test_compass_rays_form_one_class(grid):
    q = ends_quotient(smp.plane(), smp.compass_rays(), [smp.four_halfplanes()], grid)
    assert q["decisive"] and q["classes"] == [["E", "N", "NE", "NW", "S", "SE", "SW", "W"]]


def test_tree_quotient_separates_branches():
    T = smp.tree()
    q = ends_quotient(T, smp.tree_endpoints(), smp.subtree_covers(), compact_grid())
    assert q["count"] == 3
    assert ["t0", "t0_alt"] in q["classes"]
    assert q["decisive"]
    # the subtree below (0, 1) tells the two rays in branch 0 apart
    deeper = [*smp.subtree_covers()]
    sub = ss.Subtree((0, 1))
    deeper.append(CoarseCover((sub, ss.complement(sub))))
    assert ends_quotient(T, smp.tree_endpoints(), deeper, compact_grid())["count"] == 4
    assert WordRay((0,), (1,)).point(3) == (0, 1, 1)
