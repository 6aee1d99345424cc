import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coarse_ends import samples as smp
from coarse_ends import subsets as ss
from coarse_ends.coarse_rel import close_verdict, working_truncation
from coarse_ends.covers import (CoarseCover, barycentric_refinement, coarse_star, containment, cover_from_json,
                                cover_verdict, exceptional_support, require_cover, separate, separation_cover,
                                star_refinement, verify_coarse_cover, verify_star_refinement)
from coarse_ends.errors import ConfigError, PreconditionError
from coarse_ends.grid import TruncationGrid
from coarse_ends.spaces import GridSpace, LineSpace
from coarse_ends.verdict import APART, FAILS, HOLDS
from oracles import bfs_ball, brute_exceptional_norm

TINY = GridSpace(2, "L1", 12)
TGRID = TruncationGrid((2, 4, 6, 8, 10))
TBALL = bfs_ball(TINY, 12)

halfplanes = st.builds(lambda a, b, c: ss.HalfSpace((a, b), c), st.integers(-1, 1), st.integers(-1, 1),
                       st.integers(-3, 3))


@settings(max_examples=8, deadline=None)
@given(st.lists(halfplanes, min_size=2, max_size=3), st.sampled_from([1, 2]))
def test_exceptional_support_matches_brute_force(parts, n):
    cover = CoarseCover(tuple(parts))
    support, _ = exceptional_support(TINY, cover, n, TGRID)
    t = working_truncation(TINY, TGRID)
    got = int(t.norms[np.flatnonzero(support)].max()) if support.any() else -1
    preds = [lambda p, U=U: ss.contains(TINY, U, p) for U in parts]
    assert got == brute_exceptional_norm(TINY, TBALL, preds, n)


def test_shipped_covers_verify(line, plane, grid):
    assert cover_verdict(line, smp.line_cover(), grid).outcome == HOLDS
    assert cover_verdict(plane, smp.four_halfplanes(), grid).outcome == HOLDS
    assert cover_verdict(plane, smp.two_cones(), grid).outcome == HOLDS
    for cover in smp.halfline_covers():
        assert cover_verdict(smp.halfline(), cover, grid).outcome == HOLDS


def test_strip_pair_is_not_a_cover_of_the_plane(plane, grid):
    # {x >= -2} and {x <= 2}: the pairs (-3, y), (3, y) are 6 apart and unbounded in y
    cover = CoarseCover((ss.HalfSpace((1, 0), -2), ss.HalfSpace((-1, 0), -2)))
    assert verify_coarse_cover(plane, cover, 6, grid).outcome == FAILS
    # the same pair covers the line at every bound
    line_cover = CoarseCover((ss.HalfSpace((1,), -2), ss.HalfSpace((-1,), -2)))
    assert cover_verdict(LineSpace(), line_cover, grid, bounds=(1, 2, 4, 6, 8)).outcome == HOLDS


def test_parallel_diagonals_fail(plane, grid):
    cover = CoarseCover((ss.HalfSpace((1, 1), -3), ss.HalfSpace((-1, -1), -3)))
    assert cover_verdict(plane, cover, grid, bounds=(8,)).outcome == FAILS


def test_missing_regions(line, grid):
    # the diagonal pairs (x, x) with x < -5 lie in no part
    cover = CoarseCover((ss.HalfSpace((1,), -5),), ss.ALL)
    assert cover_verdict(line, cover, grid).outcome == FAILS
    with pytest.raises(PreconditionError):
        require_cover(line, cover, grid)
    # over the part itself the single part is a cover
    assert cover_verdict(line, CoarseCover(cover.parts, cover.parts[0]), grid).outcome == HOLDS
    # a bounded gap is allowed
    two = CoarseCover((ss.HalfSpace((1,), 3), ss.HalfSpace((-1,), 3)))
    assert cover_verdict(line, two, grid).outcome == HOLDS


def test_containment(plane, grid):
    v = containment(plane, ss.AxisRay(0, 1), ss.HalfSpace((1, 0), 0), grid)
    assert v.outcome == HOLDS and v.witness["E"] == 0
    v = containment(plane, ss.Thicken(ss.AxisRay(0, 1), 3), ss.AxisRay(0, 1), grid)
    assert v.outcome == HOLDS and v.witness["bound"] == 3 and v.witness["E"] == 8
    assert containment(plane, ss.HalfSpace((1, 0), 0), ss.AxisRay(0, 1), grid).outcome == FAILS


def test_separate_pairs(plane, grid):
    A, B = ss.AxisRay(0, 1), ss.AxisRay(1, -1)
    C, D = separate(plane, A, B, grid)
    t = working_truncation(plane, grid)
    assert not (ss._mask(t, C) & ss._mask(t, D)).any()
    assert not (ss._mask(t, A) & ~ss._mask(t, C)).any()
    assert close_verdict(plane, A, ss.complement(C), grid).outcome == APART
    assert close_verdict(plane, B, ss.complement(D), grid).outcome == APART
    with pytest.raises(PreconditionError):
        separate(plane, A, ss.HalfSpace((1, 0), 5), grid)


def test_separation_cover(line, grid):
    U1, U2 = smp.line_cover().parts
    V1, V2 = separation_cover(line, U1, U2, grid)
    assert cover_verdict(line, CoarseCover((V1, V2)), grid).outcome == HOLDS
    assert close_verdict(line, V1, ss.complement(U1), grid).outcome == APART
    assert close_verdict(line, V2, ss.complement(U2), grid).outcome == APART


def test_coarse_star(plane, grid):
    star = coarse_star(plane, ss.AxisRay(0, 1), smp.four_halfplanes(), grid)
    # the east ray meets x >= -1 and both y-halfplanes, and stays away from x <= 1
    assert star.included == [0, 2, 3]
    assert star.flagged == []


def test_line_refinements(line, grid):
    U = smp.line_cover()
    V = barycentric_refinement(line, U, grid)
    assert cover_verdict(line, V, grid).outcome == HOLDS
    S = star_refinement(line, U, grid)
    v = verify_star_refinement(line, S, U, grid)
    assert v.outcome == HOLDS
    assert all("target" in row for row in v.witness["assignments"])


def test_cover_json(line):
    c = cover_from_json(smp.line_cover().to_json(line), line)
    assert c.parts == smp.line_cover().parts and c.labels == ("x>=-5", "x<=5")
    with pytest.raises(ConfigError):
        cover_from_json({"parts": []}, line)
    with pytest.raises(ConfigError):
        cover_from_json({"labels": []}, line)
