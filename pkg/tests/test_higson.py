from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from coarse_ends import samples as smp
from coarse_ends import subsets as ss
from coarse_ends.errors import ConfigError, PreconditionError
from coarse_ends.grid import TruncationGrid
from coarse_ends.higson import (Constant, Decay, Product, abs2, function_from_json, glue, global_axiom_check,
                                higson_check, tends_to_zero_check)
from coarse_ends.spaces import LineSpace
from coarse_ends.verdict import FAILS, HOLDS

SMALL = LineSpace(40)
SGRID = TruncationGrid((2, 4, 6, 8, 10))
CATALOGUE = smp.line_functions()
LINE = smp.line()
GRID = TruncationGrid()
ONE = (Fraction(1), Fraction(0))


def brute_higson_radius(space, f, n, eps, candidates):
    """Least candidate R with all pairs d <= n leaving ball(R) varying by at most eps."""
    pts = [(x,) for x in range(-space.horizon, space.horizon + 1)]
    val = {p: f.value(space, p) for p in pts}
    for R in candidates:
        ok = True
        for p in pts:
            for q in pts:
                if 0 < space.distance(p, q) <= n and max(space.norm(p), space.norm(q)) > R:
                    d = (val[p][0] - val[q][0], val[p][1] - val[q][1])
                    if abs2(d) > eps * eps:
                        ok = False
                        break
            if not ok:
                break
        if ok:
            return R
    return None


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(CATALOGUE), st.sampled_from([Fraction(1, 2), Fraction(1, 10), Fraction(1, 30)]),
       st.integers(1, 2))
def test_higson_radius_matches_brute_force(entry, eps, n):
    _, f, _ = entry
    v = higson_check(SMALL, f, n, eps, SGRID)
    cands = (0,) + SGRID.radii[:-1]
    ref = brute_higson_radius(SMALL, f, n, eps, cands)
    if ref is None:
        assert v.outcome != HOLDS
    else:
        assert v.outcome == HOLDS and v.witness["R"] == ref


def test_decay_radii(line, grid):
    # 1/((r+1)(r+2)) is the variation at distance one; 1/90 <= 1/10 and 1/306 <= 1/100 < 1/90
    assert higson_check(line, Decay(), 1, Fraction(1, 10), grid).witness["R"] == 8
    assert higson_check(line, Decay(), 1, Fraction(1, 100), grid).witness["R"] == 16


def test_parity_and_constants(line, grid):
    lookup = {name: f for name, f, _ in CATALOGUE}
    assert higson_check(line, lookup["parity"], 1, Fraction(1, 2), grid).outcome == FAILS
    v = higson_check(line, lookup["one"], 3, Fraction(1, 100), grid)
    assert v.outcome == HOLDS and v.witness["R"] == 0


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([e for e in CATALOGUE if e[2]]), st.sampled_from(CATALOGUE))
def test_vanishing_functions_form_an_ideal(small, bounded):
    # on the default grid every epsilon-support here lies well inside the first window radius
    f, g = small[1], bounded[1]
    for eps in (Fraction(1, 2), Fraction(1, 10)):
        assert tends_to_zero_check(LINE, f, eps, GRID).outcome == HOLDS
        assert tends_to_zero_check(LINE, Product((f, g)), eps, GRID).outcome == HOLDS


def test_tends_to_zero_flags(line, grid):
    for name, f, zero in CATALOGUE:
        outs = {tends_to_zero_check(line, f, e, grid).outcome for e in (Fraction(1, 2), Fraction(1, 10))}
        assert outs == ({HOLDS} if zero else {FAILS}), name


def test_glue_constant(line, grid):
    U1, U2 = smp.line_cover().parts
    c = Constant(ONE)
    out, rep = glue(line, U1, U2, c, c, Constant(), grid)
    assert rep == {"restricts_to_f1": True, "restricts_to_f2_plus_g": HOLDS}
    assert all(out.value(line, (x,)) == ONE for x in range(-50, 51))


def test_glue_sign_like(line, grid):
    U1, U2 = smp.line_cover().parts
    out, rep = glue(line, U1, U2, Constant(ONE), Constant((Fraction(-1), Fraction(0))), Constant(), grid)
    assert out.value(line, (-5,)) == ONE and out.value(line, (-6,))[0] == -1
    assert higson_check(line, out, 1, Fraction(1, 10), grid).outcome == HOLDS
    assert tends_to_zero_check(line, out, Fraction(1, 2), grid).outcome == FAILS


def test_glue_rejects_incompatible(line, grid):
    with pytest.raises(PreconditionError):
        glue(line, ss.ALL, ss.HalfSpace((-1,), -5), Constant(ONE), Constant(), Constant(), grid)
    with pytest.raises(PreconditionError):
        glue(line, ss.HalfSpace((1,), 0), ss.HalfSpace((1,), 0), Constant(ONE), Constant(), Constant(), grid)
    # adjacent disjoint halfplanes do not cover their union coarsely
    with pytest.raises(PreconditionError):
        glue(smp.plane(), ss.HalfSpace((1, 0), 1), ss.HalfSpace((-1, 0), 0), Constant(), Constant(), Constant(),
             grid)


def test_global_axiom(line, grid):
    cover = smp.line_cover()
    assert global_axiom_check(line, cover, Constant(), grid).outcome == HOLDS
    lookup = {name: f for name, f, _ in CATALOGUE}
    assert global_axiom_check(line, cover, lookup["right_decay"], grid).outcome == HOLDS
    with pytest.raises(PreconditionError):
        global_axiom_check(line, cover, lookup["one"], grid)


def test_support_between_window_radii_is_undecided(line, grid):
    # 3 / (1 + |x|) >= 1/20 up to |x| = 59, between the window radii 32 and 64
    f = Product((Constant((Fraction(0), Fraction(3))), Decay()))
    assert tends_to_zero_check(line, f, Fraction(1, 20), grid).outcome == "inconclusive"


def test_function_json(line):
    for name, f, _ in CATALOGUE:
        again = function_from_json(f.to_json(line), line)
        assert all(again.value(line, (x,)) == f.value(line, (x,)) for x in range(-12, 13)), name
    with pytest.raises(ConfigError):
        function_from_json({"kind": "wave"}, line)
