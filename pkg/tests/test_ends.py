import json

import pytest

from coarse_ends import samples as smp
from coarse_ends import subsets as ss
from coarse_ends.covers import CoarseCover, cover_verdict, star_refinement
from coarse_ends.endpoints import PeriodicRay, Pushforward, direction_ray, validate_endpoint
from coarse_ends.ends import (base_axiom_suite, close_maps_agree, cover_separation_bound, dedupe_endpoints,
                              endpoint_distance_bound, entourage_relation, finite_cover_structure,
                              in_u_neighborhood, intersect_covers, pushforward_endpoint, pushforward_well_defined,
                              refinement_monotonicity_check, restrict_to_intersection, same_endpoint,
                              separate_endpoints, subspace_embedding_check, uniform_continuity_check)
from coarse_ends.errors import ConfigError, PreconditionError
from coarse_ends.maps import Affine, FoldToLine, Identity, Projection, SubspaceView
from coarse_ends.verdict import APART, CLOSE, FAILS, HOLDS, IN, OUT


def brute_hausdorff(space, xs, ys):
    return max(max(min(space.distance(a, b) for b in ys) for a in xs),
               max(min(space.distance(a, b) for a in xs) for b in ys))


def test_same_endpoint_bound_matches_hausdorff(line, grid):
    plus, detour = direction_ray((1,)), smp.line_endpoints()[2][1]
    v = same_endpoint(line, plus, detour, grid)
    assert v.outcome == CLOSE
    # long enough prefixes cover every point the detour adds
    assert v.witness["E"] == brute_hausdorff(line, plus.points(400), detour.points(400)) == 4


def test_same_endpoint_in_the_plane(plane, grid):
    E, SE = dict(smp.compass_rays())["E"], dict(smp.compass_rays())["SE"]
    assert same_endpoint(plane, E, SE, grid).outcome == APART
    shifted = direction_ray((1, 0), (0, 5))
    v = same_endpoint(plane, E, shifted, grid)
    assert v.outcome == CLOSE and v.witness["E"] == 5


def test_neighbourhood_relation(line, grid):
    plus, minus = direction_ray((1,)), direction_ray((-1,))
    U = smp.line_cover()
    assert in_u_neighborhood(line, plus, minus, U, grid).outcome == OUT
    assert in_u_neighborhood(line, plus, smp.line_endpoints()[2][1], U, grid).outcome == IN
    trivial = CoarseCover((ss.ALL,))
    assert in_u_neighborhood(line, plus, minus, trivial, grid).outcome == IN
    assert refinement_monotonicity_check(line, plus, minus, U, trivial, grid).outcome == HOLDS


def test_relation_independent_of_jobs(plane, grid):
    eps = smp.compass_rays()[:5]
    one = entourage_relation(plane, eps, smp.two_cones(), grid, jobs=1)
    two = entourage_relation(plane, eps, smp.two_cones(), grid, jobs=3)
    assert json.dumps(one.to_json(), sort_keys=True) == json.dumps(two.to_json(), sort_keys=True)
    assert "graph relation" in one.dot()


def test_dedupe(grid):
    Zp = smp.halfline()
    reps, classes, dups, unresolved = dedupe_endpoints(Zp, smp.halfline_endpoints(Zp), grid)
    assert len(reps) == 1 and len(classes[0]) == 5 and not unresolved


def test_relation_requires_cover(line, grid):
    bad = CoarseCover((ss.HalfSpace((1,), 0),))
    with pytest.raises(PreconditionError):
        entourage_relation(line, smp.line_endpoints(), bad, grid)


def test_base_axioms_on_the_line(line, grid):
    rep = base_axiom_suite(line, [smp.line_cover(), CoarseCover((ss.ALL,))], smp.line_endpoints(), grid)
    assert rep["tally"]["fail"] == 0 and rep["tally"]["inconclusive"] == 0
    assert rep["passed"]


def test_intersected_cover_verifies(plane, grid):
    W = intersect_covers(plane, smp.four_halfplanes(), smp.two_cones(), grid)
    assert cover_verdict(plane, W, grid).outcome == HOLDS


def test_separate_axis_rays(plane, grid):
    rays = dict(smp.compass_rays())
    cover, v = separate_endpoints(plane, rays["E"], rays["N"], grid)
    assert v.outcome == OUT and cover is not None
    assert cover_verdict(plane, cover, grid).outcome == HOLDS
    with pytest.raises(PreconditionError):
        separate_endpoints(plane, rays["E"], direction_ray((1, 0), (0, 2)), grid)


def test_finite_cover_structure(plane, grid):
    rep = finite_cover_structure(plane, smp.compass_rays(), smp.two_cones(), grid)
    assert rep["counts"]["fail"] == 0
    assert rep["class_count"] <= rep["class_bound"] == 4


def test_cover_separation_bound_on_the_line(line, grid):
    plus, minus = direction_ray((1,)), direction_ray((-1,))
    rep = cover_separation_bound(line, plus, smp.line_cover(), grid, [("minus", minus)])
    # the +ray against the part x <= 5 away from it: the far points of the ray sit at R + 1 past 5
    assert rep["f"] == [2 * R + 2 for R in grid.radii]
    assert rep["counts"] == {"pass": 1, "fail": 0, "inconclusive": 0}
    g = endpoint_distance_bound(line, plus, minus, grid)
    assert g.verdict == HOLDS and g.f == [2 * R + 2 for R in grid.radii]
    assert endpoint_distance_bound(line, plus, plus, grid).f == [0] * 5


def test_pushforwards(grid):
    pair = smp.halfline_pair()
    fold = FoldToLine(pair)
    left, right = [e for _, e in smp.halfline_pair_endpoints()]
    fl = pushforward_endpoint(fold, left, grid)
    assert fl.validation.outcome == HOLDS
    assert same_endpoint(fold.target, fl, Pushforward(fold, right), grid).outcome == APART
    with pytest.raises(ConfigError):
        pushforward_endpoint(fold, direction_ray((1,)), grid)


def test_functoriality_checks(line, grid):
    plus, detour = direction_ray((1,)), smp.line_endpoints()[2][1]
    assert pushforward_well_defined(Affine(line, -2, 3), plus, detour, grid).outcome == HOLDS
    assert close_maps_agree(Identity(line), Affine(line, 1, 9), plus, grid).outcome == HOLDS
    # maps that are not close say nothing
    v = close_maps_agree(Identity(line), Affine(line, -1, 0), plus, grid)
    assert v.outcome == HOLDS and v.witness["maps"] == APART


def test_uniform_continuity(grid):
    strip = smp.strip()
    v = uniform_continuity_check(Projection(strip, 0), smp.line_cover(),
                                 [("E", direction_ray((1, 0))), ("W", direction_ray((-1, 0)))], grid)
    assert v.outcome == HOLDS
    with pytest.raises(PreconditionError):
        uniform_continuity_check(Projection(smp.plane(), 0), smp.line_cover(), [], grid)


def test_subspace_embedding(plane, grid):
    upper = SubspaceView(plane, ss.HalfSpace((0, 1), 0))
    cones = [ss.intersection(U, upper.subset) for U in smp.two_cones().parts]
    eps = [("E", direction_ray((1, 0))), ("W", direction_ray((-1, 0))), ("N", direction_ray((0, 1))),
           ("NE", PeriodicRay((), ((1, 0), (0, 1))))]
    v = subspace_embedding_check(plane, upper, cones, eps, grid)
    assert v.outcome == HOLDS and v.witness["counts"]["fail"] == 0


def test_restrict_to_intersection(plane, grid):
    U, V = ss.HalfSpace((1, 0), -1), ss.HalfSpace((0, -1), -1)
    phi = PeriodicRay((), ((1, 0),))
    psi = PeriodicRay(((0, 0), (1, 1)), ((1, 0), (0, -1), (0, 1)))
    out, rep = restrict_to_intersection(plane, U, V, phi, psi, grid)
    assert rep["valid"] == HOLDS
    assert rep["close_to_inputs"] == [CLOSE, CLOSE]
    assert validate_endpoint(plane, out, grid).outcome == HOLDS
    for i in range(60):
        assert ss.contains(plane, ss.intersection(U, V), out.point(i))


def test_star_refinement_certificate(plane, grid):
    V = star_refinement(plane, smp.four_halfplanes(), grid)
    assert V.certificate["verdict"] == HOLDS
    assert V.certificate["method"]
