import pytest

from coarse_ends import samples as smp
from coarse_ends import subsets as ss
from coarse_ends.errors import ConfigError, DomainError
from coarse_ends.maps import (Affine, Compose, Constant, FloorSqrt, FoldToLine, Identity, Projection,
                              SubspaceView, Swap, map_from_json, maps_close, validate_coarse_map)
from coarse_ends.verdict import APART, CLOSE, FAILS, HOLDS


def test_coarse_maps_validate(line, grid):
    assert validate_coarse_map(Affine(line, 2, 1), grid).outcome == HOLDS
    assert validate_coarse_map(FloorSqrt(smp.halfline()), grid).outcome == HOLDS
    assert validate_coarse_map(FoldToLine(smp.halfline_pair()), grid).outcome == HOLDS
    assert validate_coarse_map(Projection(smp.strip(), 0), grid).outcome == HOLDS


def test_non_proper_maps_fail(line, plane, grid):
    assert validate_coarse_map(Constant(line, line, (0,)), grid).outcome == FAILS
    assert validate_coarse_map(Projection(plane, 0), grid).outcome == FAILS


def test_closeness(line, grid):
    assert maps_close(Identity(line), Affine(line, 1, 4), grid).outcome == CLOSE
    assert maps_close(Identity(line), Affine(line, 2, 0), grid).outcome == APART


def test_fold_and_swap():
    pair = smp.halfline_pair()
    fold = FoldToLine(pair)
    # the right side lands at minus its coproduct norm, which counts the gap edge
    assert fold.apply((0, (3,))) == (3,) and fold.apply((1, (3,))) == (-4,)
    sw = Swap(pair)
    assert sw.apply((0, (2,))) == (1, (2,))
    assert Compose(fold, sw).apply((0, (2,))) == (-3,)


def test_domain_checks(plane):
    with pytest.raises(DomainError):
        FloorSqrt(smp.halfline()).apply((-1,))
    strip = SubspaceView(plane, ss.HalfSpace((0, 1), 0))
    with pytest.raises(DomainError):
        Projection(strip, 0).apply((0, -1))


def test_json_round_trip(line):
    f = Affine(line, -3, 2)
    g = map_from_json(f.to_json())
    assert [g.apply((x,)) for x in range(-3, 4)] == [f.apply((x,)) for x in range(-3, 4)]
    with pytest.raises(ConfigError):
        map_from_json({"kind": "teleport", "source": line.descriptor()})
    with pytest.raises(ConfigError):
        map_from_json({"kind": "identity"})
