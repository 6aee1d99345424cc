"""The built-in sample spaces, endpoints, covers and functions used by the suite."""
from __future__ import annotations

from fractions import Fraction

from . import subsets as ss
from .covers import CoarseCover
from .endpoints import PeriodicRay, Pushforward, Tagged, WordRay, direction_ray
from .higson import Angle, Constant, Decay, Parity, Product, Restrict, Sum, Table
from .freudenthal import freudenthal_covers
from .maps import FloorSqrt, SubspaceView
from .spaces import CoproductSpace, GridSpace, HalfLineSpace, LineSpace, TreeSpace

ONE = (Fraction(1), Fraction(0))


def halfline():
    return HalfLineSpace()


def line(horizon=None):
    return LineSpace(horizon)


def plane(horizon=None):
    return GridSpace(2, "L1", horizon)


def tree():
    return TreeSpace(3)


def halfline_pair():
    return CoproductSpace(HalfLineSpace(), HalfLineSpace(), 1)


def line_pair(horizon=None):
    return CoproductSpace(LineSpace(horizon), LineSpace(horizon), 1)


def strip(space=None):
    """``|y| <= 2`` inside the plane."""
    space = space or plane()
    return SubspaceView(space, ss.intersection(ss.HalfSpace((0, 1), -2), ss.HalfSpace((0, -1), -2)))


# -- endpoints ---------------------------------------------------------------

def halfline_endpoints(space=None):
    space = space or halfline()
    ident = direction_ray((1,))
    return [
        ("identity", ident),
        ("floor_sqrt", Pushforward(FloorSqrt(space), ident)),
        ("detour", PeriodicRay(((0,), (3,), (1,), (7,)), ((1,),))),
        ("late_start", PeriodicRay(((0,), (5,), (2,)), ((1,),))),
        ("zigzag", PeriodicRay((), ((2,), (-1,)))),
    ]


def line_endpoints():
    return [("plus", direction_ray((1,))), ("minus", direction_ray((-1,))),
            ("plus_detour", PeriodicRay(((0,), (-4,), (-2,)), ((1,),)))]


COMPASS = {"E": (1, 0), "N": (0, 1), "W": (-1, 0), "S": (0, -1)}
DIAGONALS = {"NE": ((1, 0), (0, 1)), "NW": ((-1, 0), (0, 1)),
             "SW": ((-1, 0), (0, -1)), "SE": ((1, 0), (0, -1))}


def compass_rays():
    """Eight rays: the axis directions and staircase diagonals."""
    out = [(k, direction_ray(v)) for k, v in COMPASS.items()]
    out += [(k, PeriodicRay((), steps)) for k, steps in DIAGONALS.items()]
    return out


def tree_endpoints():
    return [("t0", WordRay((0,), (0,))), ("t1", WordRay((1,), (0,))), ("t2", WordRay((2,), (0,))),
            ("t0_alt", WordRay((0,), (1,)))]


def halfline_pair_endpoints():
    return [("left", Tagged(0, direction_ray((1,)))), ("right", Tagged(1, direction_ray((1,))))]


def line_pair_endpoints():
    return [(f"{'LR'[s]}{'+-'[d < 0]}", Tagged(s, direction_ray((d,)))) for s in (0, 1) for d in (1, -1)]


# -- covers ------------------------------------------------------------------

def halfline_covers():
    return [CoarseCover((ss.ALL,), labels=("all",)),
            CoarseCover((ss.HalfSpace((-1,), -10), ss.HalfSpace((1,), 5)), labels=("x<=10", "x>=5"))]


def line_cover():
    """The two-halfline cover ``{x >= -5, x <= 5}``."""
    return CoarseCover((ss.HalfSpace((1,), -5), ss.HalfSpace((-1,), -5)), labels=("x>=-5", "x<=5"))


def four_halfplanes():
    return CoarseCover((ss.HalfSpace((1, 0), -1), ss.HalfSpace((-1, 0), -1),
                        ss.HalfSpace((0, 1), -1), ss.HalfSpace((0, -1), -1)),
                       labels=("x>=-1", "x<=1", "y>=-1", "y<=1"))


def two_cones():
    """Complements of the west and east cones ``{x < -2|y|}`` and ``{x > 2|y|}``."""
    east = ss.union(ss.HalfSpace((1, 2), 0), ss.HalfSpace((1, -2), 0))
    west = ss.union(ss.HalfSpace((-1, 2), 0), ss.HalfSpace((-1, -2), 0))
    return CoarseCover((east, west), labels=("not-west", "not-east"))


def subtree_covers():
    return [CoarseCover((ss.Subtree((i,)), ss.complement(ss.Subtree((i,)))),
                        labels=(f"sub{i}", f"not-sub{i}")) for i in range(3)]


def component_covers(space, R=8):
    return freudenthal_covers(space, R)


# -- functions on the line -----------------------------------------------------

def line_functions():
    """(name, function, tends to zero at infinity)."""
    decay = Decay()
    return [
        ("zero", Constant(), True),
        ("one", Constant(ONE), False),
        ("decay", decay, True),
        ("sign", Angle(0), False),
        ("parity", Parity(), False),
        ("table", Table((((0,), ONE), ((3,), (Fraction(-2), Fraction(1)))), (Fraction(0), Fraction(0))), True),
        ("right_decay", Restrict(decay, ss.HalfSpace((1,), 0)), True),
        ("sign_plus_decay", Sum((Angle(0), decay)), False),
        ("sign_times_decay", Product((Angle(0), decay)), True),
        ("complex_decay", Product((Constant((Fraction(0), Fraction(1))), decay)), True),
    ]
