"""Endpoints and ends of coarse spaces, with three-valued verdicts at truncation scale."""
from .errors import CoarseEndsError, ConfigError, DomainError, InternalError, PreconditionError
from .grid import TruncationGrid, compact_grid, default_grid, load_grid
from .spaces import CoproductSpace, GraphSpace, GridSpace, HalfLineSpace, LineSpace, TreeSpace, load_space, make_space
from .verdict import APART, CLOSE, FAILS, HOLDS, IN, INCONCLUSIVE, OUT, Verdict

__version__ = "0.1.0"

__all__ = [
    "APART", "CLOSE", "FAILS", "HOLDS", "IN", "INCONCLUSIVE", "OUT", "Verdict",
    "CoarseEndsError", "ConfigError", "DomainError", "InternalError", "PreconditionError",
    "TruncationGrid", "compact_grid", "default_grid", "load_grid",
    "CoproductSpace", "GraphSpace", "GridSpace", "HalfLineSpace", "LineSpace", "TreeSpace",
    "load_space", "make_space",
]
