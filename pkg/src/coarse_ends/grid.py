"""Truncation grids: the finite radii at which "at infinity" questions are probed."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError

DEFAULT_RADII = (8, 16, 32, 64, 128)
DEFAULT_TAU_DIVISOR = 4
DEFAULT_WINDOW = 3
GRID_ENV_VAR = "COARSE_ENDS_GRID"
# For spaces with exponential growth (trees), whose horizon is small
COMPACT_RADII = (2, 4, 6, 8, 10)


@dataclass(frozen=True)
class TruncationGrid:
    """Radii ``R_0 < ... < R_m``, divergence threshold ``tau`` and stability window.

    ``tau(R) = ceil(R / tau_divisor)``.
    """

    radii: tuple = DEFAULT_RADII
    tau_divisor: int = DEFAULT_TAU_DIVISOR
    window: int = DEFAULT_WINDOW

    def __post_init__(self):
        radii = tuple(int(r) for r in self.radii)
        object.__setattr__(self, "radii", radii)
        if not radii:
            raise ConfigError("radii", "must be nonempty")
        if radii[0] < 0 or any(b <= a for a, b in zip(radii, radii[1:])):
            raise ConfigError("radii", "must be strictly increasing and nonnegative")
        if self.window < 1:
            raise ConfigError("window", "must be positive")
        if len(radii) < self.window:
            raise ConfigError("window", f"needs at least {self.window} radii, got {len(radii)}")
        if self.tau_divisor < 1:
            raise ConfigError("tau_divisor", "must be a positive integer")

    @property
    def r_max(self) -> int:
        return self.radii[-1]

    def tau(self, r: int) -> int:
        return -(-int(r) // self.tau_divisor)

    def trailing(self, seq):
        """The last ``window`` items of ``seq``."""
        return list(seq)[-self.window:]

    def to_json(self) -> dict:
        return {"radii": list(self.radii), "tau_divisor": self.tau_divisor, "window": self.window}

    @classmethod
    def from_json(cls, obj) -> "TruncationGrid":
        if not isinstance(obj, dict):
            raise ConfigError("grid", "expected a JSON object")
        unknown = set(obj) - {"radii", "tau_divisor", "window"}
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown grid field")
        try:
            return cls(
                radii=tuple(obj.get("radii", DEFAULT_RADII)),
                tau_divisor=int(obj.get("tau_divisor", DEFAULT_TAU_DIVISOR)),
                window=int(obj.get("window", DEFAULT_WINDOW)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError("grid", str(exc)) from exc


def load_grid(source) -> TruncationGrid:
    """Parse a grid from a path, a JSON string, or a dict."""
    if isinstance(source, TruncationGrid):
        return source
    if isinstance(source, dict):
        return TruncationGrid.from_json(source)
    text = str(source)
    if not text.lstrip().startswith("{"):
        try:
            text = Path(text).read_text()
        except OSError as exc:
            raise ConfigError("grid", f"cannot read {source}: {exc}") from exc
    try:
        return TruncationGrid.from_json(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ConfigError("grid", f"invalid JSON: {exc}") from exc


def default_grid() -> TruncationGrid:
    """The package default, overridden by ``$COARSE_ENDS_GRID`` (path or inline JSON)."""
    env = os.environ.get(GRID_ENV_VAR)
    if env:
        return load_grid(env)
    return TruncationGrid()


def compact_grid() -> TruncationGrid:
    return TruncationGrid(COMPACT_RADII, DEFAULT_TAU_DIVISOR, DEFAULT_WINDOW)


def grid_for(space, grid: TruncationGrid = None) -> TruncationGrid:
    """``grid`` (or the default) when it fits the horizon of ``space``, else the compact grid."""
    grid = default_grid() if grid is None else grid
    if grid.r_max <= space.horizon:
        return grid
    return compact_grid()
