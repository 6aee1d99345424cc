"""Three-valued, witness-carrying answers."""
from __future__ import annotations

from dataclasses import dataclass, field

CLOSE = "close"
APART = "apart"
HOLDS = "holds"
FAILS = "fails"
IN = "in"
OUT = "out"
INCONCLUSIVE = "inconclusive"

_POSITIVE = {CLOSE, HOLDS, IN}
_NEGATIVE = {APART, FAILS, OUT}


@dataclass
class Verdict:
    """A decision at truncation scale.

    ``outcome`` is one of the module constants; ``witness`` is always present and
    JSON-serializable (it holds bounds, profiles, grid indices or sample points).
    """

    outcome: str
    witness: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.outcome not in _POSITIVE | _NEGATIVE | {INCONCLUSIVE}:
            raise ValueError(f"unknown outcome {self.outcome!r}")

    @property
    def decisive(self) -> bool:
        return self.outcome != INCONCLUSIVE

    @property
    def positive(self) -> bool:
        return self.outcome in _POSITIVE

    @property
    def negative(self) -> bool:
        return self.outcome in _NEGATIVE

    def to_json(self) -> dict:
        return {"outcome": self.outcome, "witness": self.witness}

    def __bool__(self):
        raise TypeError("Verdict is three-valued; test .positive / .negative / .decisive")
