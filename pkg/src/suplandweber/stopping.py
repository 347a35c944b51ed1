"""Parameter-choice rules: a-priori index, discrepancy principle, and a hard
iteration cap wrapping both."""

from __future__ import annotations

import math
from dataclasses import dataclass

RULE_KINDS = ("a-priori", "discrepancy", "max-iter")


@dataclass(frozen=True)
class StoppingRule:
    """Stopping rule for noisy-data runs.

    ``a-priori``     stop at index ceil(c * delta**-p), capped.
    ``discrepancy``  stop at the first residual <= tau * delta (tau > 1).
    ``max-iter``     run to the cap, with convergence detection on
                     exact-data runs.

    The a-priori power law is a heuristic instantiation: an admissible index
    function exists but has no closed form, so its constants are validated
    empirically. The discrepancy rule is classical for the unperturbed
    iteration and experimental for superiorized runs.
    """

    kind: str
    c: float = 1.0
    p: float = 0.5
    tau: float = 1.5
    delta: float = 0.0
    cap: int = 100_000

    def __post_init__(self):
        if self.kind not in RULE_KINDS:
            raise ValueError(f"unknown stopping rule kind {self.kind!r}")
        if self.kind == "a-priori" and (self.c <= 0 or self.p <= 0):
            raise ValueError("a-priori rule requires c > 0 and p > 0")
        if self.kind == "discrepancy" and not self.tau > 1:
            raise ValueError("discrepancy rule requires tau > 1")
        if self.delta < 0:
            raise ValueError("noise level delta must be nonnegative")
        if self.cap < 1:
            raise ValueError("iteration cap must be positive")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "c": self.c, "p": self.p, "tau": self.tau,
                "delta": self.delta, "cap": self.cap}

    @classmethod
    def from_dict(cls, data: dict) -> "StoppingRule":
        return cls(**data)


def apriori_index(rule: StoppingRule, delta: float) -> int:
    """A-priori stopping index min(ceil(c * delta**-p), cap).

    Non-increasing in delta and unbounded as delta -> 0. Undefined at
    delta = 0 (exact data runs to convergence instead).
    """
    if delta <= 0:
        raise ValueError("a-priori rule requires delta > 0; "
                         "run exact data to convergence instead")
    return min(math.ceil(rule.c * delta ** (-rule.p)), rule.cap)


def discrepancy_fired(rule: StoppingRule, residual_norm: float) -> bool:
    """True once the data residual drops to tau * delta."""
    if rule.delta <= 0:
        raise ValueError("discrepancy rule is undefined at zero noise level")
    if not rule.tau > 1:
        raise ValueError("discrepancy rule requires tau > 1")
    return residual_norm <= rule.tau * rule.delta
