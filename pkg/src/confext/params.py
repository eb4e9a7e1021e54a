"""Admissible parameter triples (n, alpha, beta) and their Lebesgue exponents."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .specfun import DomainError

__all__ = ["Params", "InvalidParams", "exponents", "CLAUSES"]

CLAUSES = (
    "n >= 3",
    "beta >= 0",
    "0 < alpha + beta",
    "alpha + beta < n - beta",
    "q(alpha+beta-1)+1 > 0",
)


class InvalidParams(DomainError):
    """Raised for a triple outside the admissible region; ``clause`` names the first failure."""

    def __init__(self, params: "Params", clause: str):
        super().__init__(f"invalid (n, alpha, beta) = ({params.n}, {params.alpha}, {params.beta}): violates {clause}")
        self.params = params
        self.clause = clause


@dataclass(frozen=True)
class Params:
    n: int
    alpha: float
    beta: float

    def __post_init__(self):
        if int(self.n) != self.n:
            raise DomainError(f"dimension must be an integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def p(self) -> float:
        return 2.0 * (self.n - 1) / (self.n + self.alpha - 2.0)

    @property
    def q(self) -> float:
        return 2.0 * self.n / (self.n - self.alpha - 2.0 * self.beta)

    @property
    def p_prime(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def q_prime(self) -> float:
        return self.q / (self.q - 1.0)

    @property
    def violations(self) -> list[str]:
        n, a, b = self.n, self.alpha, self.beta
        out = []
        if n < 3:
            out.append(CLAUSES[0])
        if not b >= 0.0:
            out.append(CLAUSES[1])
        if not a + b > 0.0:
            out.append(CLAUSES[2])
        if not a + b < n - b:
            out.append(CLAUSES[3])
            # q is undefined here; fall back to the original third inequality
            if not (n - a - 2 * b) / (2 * n) + (n - a) / (2 * (n - 1)) < 1.0:
                out.append(CLAUSES[4])
        elif not self.q * (a + b - 1.0) + 1.0 > 0.0:
            out.append(CLAUSES[4])
        return out

    @property
    def valid(self) -> bool:
        return not self.violations

    def require_valid(self) -> "Params":
        bad = self.violations
        if bad:
            raise InvalidParams(self, bad[0])
        return self

    @property
    def regime(self) -> str:
        """'lt1', 'eq1' or 'gt1' according to alpha versus 1."""
        if self.alpha < 1.0:
            return "lt1"
        return "eq1" if self.alpha == 1.0 else "gt1"

    @property
    def radial_power(self) -> float:
        """epsilon with d(r) of order (1-r^2)^epsilon at the boundary (up to a log at alpha = 1)."""
        return self.beta + self.alpha - 1.0 if self.alpha <= 1.0 else self.beta

    @property
    def boundary_exponent(self) -> float:
        """q * epsilon: the t -> 1 exponent of d^q and of every ball integrand built from it."""
        return self.q * self.radial_power

    def as_tuple(self) -> tuple[int, float, float]:
        return (self.n, self.alpha, self.beta)

    def __str__(self) -> str:
        return f"(n={self.n}, alpha={self.alpha:g}, beta={self.beta:g})"


def exponents(n: int, alpha: float, beta: float) -> Params:
    """Params with p, q, p', q' and a validity verdict (see ``violations``)."""
    prm = Params(n, alpha, beta)
    if not math.isfinite(prm.alpha) or not math.isfinite(prm.beta):
        raise DomainError("alpha and beta must be finite")
    return prm
