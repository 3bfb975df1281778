"""The optimal universal asymmetric 1->2 cloner and the trivial cloner.

The optimal cloner is

    T(rho) = (a2 1 + a1 F)(rho x 1/d)(a2 1 + a1 F),   a1^2 + a2^2 + 2 a1 a2 / d = 1,

where ``a1 = alpha1`` is the noise weight on clone 1 (``alpha1 = 0`` leaves
clone 1 untouched). Every channel of this family is represented exactly once
by the root ``alpha2 = -alpha1/d + sqrt(1 - alpha1^2 (1 - 1/d^2))``, which
covers ``alpha1`` in ``[-1/sqrt(d^2-1), d/sqrt(d^2-1)]``. The sub-interval
``[0, 1]`` is the canonical branch with both weights nonnegative; it traces
the part of the tradeoff curve between the two corners ``(1, 1/d^2)`` and
``(1/d^2, 1)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import ChoiChannel, choi_of
from .symmetry import PermCoeffs
from .tensor import flip

__all__ = [
    "CloneChannel",
    "alpha1_interval",
    "from_alpha1",
    "from_target_f1",
    "build",
    "trivial",
    "marginal_fidelities",
    "perm_coeffs",
    "alpha1_sweep",
]

CONSTRAINT_TOL = 1e-12


def alpha1_interval(d: int, canonical: bool = False) -> tuple[float, float]:
    if canonical:
        return 0.0, 1.0
    r = math.sqrt(d * d - 1)
    return -1.0 / r, d / r


def _alpha_sq_max(d: int) -> float:
    return d * d / (d * d - 1)


@dataclass(frozen=True)
class CloneChannel:
    d: int
    alpha1: float
    alpha2: float

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"d must be >= 2, got {self.d}")
        resid = self.constraint_residual()
        if abs(resid) > CONSTRAINT_TOL:
            raise ValueError(f"alpha1^2 + alpha2^2 + 2 alpha1 alpha2/d != 1 (off by {resid:.3e})")
        top = _alpha_sq_max(self.d) + CONSTRAINT_TOL
        if self.alpha1**2 > top or self.alpha2**2 > top:
            raise ValueError(f"alpha^2 must lie in [0, {top:.6g}]")

    def constraint_residual(self) -> float:
        a1, a2, d = self.alpha1, self.alpha2, self.d
        return a1 * a1 + a2 * a2 + 2 * a1 * a2 / d - 1.0

    @property
    def is_canonical(self) -> bool:
        return self.alpha1 >= 0 and self.alpha2 >= 0

    @property
    def alpha_sq(self) -> tuple[float, float]:
        return self.alpha1**2, self.alpha2**2


def from_alpha1(alpha1: float, d: int) -> CloneChannel:
    lo, hi = alpha1_interval(d)
    eps = 1e-12
    if not lo - eps <= alpha1 <= hi + eps:
        raise ValueError(f"alpha1={alpha1} outside [{lo:.17g}, {hi:.17g}] for d={d}")
    # alpha2 has infinite slope at both ends; use the exact partners there
    if abs(alpha1 - hi) <= 4 * eps * hi:
        return CloneChannel(d, hi, lo)
    if abs(alpha1 - lo) <= 4 * eps * hi:
        return CloneChannel(d, lo, hi)
    disc = max(0.0, 1.0 - alpha1 * alpha1 * (1.0 - 1.0 / (d * d)))
    alpha2 = -alpha1 / d + math.sqrt(disc)
    return CloneChannel(d, float(alpha1), float(alpha2))


def from_target_f1(f1: float, d: int) -> CloneChannel:
    """Canonical cloner whose first clone has entanglement fidelity ``f1``."""
    lo = 1.0 / (d * d)
    if not lo <= f1 <= 1.0:
        raise ValueError(f"target fidelity {f1} outside [{lo:.17g}, 1] for d={d}")
    alpha1 = math.sqrt(max(0.0, (1.0 - f1) * d * d / (d * d - 1)))
    return from_alpha1(min(alpha1, 1.0), d)


def build(ch: CloneChannel) -> ChoiChannel:
    d = ch.d
    k = ch.alpha2 * np.eye(d * d) + ch.alpha1 * flip(d).mat
    mixed = np.eye(d) / d

    def transform(x):
        return k @ np.kron(x, mixed) @ k

    return choi_of(transform, d, (d, d))


def trivial(alpha: float, d: int) -> ChoiChannel:
    """alpha * rho x 1/d + (1 - alpha) * 1/d x rho."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    mixed = np.eye(d) / d

    def transform(x):
        return alpha * np.kron(x, mixed) + (1 - alpha) * np.kron(mixed, x)

    return choi_of(transform, d, (d, d))


def marginal_fidelities(ch: CloneChannel) -> tuple[float, float]:
    """(F1, F2) with F_i = 1 - alpha_i^2 (d^2-1)/d^2.

    On the constraint surface this equals the perfect square below, which
    keeps full relative precision near F_i = 0.
    """
    d = ch.d
    return (ch.alpha2 + ch.alpha1 / d) ** 2, (ch.alpha1 + ch.alpha2 / d) ** 2


def perm_coeffs(ch: CloneChannel) -> PermCoeffs:
    """Permutation coefficients of the cloner's Choi state (a1 = a4 = 0)."""
    d = ch.d
    cross = ch.alpha1 * ch.alpha2 / d**2
    return PermCoeffs((0.0, ch.alpha2**2 / d**2, ch.alpha1**2 / d**2, 0.0, cross, cross), d)


def alpha1_sweep(d: int, n: int = 200, canonical: bool = False) -> list[CloneChannel]:
    lo, hi = alpha1_interval(d, canonical)
    return [from_alpha1(float(x), d) for x in np.linspace(lo, hi, n)]
