"""Numerical searches for the best clone-quality tradeoff in a direction z.

``optimize_direction`` maximizes ``z1 m(T1) + z2 m(T2)`` over all symmetrized
channels, i.e. over real permutation coefficients (a5 = a6) subject to the
scalar CP/TP criteria. Every merit is affine in the marginal depolarizing
weights, which are linear in the coefficients, so the objective is linear and
the feasible set is a second-order cone cut by half-spaces. A log barrier with
equality-constrained Newton steps solves it to the requested gap.

``alpha_line_search`` restricts the search to the one-parameter optimal
family instead. The two meet exactly when that family is optimal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import cloner
from .symmetry import FeasibilityReport, PermCoeffs, a_to_s, feasibility
from .tradeoff import (
    DirectionWeights,
    MeritKind,
    TradeoffPoint,
    merit_of_depolarizing,
)

__all__ = [
    "OptimizerConfig",
    "OptimizerResult",
    "ConvergenceError",
    "BlockReport",
    "optimize_direction",
    "alpha_line_search",
    "verify_sdp_block",
]

_LINEAR_SLACKS = ("sym_weight", "antisym_weight", "mixed_weight")
_NEWTON_CAP = 40
_BLOCK_TOL = 1e-9


@dataclass(frozen=True)
class OptimizerConfig:
    grid_points: int = 64
    barrier_iterations: int = 30
    barrier_t_growth: float = 10.0
    tolerance: float = 1e-9
    rng_seed: int = 0

    def __post_init__(self):
        if self.grid_points < 16:
            raise ValueError(f"grid_points must be >= 16, got {self.grid_points}")
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be > 0, got {self.tolerance}")
        if not self.barrier_t_growth > 1:
            raise ValueError(f"barrier_t_growth must be > 1, got {self.barrier_t_growth}")
        if self.barrier_iterations < 1:
            raise ValueError("barrier_iterations must be >= 1")


@dataclass(frozen=True)
class OptimizerResult:
    value: float
    argmax_a: PermCoeffs
    argmax_point: TradeoffPoint
    slacks: FeasibilityReport
    iterations: int


class ConvergenceError(RuntimeError):
    """Barrier method stopped before reaching the requested gap; carries the best iterate."""

    def __init__(self, message: str, best: OptimizerResult):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class BlockReport:
    slacks: dict[str, float]
    vacuous: frozenset = field(default_factory=frozenset)
    tol: float = _BLOCK_TOL

    @property
    def feasible(self) -> bool:
        return all(v >= -self.tol for k, v in self.slacks.items() if k not in self.vacuous)

    @property
    def min_slack(self) -> float:
        return min(v for k, v in self.slacks.items() if k not in self.vacuous)

    def violated(self) -> list[str]:
        return [k for k, v in self.slacks.items() if k not in self.vacuous and v < -self.tol]


# --- problem data in the reduced variables x = (a1, a2, a3, a4, a5), a6 = a5 ---

def _coeffs(x: np.ndarray, d: int) -> PermCoeffs:
    return PermCoeffs((x[0], x[1], x[2], x[3], x[4], x[4]), d)


def _basis(d: int) -> list[PermCoeffs]:
    return [_coeffs(e, d) for e in np.eye(5)]


@dataclass(frozen=True)
class _Problem:
    d: int
    lin: np.ndarray  # rows: gradients of the linear slacks
    quad: np.ndarray  # cone slack = x^T quad x
    eq: np.ndarray  # equality rows
    eq_rhs: np.ndarray
    alpha_sq: np.ndarray  # rows: gradients of the two marginal alpha^2

    @property
    def null_basis(self) -> np.ndarray:
        """Orthonormal columns spanning the directions that keep the equalities."""
        _, sv, vt = np.linalg.svd(self.eq)
        rank = int((sv > 1e-12 * sv[0]).sum())
        return vt[rank:].T


def _problem(d: int) -> _Problem:
    """Read every constraint off ``feasibility`` on basis vectors.

    All slacks are homogeneous in the coefficients (linear or quadratic), so
    evaluating them on e_i and e_i + e_j recovers them exactly.
    """
    base = _basis(d)
    names = [k for k in _LINEAR_SLACKS if not (d == 2 and k == "antisym_weight")]
    lin = np.array([[feasibility(b).slacks[k] for b in base] for k in names])

    def cone(x):
        return feasibility(_coeffs(x, d)).slacks["cone"]

    e = np.eye(5)
    diag = [cone(e[i]) for i in range(5)]
    quad = np.empty((5, 5))
    for i in range(5):
        for j in range(5):
            quad[i, j] = diag[i] if i == j else 0.5 * (cone(e[i] + e[j]) - diag[i] - diag[j])

    norm_row = np.array([b.normalization() for b in base])
    eq, rhs = [norm_row], [1.0]
    if d == 2:
        # on three qubits the antisymmetrizer vanishes; fix the gauge along it
        eq.append(np.array([1.0, -1.0, -1.0, -1.0, 1.0]))
        rhs.append(0.0)
    alpha_sq = np.array([b.marginal_alpha_sq() for b in base]).T
    return _Problem(d, lin, quad, np.array(eq), np.array(rhs), alpha_sq)


def _merit_affine(kind: MeritKind, d: int) -> tuple[float, float]:
    """merit = offset + slope * alpha^2."""
    offset = merit_of_depolarizing(kind, 0.0, d)
    return offset, merit_of_depolarizing(kind, 1.0, d) - offset


def _start_point(prob: _Problem) -> np.ndarray:
    d = prob.d
    x = np.array([1.0 / d**3, 0.0, 0.0, 0.0, 0.0])
    if d == 2:
        n = prob.eq[1]
        x = x - (n @ x) / (n @ n) * n
    return x


def _slacks(prob: _Problem, x: np.ndarray) -> np.ndarray:
    return np.append(prob.lin @ x, x @ prob.quad @ x)


def _barrier_derivs(prob: _Problem, x: np.ndarray):
    lin_vals = prob.lin @ x
    qx = prob.quad @ x
    q = x @ qx
    grad = -(prob.lin / lin_vals[:, None]).sum(axis=0) - 2 * qx / q
    hess = (prob.lin.T / lin_vals**2) @ prob.lin - 2 * prob.quad / q + 4 * np.outer(qx, qx) / q**2
    return grad, hess


def _centering(prob: _Problem, c: np.ndarray, x: np.ndarray, t: float) -> tuple[np.ndarray, int]:
    """Newton iterations for min -t c.x + barrier(x) on the equality plane.

    Steps are taken in the null space of the equality rows, so the equalities
    hold exactly however badly scaled the barrier Hessian becomes.
    """
    basis = prob.null_basis

    def f(y):
        return -t * c @ y - np.log(prob.lin @ y).sum() - math.log(y @ prob.quad @ y)

    steps = 0
    for steps in range(1, _NEWTON_CAP + 1):
        g, h = _barrier_derivs(prob, x)
        g = basis.T @ (g - t * c)
        h = basis.T @ h @ basis
        try:
            dy = -np.linalg.solve(h, g)
        except np.linalg.LinAlgError:
            dy = -np.linalg.lstsq(h, g, rcond=None)[0]
        decrement = float(-g @ dy)
        if not decrement > 2e-12:
            break
        dx = basis @ dy
        fx, step = f(x), 1.0
        while True:
            y = x + step * dx
            if np.all(_slacks(prob, y) > 0) and f(y) <= fx - 0.25 * step * decrement:
                break
            step *= 0.5
            if step < 1e-16:
                return x, steps
        x = y
    return x, steps


def _clip01(v: float) -> float:
    return min(1.0, max(0.0, float(v)))


def _result(prob: _Problem, kind: MeritKind, w: DirectionWeights, x: np.ndarray,
            iterations: int) -> OptimizerResult:
    d = prob.d
    offset, slope = _merit_affine(kind, d)
    m1, m2 = (float(v) for v in offset + slope * (prob.alpha_sq @ x))
    a = _coeffs(x, d)
    return OptimizerResult(
        value=float(w.z1 * m1 + w.z2 * m2),
        argmax_a=a,
        argmax_point=TradeoffPoint(_clip01(m1), _clip01(m2), kind),
        slacks=feasibility(a),
        iterations=iterations,
    )


def optimize_direction(w: DirectionWeights, kind: MeritKind, d: int,
                       cfg: OptimizerConfig = OptimizerConfig()) -> OptimizerResult:
    """Barrier maximization of z1 m(T1) + z2 m(T2) over symmetrized channels."""
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    prob = _problem(d)
    offset, slope = _merit_affine(kind, d)
    c = slope * (w.z1 * prob.alpha_sq[0] + w.z2 * prob.alpha_sq[1])
    n_ineq = len(prob.lin) + 2  # the second-order cone barrier has parameter 2
    x = _start_point(prob)
    t = 1.0
    total = 0
    for _ in range(cfg.barrier_iterations):
        x, steps = _centering(prob, c, x, t)
        total += steps
        if n_ineq / t <= cfg.tolerance:
            return _result(prob, kind, w, x, total)
        t *= cfg.barrier_t_growth
    best = _result(prob, kind, w, x, total)
    raise ConvergenceError(
        f"barrier gap {n_ineq / t:.3e} above tolerance {cfg.tolerance:.1e} "
        f"after {cfg.barrier_iterations} outer iterations (best value {best.value:.12g})", best)


def alpha_line_search(w: DirectionWeights, kind: MeritKind, d: int, n: int = 64) -> OptimizerResult:
    """Best point of the optimal one-parameter family, by grid then golden section in alpha1."""
    if w.z1 < 0 or w.z2 < 0 or (w.z1 == 0 and w.z2 == 0):
        raise ValueError(f"line search needs z1, z2 >= 0 and not both zero, got ({w.z1}, {w.z2})")
    if n < 3:
        raise ValueError("need at least three grid points")
    top = d * d / (d * d - 1)
    evals = 0

    def objective(alpha1: float) -> float:
        nonlocal evals
        evals += 1
        ch = cloner.from_alpha1(alpha1, d)
        m1, m2 = (merit_of_depolarizing(kind, min(s, top), d) for s in ch.alpha_sq)
        return w.z1 * m1 + w.z2 * m2

    lo, hi = cloner.alpha1_interval(d)
    grid = np.linspace(lo, hi, n)
    vals = np.array([objective(float(a)) for a in grid])
    k = int(np.argmax(vals))
    if 0 < k < n - 1 and vals[k] > max(vals[k - 1], vals[k + 1]):
        res = minimize_scalar(lambda a: -objective(a), bracket=(grid[k - 1], grid[k], grid[k + 1]),
                              method="golden", tol=1e-10)
    else:
        left, right = grid[max(k - 1, 0)], grid[min(k + 1, n - 1)]
        res = minimize_scalar(lambda a: -objective(a), bounds=(left, right), method="bounded",
                              options={"xatol": 1e-10})
    best = float(res.x) if -res.fun >= vals[k] else float(grid[k])
    ch = cloner.from_alpha1(min(max(best, lo), hi), d)
    a = cloner.perm_coeffs(ch)
    m1, m2 = (merit_of_depolarizing(kind, min(s, top), d) for s in ch.alpha_sq)
    return OptimizerResult(
        value=float(w.z1 * m1 + w.z2 * m2),
        argmax_a=a,
        argmax_point=TradeoffPoint(_clip01(m1), _clip01(m2), kind),
        slacks=feasibility(a),
        iterations=evals,
    )


def verify_sdp_block(a: PermCoeffs, alphas: tuple[float, float], d: int) -> BlockReport:
    """Slack of every direct summand of the semidefinite constraint.

    The 2x2 block is [[s0 + s3, s1 + i s2], [s1 - i s2, s0 - s3]]; it is PSD
    iff its trace and determinant are nonnegative.
    """
    s = a_to_s(a)
    top = d * d / (d * d - 1)
    a1sq, a2sq = (float(x) ** 2 for x in alphas)
    slacks = {
        "s_plus": s.s_plus,
        "s_minus": s.s_minus,
        "block_trace": 2 * s.s0,
        "block_det": s.cone_gap(),
        "alpha1_sq_low": a1sq,
        "alpha1_sq_high": top - a1sq,
        "alpha2_sq_low": a2sq,
        "alpha2_sq_high": top - a2sq,
    }
    vacuous = frozenset({"s_minus"}) if d == 2 else frozenset()
    return BlockReport(slacks, vacuous)
