"""Choi states of unitarily symmetrized 1->2 channels in the permutation basis.

A symmetrized Choi state satisfies ``tau^{t_0} = sum_pi a_pi V_pi`` over the six
permutations of three factors. The coefficients are kept in the order

    a1: identity, a2: (01), a3: (02), a4: (12), a5: (012), a6: (210)

where ``(012)`` sends 0 -> 1 -> 2 -> 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import DenseOperator, Permutation3, partial_transpose, perm_operator

__all__ = [
    "PERMUTATIONS",
    "PermCoeffs",
    "SBasisCoords",
    "FeasibilityReport",
    "NotInCommutantError",
    "gram_matrix",
    "expand_in_perm_basis",
    "reconstruct",
    "a_to_s",
    "eggeling_werner_basis",
    "s_from_state",
    "feasibility",
    "project_to_commutant",
    "FEASIBILITY_TOL",
]

PERMUTATIONS = (
    Permutation3.identity(),
    Permutation3.cycle(0, 1),
    Permutation3.cycle(0, 2),
    Permutation3.cycle(1, 2),
    Permutation3.cycle(0, 1, 2),
    Permutation3.cycle(0, 2, 1),
)

FEASIBILITY_TOL = 1e-9
EXPANSION_RESIDUAL_LIMIT = 1e-6


class NotInCommutantError(ValueError):
    def __init__(self, residual: float):
        super().__init__(f"operator is not in the permutation span (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class PermCoeffs:
    coeffs: tuple[complex, ...]
    dim: int

    def __post_init__(self):
        c = tuple(complex(x) for x in self.coeffs)
        if len(c) != 6:
            raise ValueError(f"need six coefficients, got {len(c)}")
        if self.dim < 2:
            raise ValueError(f"dimension must be >= 2, got {self.dim}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_values(cls, a1, a2, a3, a4, a5, a6=None, *, dim: int) -> "PermCoeffs":
        """a6 defaults to conj(a5), the hermitian case."""
        if a6 is None:
            a6 = np.conj(a5)
        return cls((a1, a2, a3, a4, a5, a6), dim)

    @classmethod
    def maximally_mixed(cls, d: int) -> "PermCoeffs":
        return cls((1 / d**3, 0, 0, 0, 0, 0), d)

    def as_array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=complex)

    a1 = property(lambda self: self.coeffs[0])
    a2 = property(lambda self: self.coeffs[1])
    a3 = property(lambda self: self.coeffs[2])
    a4 = property(lambda self: self.coeffs[3])
    a5 = property(lambda self: self.coeffs[4])
    a6 = property(lambda self: self.coeffs[5])

    def hermiticity_error(self) -> float:
        a = self.as_array()
        return float(max(np.abs(a[:4].imag).max(), abs(a[4] - np.conj(a[5]))))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return self.hermiticity_error() <= tol

    def normalization(self) -> float:
        """Tr[tau]; equals 1 for a trace-preserving channel."""
        a1, a2, a3, a4, a5, a6 = self.coeffs
        d = self.dim
        return float((a1 * d**3 + (a2 + a3 + a4) * d**2 + (a5 + a6) * d).real)

    def marginal_alpha_sq(self) -> tuple[float, float]:
        """Depolarizing weights of the two marginals (clone 1, clone 2)."""
        a1, a2, a3, a4, _, _ = (c.real for c in self.coeffs)
        d = self.dim
        return (a1 * d**3 + a3 * d**2 + a4 * d**2, a1 * d**3 + a2 * d**2 + a4 * d**2)


@dataclass(frozen=True)
class SBasisCoords:
    s_plus: float
    s_minus: float
    s0: float
    s1: float
    s2: float
    s3: float

    def as_tuple(self) -> tuple[float, ...]:
        return (self.s_plus, self.s_minus, self.s0, self.s1, self.s2, self.s3)

    def total(self) -> float:
        return self.s_plus + self.s_minus + self.s0

    def cone_gap(self) -> float:
        return self.s0**2 - self.s1**2 - self.s2**2 - self.s3**2


@dataclass(frozen=True)
class FeasibilityReport:
    """Slack of every CP/TP condition on the permutation coefficients.

    ``normalization_residual`` is Tr[tau] - 1; its slack is ``-|residual|``.
    Conditions listed in ``vacuous`` hold identically and never reject.
    """

    slacks: dict[str, float]
    normalization_residual: float
    vacuous: frozenset = field(default_factory=frozenset)
    tol: float = FEASIBILITY_TOL

    @property
    def feasible(self) -> bool:
        return all(v >= -self.tol for k, v in self.slacks.items() if k not in self.vacuous)

    @property
    def min_slack(self) -> float:
        return min(v for k, v in self.slacks.items() if k not in self.vacuous)

    def violated(self) -> list[str]:
        return [k for k, v in self.slacks.items() if k not in self.vacuous and v < -self.tol]


def gram_matrix(d: int) -> np.ndarray:
    """G[p, q] = Tr[V_p^dag V_q] = d ** cycles(p^-1 q)."""
    return np.array([[float(d) ** (p.inverse() * q).n_cycles() for q in PERMUTATIONS]
                     for p in PERMUTATIONS])


def _perm_ops(d: int) -> list[np.ndarray]:
    return [perm_operator(p, d).mat.real for p in PERMUTATIONS]


def _solve_gram(d: int, overlaps: np.ndarray) -> np.ndarray:
    g = gram_matrix(d)
    if d == 2:
        # the six operators are linearly dependent on three qubits
        # (no antisymmetric subspace); take the minimum-norm solution
        return np.linalg.lstsq(g, overlaps, rcond=1e-12)[0]
    return np.linalg.solve(g, overlaps)


def _check_three_factors(tau: DenseOperator, d: int):
    if tau.dims != (d, d, d):
        raise ValueError(f"expected an operator on (C^{d})^x3, got dims {tau.dims}")


def expand_in_perm_basis(tau: DenseOperator, d: int) -> PermCoeffs:
    _check_three_factors(tau, d)
    t0 = partial_transpose(tau, 0).mat
    ops = _perm_ops(d)
    overlaps = np.array([np.trace(v.T @ t0) for v in ops])
    a = _solve_gram(d, overlaps)
    approx = sum(c * v for c, v in zip(a, ops))
    residual = float(np.abs(approx - t0).max())
    if residual > EXPANSION_RESIDUAL_LIMIT:
        raise NotInCommutantError(residual)
    return PermCoeffs(tuple(a), d)


def reconstruct(a: PermCoeffs) -> DenseOperator:
    """Choi state from its permutation coefficients, term by term.

    tau = a1 1 + a2 d |Omega><Omega|_01 x 1_2 + a3 d |Omega><Omega|_02 x 1_1
          + a4 1_0 x F_12 + a5 sum_ijk |jjk><iki| + a6 sum_ijk |kjk><iij|
    """
    d = a.dim
    D = d**3
    a1, a2, a3, a4, a5, a6 = a.coeffs
    t = np.zeros((d,) * 6, dtype=complex)
    r = np.arange(d)
    i, j, k = np.meshgrid(r, r, r, indexing="ij")
    # index layout: t[ket0, ket1, ket2, bra0, bra1, bra2]
    t[i, j, k, i, j, k] += a1
    t[j, j, k, i, i, k] += a2  # d |Omega><Omega|_01 = sum |jj><ii|
    t[j, k, j, i, k, i] += a3
    t[i, k, j, i, j, k] += a4
    t[j, j, k, i, k, i] += a5
    t[k, j, k, i, i, j] += a6
    return DenseOperator(t.reshape(D, D), (d, d, d))


def a_to_s(a: PermCoeffs) -> SBasisCoords:
    d = a.dim
    a1, a2, a3, a4, a5, a6 = a.coeffs
    r = np.sqrt(d * d - 1)
    s_plus = (a1 + a4) * 0.5 * d * (d + 2) * (d - 1)
    s_minus = (a1 - a4) * 0.5 * d * (d - 2) * (d + 1)
    s0 = 2 * d * a1 + d * d * (a2 + a3) + d * (a5 + a6)
    s1 = d * (a2 + a3) + 2 * d * a4 + d * d * (a5 + a6)
    s2 = d * r * (a2 - a3)
    s3 = 1j * d * r * (a6 - a5)
    return SBasisCoords(*(float(np.real(x)) for x in (s_plus, s_minus, s0, s1, s2, s3)))


def eggeling_werner_basis(d: int) -> dict[str, DenseOperator]:
    """X = V_(01)^{t_0}, V = V_(12) and the six operators S_+, S_-, S_0..S_3."""
    dims = (d, d, d)
    one = np.eye(d**3)
    x = partial_transpose(perm_operator(PERMUTATIONS[1], d), 0).mat
    v = perm_operator(PERMUTATIONS[3], d).mat
    vxv = v @ x @ v
    sym, anti = (one + v) / 2, (one - v) / 2
    r = np.sqrt(d * d - 1)
    ops = {
        "X": x,
        "V": v,
        "S_plus": sym @ (one - 2 * x / (d + 1)) @ sym,
        # the d - 1 denominator only meets the zero operator at d = 2
        "S_minus": anti @ (one - 2 * x / (d - 1)) @ anti if d > 2 else np.zeros_like(one),
        "S0": (d * (x + vxv) - (x @ v + v @ x)) / (d * d - 1),
        "S1": (d * (x @ v + v @ x) - (x + vxv)) / (d * d - 1),
        "S2": (x - vxv) / r,
        "S3": 1j * (x @ v - v @ x) / r,
    }
    return {k: DenseOperator(m, dims) for k, m in ops.items()}


def s_from_state(tau: DenseOperator, d: int) -> SBasisCoords:
    """s_k = Tr[tau S_k] computed directly from matrices."""
    basis = eggeling_werner_basis(d)
    vals = [np.trace(tau.mat @ basis[k].mat).real
            for k in ("S_plus", "S_minus", "S0", "S1", "S2", "S3")]
    return SBasisCoords(*(float(x) for x in vals))


def feasibility(a: PermCoeffs, d: int | None = None, tol: float = FEASIBILITY_TOL) -> FeasibilityReport:
    d = a.dim if d is None else d
    if d != a.dim:
        raise ValueError(f"coefficients are for d={a.dim}, asked about d={d}")
    a1, a2, a3, a4, a5, a6 = a.coeffs
    cone = (-(a2 + a4) * (a3 + a4) + (a1 + a5) * (a1 + a6)
            + (a1 * (a2 + a3) - a4 * (a5 + a6)) * d + (a2 * a3 - a5 * a6) * d * d)
    residual = a.normalization() - 1.0
    slacks = {
        "sym_weight": float(np.real(a1 + a4)),
        "antisym_weight": float(np.real((a1 - a4) * 0.5 * d * (d - 2) * (d + 1))),
        "mixed_weight": float(np.real(2 * a1 + (a2 + a3) * d + a5 + a6)),
        "normalization": -abs(residual),
        "cone": float(np.real(cone)),
    }
    vacuous = frozenset({"antisym_weight"}) if d == 2 else frozenset()
    return FeasibilityReport(slacks, residual, vacuous, tol)


def project_to_commutant(tau: DenseOperator, d: int) -> DenseOperator:
    """Frobenius-orthogonal projection of tau^{t_0} onto span{V_pi}, transposed back."""
    _check_three_factors(tau, d)
    t0 = partial_transpose(tau, 0).mat
    ops = _perm_ops(d)
    overlaps = np.array([np.trace(v.T @ t0) for v in ops])
    c = _solve_gram(d, overlaps)
    proj = sum(ci * v for ci, v in zip(c, ops))
    return partial_transpose(DenseOperator(proj, (d, d, d)), 0)
