"""Invariant checks run by ``qclone verify``.

Every check reports a nonnegative residual and passes when the residual does
not exceed its tolerance. Counting checks (e.g. hard disagreements) use a
tolerance of zero.
"""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import channels, cloner, optimizer, symmetry, tradeoff
from .channels import ChoiChannel, choi_of, random_channel, random_pure_state
from .symmetry import PermCoeffs
from .tensor import DenseOperator, as_rng

__all__ = [
    "CheckResult",
    "run_checks",
    "random_hermitian_coeffs",
    "cp_verdicts",
    "witness_battery",
    "probe_states",
    "twirl_distances",
]


@dataclass(frozen=True)
class CheckResult:
    name: str
    d: int
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tol)

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return (f"check={self.name} d={self.d} status={status} "
                f"residual={self.residual:.3e} tol={self.tol:.1e}")


# ---- shared helpers, also used by the test suite ----

def random_hermitian_coeffs(d: int, rng, spread: float = 1.0) -> PermCoeffs:
    """Hermitian coefficients with Tr[tau] = 1, scattered around the optimal family.

    The scatter straddles the CP boundary, so both verdicts occur often.
    """
    rng = as_rng(rng)
    lo, hi = cloner.alpha1_interval(d)
    base = cloner.perm_coeffs(cloner.from_alpha1(float(rng.uniform(lo, hi)), d)).as_array()
    noise = rng.normal(size=6) * spread / d**3
    a = base + noise
    a[4] = a[4] + 1j * rng.normal() * spread / d**3
    a[5] = np.conj(a[4])
    coeffs = PermCoeffs(tuple(a.real[:4]) + (a[4], a[5]), d)
    norm = coeffs.normalization()
    if abs(norm) < 1e-3:
        return random_hermitian_coeffs(d, rng, spread)
    return PermCoeffs(tuple(coeffs.as_array() / abs(norm)), d)


def cp_verdicts(a: PermCoeffs, band: float = 1e-8) -> tuple[bool, bool, bool]:
    """(scalar-criteria verdict, eigenvalue verdict, near-boundary flag)."""
    report = symmetry.feasibility(a, tol=0.0)
    min_eig = float(np.linalg.eigvalsh(symmetry.reconstruct(a).mat).min())
    trace_ok = abs(report.normalization_residual) <= 1e-9
    # the trace condition is an equality; judge it on its own tolerance, not the band
    ineq = [v for k, v in report.slacks.items() if k != "normalization" and k not in report.vacuous]
    near = abs(min_eig) <= band or min(abs(v) for v in ineq) <= band
    return min(ineq) >= 0.0 and trace_ok, (min_eig >= 0.0) and trace_ok, near


def probe_states(d: int, rng=None, n_random: int = 20) -> list[DenseOperator]:
    """Computational basis, the uniform superposition, Fourier states and random pure states."""
    rng = as_rng(rng)
    out = [DenseOperator.ket(np.eye(d)[i]) for i in range(d)]
    omega = np.exp(2j * np.pi / d)
    for k in range(d):
        out.append(DenseOperator.ket(omega ** (k * np.arange(d)) / math.sqrt(d)))
    out += [random_pure_state(d, rng) for _ in range(n_random)]
    return out


def _basis_copier(d: int) -> ChoiChannel:
    """Measure in the computational basis and prepare two copies of the outcome."""
    def transform(x):
        out = np.zeros((d * d, d * d), dtype=complex)
        for i in range(d):
            out[i * d + i, i * d + i] = x[i, i]
        return out

    return choi_of(transform, d, (d, d))


def witness_battery(d: int, rng=None, n_random: int = 10) -> dict[str, ChoiChannel]:
    """CPTP 1->2 channels of several kinds for the no-cloning check."""
    rng = as_rng(rng)
    battery = {f"optimal(alpha1={a:.3f})": cloner.build(ch)
               for a, ch in ((c.alpha1, c) for c in cloner.alpha1_sweep(d, 7))}
    for alpha in (0.0, 0.5, 1.0):
        battery[f"trivial(alpha={alpha})"] = cloner.trivial(alpha, d)
    battery["basis_copier"] = _basis_copier(d)
    for i in range(n_random):
        battery[f"random_{i}"] = random_channel(d, rng=rng)
    return battery


def twirl_distances(ch: ChoiChannel, checkpoints, rng) -> list[tuple[int, float]]:
    """Frobenius distance of the running Monte Carlo twirl to the exact projection."""
    d = ch.input_dim
    exact = symmetry.project_to_commutant(ch.choi, d).mat
    _, snaps = channels.twirl_mc(ch, max(checkpoints), rng=rng, checkpoints=checkpoints)
    return [(n, float(np.linalg.norm(s.choi.mat - exact))) for n, s in snaps]


def log_checkpoints(n: int, per_decade: int = 4) -> list[int]:
    n_decades = math.log10(max(n, 1))
    pts = np.unique(np.round(np.logspace(0, n_decades, int(per_decade * n_decades) + 1)).astype(int))
    return sorted(set(int(p) for p in pts) | {n})


# ---- individual checks: each returns (residual, tolerance) ----

def _lambda_closed(d, rng, n):
    worst = 0.0
    for _ in range(n):
        z = tradeoff.DirectionWeights(*rng.normal(size=2))
        ev = float(np.linalg.eigvalsh(tradeoff.h_z(z, d).mat).max())
        worst = max(worst, abs(ev - tradeoff.lambda_max_closed(z, d)))
    return worst, 1e-9


def _boundary_g(d, rng, n):
    pts = [cloner.marginal_fidelities(ch) for ch in cloner.alpha1_sweep(d, 200)]
    return max(abs(tradeoff.boundary_g(x1, x2, d)) for x1, x2 in pts), 1e-10


def _extreme_points(d, rng, n):
    lo, hi = cloner.alpha1_interval(d)
    c = (d * d - 1) / (d * d)
    expect = {lo: (c, 0.0), 0.0: (1.0, 1 / d**2), 1.0: (1 / d**2, 1.0), hi: (0.0, c)}
    worst = 0.0
    for a, ref in expect.items():
        got = cloner.marginal_fidelities(cloner.from_alpha1(a, d))
        worst = max(worst, *(abs(g - r) for g, r in zip(got, ref)))
    return worst, 1e-12


def _fk_consistency(d, rng, n):
    top = d * d / (d * d - 1)
    worst = 0.0
    for kind in tradeoff.MeritKind:
        for a2 in np.linspace(0.0, top, 101):
            m = tradeoff.merit_of_depolarizing(kind, a2, d)
            f = tradeoff.merit_of_depolarizing(tradeoff.MeritKind.F, a2, d)
            worst = max(worst, abs(tradeoff.f_map(kind, m, d) - f))
    return worst, 1e-12


def _merit_numeric(d, rng, n):
    worst = 0.0
    for a1 in (0.2, 0.7):
        ch = cloner.from_alpha1(a1, d)
        tau = cloner.build(ch)
        for i, a_sq in zip((1, 2), ch.alpha_sq):
            marg = channels.marginal(tau, i)
            for kind in (tradeoff.MeritKind.ONE, tradeoff.MeritKind.TWO, tradeoff.MeritKind.INF):
                got = tradeoff.merit_numeric(kind, marg, n_probes=n, rng=rng)
                worst = max(worst, abs(got - tradeoff.merit_of_depolarizing(kind, a_sq, d)))
    return worst, 1e-9


def _cloner_cptp(d, rng, n):
    worst = 0.0
    for ch in cloner.alpha1_sweep(d, 11):
        tau = cloner.build(ch)
        worst = max(worst, tau.cp_error(), tau.tp_error(),
                    float(np.abs(symmetry.reconstruct(cloner.perm_coeffs(ch)).mat - tau.choi.mat).max()))
    return worst, 1e-9


def _covariance(d, rng, n):
    tau = cloner.build(cloner.from_alpha1(0.4, d))
    return max(channels.covariance_residual(channels.marginal(tau, i), 20, rng) for i in (1, 2)), 1e-12


def _cp_criteria(d, rng, n):
    hard = 0
    for _ in range(n):
        crit, eig, near = cp_verdicts(random_hermitian_coeffs(d, rng))
        hard += int(crit != eig and not near)
    return float(hard), 0.0


def _optimizer(d, rng, n):
    worst = 0.0
    for _ in range(n):
        z = tradeoff.DirectionWeights(*rng.uniform(0.05, 1.0, 2))
        lam = tradeoff.lambda_max_closed(z, d)
        res = optimizer.optimize_direction(z, tradeoff.MeritKind.F, d)
        line = optimizer.alpha_line_search(z, tradeoff.MeritKind.F, d)
        worst = max(worst, abs(res.value - lam), abs(line.value - lam), -res.slacks.min_slack)
    return worst, 1e-6


def _membership(d, rng, n):
    bad = 0
    for kind in tradeoff.MeritKind:
        for p in tradeoff.corner_points(kind, d):
            bad += int(not tradeoff.membership(p, d))
        bad += int(not tradeoff.membership(tradeoff.TradeoffPoint(0.0, 0.0, kind), d))
    bad += int(tradeoff.membership(tradeoff.TradeoffPoint(1.0, 1 / d**2 + 0.01), d))
    return float(bad), 0.0


def _no_cloning(d, rng, n):
    probes = probe_states(d, rng)
    margin = min(channels.cloning_witness(ch, probes) for ch in witness_battery(d, rng).values())
    return max(0.0, 0.01 - margin), 0.0


def _twirl(samples: int, tol: float):
    def check(d, rng, n):
        ch = random_channel(d, rng=rng)
        dist = twirl_distances(ch, [samples], rng)[-1][1]
        return dist, tol
    return check


Check = Callable[[int, np.random.Generator, int], tuple[float, float]]


def _suite(level: str) -> list[tuple[str, Check, int, tuple[int, ...] | None]]:
    """(name, check, size, restricted d-set or None)."""
    deep = level == "deep"
    return [
        ("lambda_max_closed_vs_eigh", _lambda_closed, 500 if deep else 100, None),
        ("boundary_g_on_sweep", _boundary_g, 200, None),
        ("extreme_points", _extreme_points, 0, None),
        ("fk_consistency", _fk_consistency, 0, None),
        ("merit_numeric_vs_closed", _merit_numeric, 500 if deep else 100, None),
        ("cloner_cptp_and_expansion", _cloner_cptp, 0, None),
        ("marginal_covariance", _covariance, 0, None),
        ("cp_criteria_hard_disagreements", _cp_criteria, 1000 if deep else 200, None),
        ("optimizer_vs_closed_form", _optimizer, 20 if deep else 5, None),
        ("membership_anchors", _membership, 0, None),
        ("no_cloning_margin_shortfall", _no_cloning, 0, None),
        ("twirl_distance", _twirl(5000, 0.05) if deep else _twirl(1000, 0.05), 0, (2,)),
    ]


def run_checks(d_list, level: str = "quick", seed: int = 0, tol_override: float | None = None,
               on_result: Callable[[CheckResult], None] | None = None) -> list[CheckResult]:
    if level not in ("quick", "deep"):
        raise ValueError(f"level must be 'quick' or 'deep', got {level!r}")
    results = []
    for d in d_list:
        for name, check, size, only in _suite(level):
            if only is not None and d not in only:
                continue
            rng = np.random.default_rng([seed, d, zlib.crc32(name.encode())])
            residual, tol = check(d, rng, size)
            res = CheckResult(name, d, float(residual), tol if tol_override is None else tol_override)
            results.append(res)
            if on_result is not None:
                on_result(res)
    return results
