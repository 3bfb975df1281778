"""Achievable single-clone quality pairs for five figures of merit.

The fidelity region is described two ways: by its support function
``lambda_max(H_z)`` and by the curve ``g(x1, x2) = 0``. The other merits are
affine reparametrizations of the fidelity on depolarizing marginals, so their
regions are convex hulls of the mapped curve, the two corner points and the
origin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import minimize_scalar

from . import cloner
from .channels import ChoiChannel, apply, random_pure_state
from .tensor import DenseOperator, as_rng, max_entangled, perm_operator, Permutation3

__all__ = [
    "MeritKind",
    "TradeoffPoint",
    "DirectionWeights",
    "merit_of_depolarizing",
    "merit_numeric",
    "h_z",
    "lambda_max_closed",
    "boundary_g",
    "f_map",
    "f_inverse",
    "corner_points",
    "membership",
    "sample_boundary",
    "region_polygon",
    "symmetric_alpha1",
    "MEMBERSHIP_DIRECTIONS",
    "HULL_TOL",
]

MEMBERSHIP_DIRECTIONS = 720
SUPPORT_TOL = 1e-9
# inscribed-polygon sag for the mapped curve, see region_polygon()
HULL_TOL = 1e-6
_HULL_SAMPLES = 2001


class MeritKind(Enum):
    F = "F"
    ONE = "1"
    TWO = "2"
    INF = "inf"
    DIAMOND = "diamond"

    @classmethod
    def parse(cls, text: str) -> "MeritKind":
        key = str(text).strip().lower()
        aliases = {
            "f": cls.F, "fidelity": cls.F,
            "1": cls.ONE, "one": cls.ONE, "trace": cls.ONE,
            "2": cls.TWO, "two": cls.TWO, "frobenius": cls.TWO,
            "inf": cls.INF, "infinity": cls.INF, "operator": cls.INF,
            "diamond": cls.DIAMOND, "dia": cls.DIAMOND,
        }
        if key not in aliases:
            raise ValueError(f"unknown merit {text!r}; choose from F, one, two, inf, diamond")
        return aliases[key]

    @property
    def label(self) -> str:
        return {"F": "F", "1": "1", "2": "2", "inf": "inf", "diamond": "diamond"}[self.value]


@dataclass(frozen=True)
class TradeoffPoint:
    x1: float
    x2: float
    kind: MeritKind = MeritKind.F

    def __post_init__(self):
        for x in (self.x1, self.x2):
            if not -1e-12 <= x <= 1 + 1e-12:
                raise ValueError(f"merit values live in [0, 1], got ({self.x1}, {self.x2})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2])


@dataclass(frozen=True)
class DirectionWeights:
    z1: float
    z2: float

    @classmethod
    def positive(cls, v: float, b: float = 1.0) -> "DirectionWeights":
        """b (v, 1 - v): the directions with z1 + z2 = b > 0."""
        return cls(b * v, b * (1 - v))

    @classmethod
    def negative(cls, v: float, b: float = 1.0) -> "DirectionWeights":
        """b (-v, v - 1): the directions with z1 + z2 = -b < 0."""
        return cls(-b * v, b * (v - 1))

    @classmethod
    def ray(cls, v: float) -> "DirectionWeights":
        """(v, -v): the directions with z1 + z2 = 0."""
        return cls(v, -v)

    def as_array(self) -> np.ndarray:
        return np.array([self.z1, self.z2], dtype=float)


def _alpha_sq_max(d: int) -> float:
    return d * d / (d * d - 1)


def merit_of_depolarizing(kind: MeritKind, alpha_sq: float, d: int) -> float:
    """Merit of rho -> alpha_sq 1/d + (1 - alpha_sq) rho."""
    if not -1e-12 <= alpha_sq <= _alpha_sq_max(d) + 1e-12:
        raise ValueError(f"alpha^2={alpha_sq} outside [0, {_alpha_sq_max(d):.6g}] for d={d}")
    if kind in (MeritKind.F, MeritKind.DIAMOND):
        return 1.0 - alpha_sq * (d * d - 1) / (d * d)
    if kind in (MeritKind.ONE, MeritKind.INF):
        return 1.0 - alpha_sq * (d - 1) / d
    if kind is MeritKind.TWO:
        return 1.0 - alpha_sq * math.sqrt((d - 1) / d)
    raise ValueError(kind)


def _trace_norm(h: np.ndarray) -> float:
    return float(np.abs(np.linalg.eigvalsh(h)).sum())


def merit_numeric(kind: MeritKind, marginal: ChoiChannel, n_probes: int = 500, rng=None,
                  probes=None) -> float:
    """Merit of a channel M_d -> M_d evaluated from its Choi state.

    Fidelity and diamond merits are read off the Choi state directly. The
    other three take the worst case over ``n_probes`` Haar-random pure inputs
    plus any explicit ``probes``.
    """
    if marginal.n_outputs != 1 or marginal.output_dims[0] != marginal.input_dim:
        raise ValueError("merit needs a channel M_d -> M_d")
    d = marginal.input_dim
    tau = marginal.choi.mat
    omega = max_entangled(d).mat
    if kind is MeritKind.F:
        return float(np.real(np.trace(omega @ tau)))
    if kind is MeritKind.DIAMOND:
        diff = tau - omega
        return 1.0 - 0.5 * _trace_norm(0.5 * (diff + diff.conj().T))

    rng = as_rng(rng)
    states = [random_pure_state(d, rng) for _ in range(n_probes)]
    states += list(probes or ())
    if not states:
        raise ValueError("need at least one probe state")
    worst = 0.0
    for rho in states:
        diff = apply(marginal, rho).mat - rho.mat
        diff = 0.5 * (diff + diff.conj().T)
        if kind is MeritKind.ONE:
            val = 0.5 * _trace_norm(diff)
        elif kind is MeritKind.TWO:
            val = float(np.linalg.norm(diff))
        else:
            val = float(np.abs(np.linalg.eigvalsh(diff)).max())
        worst = max(worst, val)
    return 1.0 - worst


def h_z(w: DirectionWeights, d: int) -> DenseOperator:
    """z1 |Omega><Omega|_01 x 1_2 + z2 |Omega><Omega|_02 x 1_1, factor order (0, 1, 2)."""
    p01 = np.kron(max_entangled(d).mat, np.eye(d))
    swap12 = perm_operator(Permutation3.cycle(1, 2), d).mat
    p02 = swap12 @ p01 @ swap12
    return DenseOperator(w.z1 * p01 + w.z2 * p02, (d, d, d))


def _lambda_unit_sum(v: float, d: int) -> float:
    return (d + math.sqrt(d * d + 4 * (d * d - 1) * (v - 1) * v)) / (2 * d)


def _lambda_neg_unit_sum(v: float, d: int) -> float:
    if 0.0 <= v <= 1.0:
        return 0.0
    return (-d + math.sqrt(d * d + 4 * (d * d - 1) * (v - 1) * v)) / (2 * d)


def lambda_max_closed(w: DirectionWeights, d: int) -> float:
    """Largest eigenvalue of H_z from the closed forms.

    z is split as b (v, 1-v) when z1 + z2 > 0, b (-v, v-1) when z1 + z2 < 0,
    or (v, -v) on the ray z1 + z2 = 0, using lambda(H_{bz}) = b lambda(H_z).
    """
    z1, z2 = float(w.z1), float(w.z2)
    s = z1 + z2
    if s > 0:
        b = s
        return b * _lambda_unit_sum(z1 / b, d)
    if s < 0:
        b = -s
        return b * _lambda_neg_unit_sum(-z1 / b, d)
    return abs(z1) * math.sqrt((d * d - 1) / (d * d))


def boundary_g(x1: float, x2: float, d: int) -> float:
    """Zero on the outer boundary of the fidelity region, negative inside."""
    if x1 < -1e-12 or x2 < -1e-12:
        raise ValueError(f"boundary_g needs nonnegative arguments, got ({x1}, {x2})")
    r1, r2 = math.sqrt(max(x1, 0.0)), math.sqrt(max(x2, 0.0))
    return (r1 + r2) ** 2 / (d + 1) + (r1 - r2) ** 2 / (d - 1) - 2.0 / d


def f_map(kind: MeritKind, x: float, d: int) -> float:
    """Fidelity value equivalent to merit value ``x`` on depolarizing marginals."""
    if kind in (MeritKind.F, MeritKind.DIAMOND):
        return x
    if kind in (MeritKind.ONE, MeritKind.INF):
        return 1 + (1 + d) / d * (x - 1)
    if kind is MeritKind.TWO:
        return 1 + (d * d - 1) / (d * d) * math.sqrt(d / (d - 1)) * (x - 1)
    raise ValueError(kind)


def _f_slope(kind: MeritKind, d: int) -> float:
    return f_map(kind, 1.0, d) - f_map(kind, 0.0, d)


def f_inverse(kind: MeritKind, fidelity: float, d: int) -> float:
    return 1 + (fidelity - 1) / _f_slope(kind, d)


def corner_points(kind: MeritKind, d: int) -> tuple[TradeoffPoint, TradeoffPoint]:
    """The two points where one clone is perfect and the other fully depolarized."""
    if kind in (MeritKind.F, MeritKind.DIAMOND):
        low = 1.0 / (d * d)
    elif kind in (MeritKind.ONE, MeritKind.INF):
        low = 1.0 / d
    else:
        low = 1.0 - math.sqrt((d - 1) / d)
    return TradeoffPoint(1.0, low, kind), TradeoffPoint(low, 1.0, kind)


def _curve_point(kind: MeritKind, alpha1: float, d: int) -> np.ndarray:
    ch = cloner.from_alpha1(alpha1, d)
    if kind in (MeritKind.F, MeritKind.DIAMOND):
        return np.array(cloner.marginal_fidelities(ch))
    top = _alpha_sq_max(d)
    return np.array([merit_of_depolarizing(kind, min(a, top), d) for a in ch.alpha_sq])


def symmetric_alpha1(d: int) -> float:
    """alpha1 = alpha2 on the optimal family."""
    return 1.0 / math.sqrt(2.0 + 2.0 / d)


def _hull_alpha_start(kind: MeritKind, d: int) -> float:
    """Smallest alpha1 whose mapped curve point lies on the region's hull.

    For the fidelity the whole curve does. For the affinely shifted merits the
    ends of the curve fall inside the hull; the hull leaves the curve where the
    polar angle seen from the origin is smallest.
    """
    lo, _ = cloner.alpha1_interval(d)
    if kind in (MeritKind.F, MeritKind.DIAMOND):
        return lo

    def angle(a):
        p = _curve_point(kind, a, d)
        return math.atan2(p[1], p[0])

    res = minimize_scalar(angle, bounds=(lo, 0.0), method="bounded", options={"xatol": 1e-13})
    return float(res.x)


def _curve(kind: MeritKind, d: int, n: int) -> np.ndarray:
    """n points of the outer curve, symmetric under swapping the clones.

    The half with x1 >= x2 is swept in alpha1; the other half is its mirror
    image, so odd ``n`` hits the symmetric point exactly.
    """
    a0, a_sym = _hull_alpha_start(kind, d), symmetric_alpha1(d)
    ts = np.linspace(-1.0, 1.0, n)
    pts = np.empty((n, 2))
    for i, t in enumerate(ts):
        a = a0 + (1.0 - abs(t)) * (a_sym - a0)
        p = _curve_point(kind, float(a), d)
        pts[i] = p if t <= 0 else p[::-1]
    return np.clip(pts, 0.0, 1.0)


def sample_boundary(kind: MeritKind, d: int, n: int) -> list[TradeoffPoint]:
    """``n`` points along the curved outer boundary, from the x1 axis side to the x2 side."""
    if n < 2:
        raise ValueError("need n >= 2 boundary points")
    return [TradeoffPoint(float(x1), float(x2), kind) for x1, x2 in _curve(kind, d, n)]


def region_polygon(kind: MeritKind, d: int, n: int = _HULL_SAMPLES) -> np.ndarray:
    """Counter-clockwise vertices of the region: the origin, then the outer curve."""
    return np.vstack([[0.0, 0.0], _curve(kind, d, n)])


def _support_violation(x: np.ndarray, d: int) -> float:
    """max_z (z.x - lambda_max(H_z)) over unit directions, grid plus local refinement."""

    def phi(theta):
        z = DirectionWeights(math.cos(theta), math.sin(theta))
        return z.z1 * x[0] + z.z2 * x[1] - lambda_max_closed(z, d)

    thetas = np.linspace(0.0, 2 * math.pi, MEMBERSHIP_DIRECTIONS, endpoint=False)
    vals = np.array([phi(t) for t in thetas])
    k = int(np.argmax(vals))
    step = 2 * math.pi / MEMBERSHIP_DIRECTIONS
    res = minimize_scalar(lambda t: -phi(t), bounds=(thetas[k] - step, thetas[k] + step),
                          method="bounded", options={"xatol": 1e-12})
    return max(float(vals[k]), -float(res.fun))


def _polygon_violation(x: np.ndarray, poly: np.ndarray) -> float:
    """Largest signed distance of ``x`` outside the convex ccw polygon."""
    a = poly
    b = np.roll(poly, -1, axis=0)
    edge = b - a
    length = np.linalg.norm(edge, axis=1)
    ok = length > 0
    cross = edge[ok, 0] * (x[1] - a[ok, 1]) - edge[ok, 1] * (x[0] - a[ok, 0])
    return float((-cross / length[ok]).max())


def membership(p: TradeoffPoint, d: int) -> bool:
    x = p.as_array()
    if p.kind is MeritKind.F:
        if x.min() < -SUPPORT_TOL:
            return False
        return _support_violation(x, d) <= SUPPORT_TOL
    return _polygon_violation(x, _cached_polygon(p.kind, d)) <= HULL_TOL


_POLYGONS: dict[tuple[MeritKind, int], np.ndarray] = {}


def _cached_polygon(kind: MeritKind, d: int) -> np.ndarray:
    key = (kind, d)
    if key not in _POLYGONS:
        _POLYGONS[key] = region_polygon(kind, d)
    return _POLYGONS[key]
