"""Property tests for the structural invariants."""
import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from qclone import cloner
from qclone.symmetry import PermCoeffs, a_to_s, expand_in_perm_basis, reconstruct, s_from_state
from qclone.tensor import DenseOperator, partial_trace, partial_transpose
from qclone.tradeoff import (
    DirectionWeights,
    MeritKind,
    TradeoffPoint,
    f_map,
    lambda_max_closed,
    membership,
    merit_of_depolarizing,
    sample_boundary,
)

dims = st.integers(min_value=2, max_value=5)
reals = st.floats(min_value=-3, max_value=3, allow_nan=False)
unit = st.floats(min_value=0, max_value=1, allow_nan=False)
seeds = st.integers(min_value=0, max_value=2**32 - 1)
kinds = st.sampled_from(list(MeritKind))

SETTINGS = settings(max_examples=60, deadline=None)


@SETTINGS
@given(dims, st.lists(reals, min_size=2, max_size=2), st.floats(min_value=1e-3, max_value=50))
def test_lambda_scaling(d, z, b):
    w = DirectionWeights(*z)
    scaled = DirectionWeights(b * z[0], b * z[1])
    assert abs(lambda_max_closed(scaled, d) - b * lambda_max_closed(w, d)) <= 1e-12 * max(1, b)


@SETTINGS
@given(dims, st.lists(reals, min_size=2, max_size=2))
def test_lambda_bounds(d, z):
    lam = lambda_max_closed(DirectionWeights(*z), d)
    # trial vectors Omega_01 x phi and Omega_02 x phi give z_i + z_j / d^2; H_z has a kernel
    assert lam >= max(0.0, z[0] + z[1] / d**2, z[1] + z[0] / d**2) - 1e-12
    assert lam <= max(0.0, z[0]) + max(0.0, z[1]) + 1e-12


@SETTINGS
@given(dims, unit, kinds)
def test_fk_consistency(d, frac, kind):
    a2 = frac * d * d / (d * d - 1)
    lhs = f_map(kind, merit_of_depolarizing(kind, a2, d), d)
    assert abs(lhs - merit_of_depolarizing(MeritKind.F, a2, d)) <= 1e-12


@SETTINGS
@given(dims, unit)
def test_merits_in_unit_interval(d, frac):
    a2 = frac * d * d / (d * d - 1)
    for kind in MeritKind:
        m = merit_of_depolarizing(kind, a2, d)
        assert -1e-15 <= m <= 1.0


@SETTINGS
@given(st.integers(2, 4), unit)
def test_cloner_always_cptp_and_on_boundary(d, frac):
    lo, hi = cloner.alpha1_interval(d)
    ch = cloner.from_alpha1(lo + frac * (hi - lo), d)
    tau = cloner.build(ch)
    assert tau.cp_error() < 1e-12 and tau.tp_error() < 1e-12
    f1, f2 = cloner.marginal_fidelities(ch)
    assert abs(ch.constraint_residual()) < 1e-12
    assert membership(TradeoffPoint(min(f1, 1.0), min(f2, 1.0)), d)


@SETTINGS
@given(st.integers(2, 4), seeds)
def test_expansion_roundtrip(d, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=6) / d**3
    a5 = complex(rng.normal(), rng.normal()) / d**3
    coeffs = PermCoeffs(tuple(a[:4]) + (a5, np.conj(a5)), d)
    tau = reconstruct(coeffs)
    assert tau.is_hermitian(1e-14)
    back = expand_in_perm_basis(tau, d)
    assert np.abs(reconstruct(back).mat - tau.mat).max() < 1e-12
    assert np.abs(np.array(a_to_s(coeffs).as_tuple()) - s_from_state(tau, d).as_tuple()).max() < 1e-12


@SETTINGS
@given(st.integers(2, 3), st.integers(2, 3), seeds)
def test_partial_trace_and_transpose_consistency(da, db, seed):
    rng = np.random.default_rng(seed)
    n = da * db
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    op = DenseOperator(g, (da, db))
    # tracing commutes with transposing the other factor
    lhs = partial_trace(partial_transpose(op, 1), {1}).mat
    rhs = partial_trace(op, {1}).mat.T
    assert np.abs(lhs - rhs).max() < 1e-12
    assert abs(partial_trace(op, {0}).trace() - op.trace()) < 1e-10


@SETTINGS
@given(st.integers(2, 4), kinds, seeds)
def test_convexity_midpoints(d, kind, seed):
    rng = np.random.default_rng(seed)
    pts = sample_boundary(kind, d, 41)
    i, j = rng.integers(0, len(pts), 2)
    s, t = rng.uniform(0, 1, 2)
    # random interior points on segments to the origin
    p = np.array([pts[i].x1, pts[i].x2]) * s
    q = np.array([pts[j].x1, pts[j].x2]) * t
    for x in (p, q, (p + q) / 2):
        assert membership(TradeoffPoint(*x, kind), d)


@SETTINGS
@given(st.integers(2, 5), unit)
def test_fidelity_curve_is_symmetric(d, frac):
    lo, hi = cloner.alpha1_interval(d)
    a = cloner.from_alpha1(lo + frac * (hi - lo), d)
    # the swapped channel has alpha1 and alpha2 exchanged
    f1, f2 = cloner.marginal_fidelities(a)
    b = cloner.CloneChannel(d, a.alpha2, a.alpha1)
    g1, g2 = cloner.marginal_fidelities(b)
    assert abs(f1 - g2) < 1e-15 and abs(f2 - g1) < 1e-15
