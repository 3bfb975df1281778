import math

import numpy as np
import pytest

from qclone import cloner
from qclone.channels import choi_of, marginal, random_pure_state
from qclone.tensor import DenseOperator, haar_unitaries
from qclone.tradeoff import (
    DirectionWeights,
    MeritKind,
    TradeoffPoint,
    boundary_g,
    corner_points,
    f_inverse,
    f_map,
    h_z,
    lambda_max_closed,
    membership,
    merit_numeric,
    merit_of_depolarizing,
    region_polygon,
    sample_boundary,
)

ALL = list(MeritKind)


def eig_max(z, d):
    return float(np.linalg.eigvalsh(h_z(z, d).mat).max())


def test_merit_parse():
    assert MeritKind.parse("one") is MeritKind.ONE
    assert MeritKind.parse("F") is MeritKind.F
    assert MeritKind.parse("Inf") is MeritKind.INF
    with pytest.raises(ValueError):
        MeritKind.parse("three")


def test_point_range():
    with pytest.raises(ValueError):
        TradeoffPoint(1.2, 0.0)
    TradeoffPoint(0.0, 1.0, MeritKind.TWO)


def test_merit_closed_forms():
    for k in ALL:
        assert merit_of_depolarizing(k, 0.0, 3) == 1.0
    assert abs(merit_of_depolarizing(MeritKind.ONE, 1 / 3, 2) - 5 / 6) < 1e-15
    assert abs(merit_of_depolarizing(MeritKind.TWO, 1.0, 2) - (1 - math.sqrt(0.5))) < 1e-15
    with pytest.raises(ValueError):
        merit_of_depolarizing(MeritKind.F, 2.0, 2)
    with pytest.raises(ValueError):
        merit_of_depolarizing(MeritKind.F, -0.1, 2)


def test_f_map_examples():
    assert f_map(MeritKind.F, 0.37, 3) == 0.37
    assert f_map(MeritKind.DIAMOND, 0.37, 3) == 0.37
    assert f_map(MeritKind.ONE, 1.0, 2) == 1.0
    assert abs(f_map(MeritKind.ONE, 5 / 6, 2) - 0.75) < 1e-15
    for k in ALL:
        for x in (0.2, 0.9):
            assert abs(f_inverse(k, f_map(k, x, 4), 4) - x) < 1e-14


def test_fk_consistency_full_range():
    for d in (2, 5):
        top = d * d / (d * d - 1)
        for k in ALL:
            for a2 in np.linspace(0, top, 33):
                lhs = f_map(k, merit_of_depolarizing(k, a2, d), d)
                assert abs(lhs - merit_of_depolarizing(MeritKind.F, a2, d)) < 1e-12


def test_merit_numeric_identity_and_depolarizing():
    d = 2
    ident = choi_of(lambda x: x, d, (d,))
    for k in ALL:
        assert abs(merit_numeric(k, ident, n_probes=20, rng=0) - 1) < 1e-12
    a2 = 0.4
    dep = choi_of(lambda x: a2 * np.trace(x) * np.eye(d) / d + (1 - a2) * x, d, (d,))
    for k in ALL:
        got = merit_numeric(k, dep, n_probes=50, rng=1)
        assert abs(got - merit_of_depolarizing(k, a2, d)) < 1e-12


def test_merit_numeric_state_independent_on_depolarizing():
    d = 3
    a2 = 0.7
    dep = choi_of(lambda x: a2 * np.trace(x) * np.eye(d) / d + (1 - a2) * x, d, (d,))
    vals = [merit_numeric(MeritKind.INF, dep, n_probes=0, probes=[random_pure_state(d, s)])
            for s in range(10)]
    assert max(vals) - min(vals) < 1e-13


def test_replace_channel_one_merit():
    d = 2
    sigma = np.diag([0.8, 0.2])
    rep = choi_of(lambda x: np.trace(x) * sigma, d, (d,))
    # the worst pure input is the eigenvector of sigma's smallest eigenvalue
    probe = DenseOperator.ket([0, 1])
    val = merit_numeric(MeritKind.ONE, rep, n_probes=200, rng=0, probes=[probe])
    assert abs(val - 0.2) < 1e-12
    with pytest.raises(ValueError):
        merit_numeric(MeritKind.ONE, cloner.build(cloner.from_alpha1(0.2, 2)), 5, 0)


def test_h_z_examples():
    d = 2
    hz = h_z(DirectionWeights(1, 0), d)
    assert hz.is_hermitian() and hz.dims == (2, 2, 2)
    assert abs(eig_max(DirectionWeights(1, 0), d) - 1) < 1e-14
    assert abs(eig_max(DirectionWeights(1, 1), d) - 1.5) < 1e-14


def test_h_z_is_covariant():
    d = 3
    hz = h_z(DirectionWeights(0.4, -1.3), d).mat
    for u in haar_unitaries(d, 5, np.random.default_rng(0)):
        w = np.kron(np.kron(u.conj(), u), u)
        assert np.abs(w @ hz - hz @ w).max() < 1e-9


def test_lambda_closed_examples():
    for d in (2, 3, 6):
        assert abs(lambda_max_closed(DirectionWeights(1, 0), d) - 1) < 1e-15
        assert abs(lambda_max_closed(DirectionWeights(0.5, 0.5), d) - (d + 1) / (2 * d)) < 1e-15
        assert lambda_max_closed(DirectionWeights(-1, 0), d) == 0.0
    # frozen values, cross-checked against the eigensolver below
    frozen = {((0.3, 0.7), 3): 0.7516611478423583, ((2, -0.5), 2): 1.8956439237389597,
              ((-1.5, 0.25), 4): 0.23650304700563882, ((-0.2, -0.3), 3): 0.0,
              ((0.4, -0.4), 3): 0.37712361663282534}
    for (z, d), val in frozen.items():
        w = DirectionWeights(*z)
        assert abs(lambda_max_closed(w, d) - val) < 1e-14
        assert abs(eig_max(w, d) - val) < 1e-12


def test_direction_constructors():
    assert DirectionWeights.positive(0.25, 2.0) == DirectionWeights(0.5, 1.5)
    assert DirectionWeights.negative(0.25, 2.0) == DirectionWeights(-0.5, -1.5)
    assert DirectionWeights.ray(0.3) == DirectionWeights(0.3, -0.3)


def test_lambda_three_cases_against_eigensolver():
    rng = np.random.default_rng(3)
    for d in (2, 3):
        for v in rng.uniform(-2, 3, 40):
            b = rng.uniform(0.1, 3)
            for w in (DirectionWeights.positive(v, b), DirectionWeights.negative(v, b),
                      DirectionWeights.ray(v)):
                assert abs(lambda_max_closed(w, d) - eig_max(w, d)) < 1e-9


def test_boundary_g_examples():
    for d in (2, 3, 7):
        assert abs(boundary_g(1, 1 / d**2, d)) < 1e-15
        x = (d + 1) / (2 * d)
        assert abs(boundary_g(x, x, d)) < 1e-15
        assert boundary_g(1 / d**2, 1 / d**2, d) < 0
    with pytest.raises(ValueError):
        boundary_g(-0.1, 0.5, 2)


def test_corners():
    assert corner_points(MeritKind.F, 2)[0] == TradeoffPoint(1.0, 0.25, MeritKind.F)
    assert corner_points(MeritKind.ONE, 2)[1] == TradeoffPoint(0.5, 1.0, MeritKind.ONE)
    assert corner_points(MeritKind.INF, 4)[0].x2 == 0.25
    c = corner_points(MeritKind.TWO, 3)[0]
    assert c.x2 == 1 - math.sqrt(2 / 3)
    # corners are the images of the optimal family at alpha1 = 0
    for k in ALL:
        m = merit_of_depolarizing(k, 1.0, 5)
        assert abs(corner_points(k, 5)[0].x2 - m) < 1e-15


def test_sample_boundary_fidelity():
    d = 2
    pts = sample_boundary(MeritKind.F, d, 201)
    assert (pts[0].x1, pts[0].x2) == pytest.approx((0.75, 0.0), abs=1e-15)
    assert (pts[-1].x1, pts[-1].x2) == pytest.approx((0.0, 0.75), abs=1e-15)
    assert (pts[100].x1, pts[100].x2) == pytest.approx((0.75, 0.75), abs=1e-15)
    assert max(abs(boundary_g(p.x1, p.x2, d)) for p in pts) < 1e-10
    xs = [(p.x1, p.x2) for p in pts]
    assert (1.0, 0.25) in [(round(a, 12), round(b, 12)) for a, b in xs]
    with pytest.raises(ValueError):
        sample_boundary(MeritKind.F, d, 1)


def test_sample_boundary_one_contains_symmetric_point():
    pts = sample_boundary(MeritKind.ONE, 2, 51)
    mid = pts[25]
    assert abs(mid.x1 - 5 / 6) < 1e-12 and abs(mid.x2 - 5 / 6) < 1e-12
    assert len(sample_boundary(MeritKind.ONE, 2, 2)) == 2


def test_membership_examples():
    for d in (2, 3):
        assert membership(TradeoffPoint(1, 1 / d**2), d)
        assert not membership(TradeoffPoint(1, 1 / d**2 + 0.01), d)
        for k in ALL:
            assert membership(TradeoffPoint(0, 0, k), d)
            for c in corner_points(k, d):
                assert membership(c, d)
    assert membership(TradeoffPoint(5 / 6, 5 / 6, MeritKind.ONE), 2)
    assert not membership(TradeoffPoint(5 / 6 + 1e-3, 5 / 6 + 1e-3, MeritKind.ONE), 2)


def test_membership_matches_boundary_function():
    d = 3
    rng = np.random.default_rng(5)
    for x in rng.uniform(0, 1, size=(200, 2)):
        g = boundary_g(*x, d)
        if abs(g) < 1e-3:
            continue
        assert membership(TradeoffPoint(*x), d) == (g < 0)


def test_support_function_consistency():
    d = 3
    pts = np.array([[p.x1, p.x2] for p in sample_boundary(MeritKind.F, d, 200)])
    rng = np.random.default_rng(6)
    for _ in range(100):
        z = rng.normal(size=2)
        if z.sum() <= 0:
            z = -z
        w = DirectionWeights(*z)
        assert abs((pts @ z).max() - lambda_max_closed(w, d)) < 2e-3


def test_region_polygon_is_convex_ccw():
    for k in ALL:
        poly = region_polygon(k, 3, 301)
        e1 = np.roll(poly, -1, axis=0) - poly
        e2 = np.roll(e1, -1, axis=0)
        cross = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        assert cross.min() > -1e-12
