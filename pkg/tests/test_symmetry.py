import numpy as np
import pytest

from qclone import cloner
from qclone.channels import random_channel
from qclone.symmetry import (
    PERMUTATIONS,
    NotInCommutantError,
    PermCoeffs,
    a_to_s,
    eggeling_werner_basis,
    expand_in_perm_basis,
    feasibility,
    gram_matrix,
    project_to_commutant,
    reconstruct,
    s_from_state,
)
from qclone.tensor import DenseOperator, partial_transpose, perm_operator

SIGN = np.array([1, -1, -1, -1, 1, 1])


def random_coeffs(d, rng):
    a = rng.normal(size=6) / d**3
    a5 = complex(rng.normal(), rng.normal()) / d**3
    return PermCoeffs(tuple(a[:4]) + (a5, np.conj(a5)), d)


def test_gram_matrix_frozen():
    g3 = gram_matrix(3)
    assert list(g3[0]) == [27, 9, 9, 9, 3, 3]
    assert np.allclose(np.diag(g3), 27)
    assert np.linalg.matrix_rank(gram_matrix(2)) == 5
    assert np.linalg.matrix_rank(g3) == 6
    # on three qubits the alternating sum of permutations vanishes
    alt = sum(s * perm_operator(p, 2).mat for s, p in zip(SIGN, PERMUTATIONS))
    assert np.abs(alt).max() == 0


def test_expand_reconstruct_roundtrip():
    rng = np.random.default_rng(0)
    for d in (3, 4):
        a = random_coeffs(d, rng)
        back = expand_in_perm_basis(reconstruct(a), d)
        assert np.abs(back.as_array() - a.as_array()).max() < 1e-12


def test_expand_at_d2_recovers_operator():
    rng = np.random.default_rng(1)
    a = random_coeffs(2, rng)
    tau = reconstruct(a)
    back = expand_in_perm_basis(tau, 2)
    assert np.abs(reconstruct(back).mat - tau.mat).max() < 1e-13
    # the difference lies along the alternating direction
    diff = back.as_array() - a.as_array()
    assert np.abs(diff - diff[0] * SIGN).max() < 1e-13


def test_reconstruct_matches_partial_transpose_definition():
    rng = np.random.default_rng(2)
    d = 3
    a = random_coeffs(d, rng)
    t0 = sum(c * perm_operator(p, d).mat for c, p in zip(a.coeffs, PERMUTATIONS))
    direct = partial_transpose(DenseOperator(t0, (d, d, d)), 0)
    assert np.abs(reconstruct(a).mat - direct.mat).max() < 1e-15


def test_not_in_commutant():
    ch = random_channel(2, rng=3)
    with pytest.raises(NotInCommutantError) as info:
        expand_in_perm_basis(ch.choi, 2)
    assert info.value.residual > 1e-6
    with pytest.raises(ValueError):
        expand_in_perm_basis(DenseOperator(np.eye(8), (2, 4)), 2)


def test_projection_is_idempotent_and_trace_preserving():
    ch = random_channel(3, rng=5)
    p1 = project_to_commutant(ch.choi, 3)
    p2 = project_to_commutant(p1, 3)
    assert np.abs(p1.mat - p2.mat).max() < 1e-14
    assert abs(p1.trace() - 1) < 1e-12
    assert np.linalg.eigvalsh(p1.mat).min() > -1e-12


def test_a_to_s_matches_direct_traces():
    rng = np.random.default_rng(4)
    for d in (2, 3, 4):
        a = random_coeffs(d, rng)
        via_formula = np.array(a_to_s(a).as_tuple())
        direct = np.array(s_from_state(reconstruct(a), d).as_tuple())
        assert np.abs(via_formula - direct).max() < 1e-12


def test_eggeling_werner_algebra():
    d = 3
    b = eggeling_werner_basis(d)
    x, v = b["X"].mat, b["V"].mat
    assert np.abs(x @ x - d * x).max() < 1e-12
    assert np.abs(x @ v @ x - x).max() < 1e-12
    assert np.abs(v @ v - np.eye(d**3)).max() < 1e-12
    # S_+, S_- and S_0 are orthogonal projectors that sum to the identity
    total = b["S_plus"].mat + b["S_minus"].mat + b["S0"].mat
    assert np.abs(total - np.eye(d**3)).max() < 1e-12
    for k in ("S_plus", "S_minus", "S0"):
        m = b[k].mat
        assert np.abs(m @ m - m).max() < 1e-12
    assert np.abs(eggeling_werner_basis(2)["S_minus"].mat).max() == 0


def test_maximally_mixed_feasible_with_positive_slack():
    for d in (2, 3):
        rep = feasibility(PermCoeffs.maximally_mixed(d))
        assert rep.feasible
        assert rep.normalization_residual == pytest.approx(0, abs=1e-15)
        assert rep.slacks["cone"] > 0
        assert rep.slacks["mixed_weight"] > 0


def test_infeasible_examples():
    d = 3
    bad = PermCoeffs((-1.0, 0, 0, 0, 0, 0), d)
    rep = feasibility(bad)
    assert not rep.feasible
    assert "sym_weight" in rep.violated()
    not_tp = PermCoeffs((2 / d**3, 0, 0, 0, 0, 0), d)
    assert feasibility(not_tp).violated() == ["normalization"]
    with pytest.raises(ValueError):
        feasibility(bad, d=4)


def test_antisym_is_vacuous_on_qubits():
    a = PermCoeffs((0.0, 0.1, 0.1, 0.3, 0.0, 0.0), 2)
    rep = feasibility(a)
    assert "antisym_weight" in rep.vacuous
    assert "antisym_weight" not in rep.violated()


def test_cone_slack_is_scaled_block_determinant():
    rng = np.random.default_rng(8)
    for d in (2, 3, 5):
        a = random_coeffs(d, rng)
        assert abs(feasibility(a).slacks["cone"] - a_to_s(a).cone_gap() / (2 * d) ** 2) < 1e-12


def test_optimal_cloner_is_on_cone_boundary():
    for d in (2, 3, 4):
        a = cloner.perm_coeffs(cloner.from_alpha1(0.35, d))
        rep = feasibility(a)
        assert rep.feasible
        assert abs(rep.slacks["cone"]) < 1e-15
        assert rep.slacks["sym_weight"] == 0


def test_perm_coeffs_helpers():
    a = PermCoeffs.from_values(1, 2, 3, 4, 1 + 2j, dim=2)
    assert a.a6 == 1 - 2j
    assert a.is_hermitian()
    assert not PermCoeffs((0, 0, 0, 0, 1j, 1j), 2).is_hermitian()
    with pytest.raises(ValueError):
        PermCoeffs((1, 2, 3), 2)
    assert PermCoeffs.maximally_mixed(3).normalization() == pytest.approx(1.0)
