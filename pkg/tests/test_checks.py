import numpy as np

from qclone import checks
from qclone.symmetry import PermCoeffs


def test_cp_verdicts_ignore_trace_rounding():
    d = 3
    a = PermCoeffs.maximally_mixed(d)
    nudged = PermCoeffs((a.a1 * (1 + 1e-15),) + a.coeffs[1:], d)
    for c in (a, nudged):
        assert checks.cp_verdicts(c) == (True, True, False)


def test_cp_verdicts_reject_bad_trace_and_negative_weight():
    d = 2
    assert checks.cp_verdicts(PermCoeffs((2 / d**3, 0, 0, 0, 0, 0), d))[:2] == (False, False)
    crit, eig, _ = checks.cp_verdicts(PermCoeffs((-1 / d**3, 0, 0, 0.5 / d**2, 0, 0), d))
    assert crit == eig


def test_random_coeffs_hit_both_verdicts():
    rng = np.random.default_rng(0)
    verdicts = [checks.cp_verdicts(checks.random_hermitian_coeffs(3, rng)) for _ in range(300)]
    assert all(c == e for c, e, _ in verdicts)
    assert 0 < sum(e for _, e, _ in verdicts) < len(verdicts)
    assert sum(n for *_, n in verdicts) == 0
