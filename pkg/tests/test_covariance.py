import random
from fractions import Fraction

import numpy as np
import pytest

from treescm.covariance import (ParamAssignment, SigmaPoints, rational_assignment, sample_assignment,
                                sigma_matrix, sigma_trek_oracle)
from treescm.model import M1, M2, TreeScm, random_model
from treescm.pit import DEFAULT_PRIME, PitSession

P = DEFAULT_PRIME


def test_sample_assignment_deterministic_and_keys():
    a = sample_assignment(M1, PitSession(7))
    b = sample_assignment(M1, PitSession(7))
    assert a == b
    assert set(a.lam) == {(0, 1), (1, 2)}
    assert all(a.omega[(i, i)] != 0 for i in M1.nodes)


def test_no_bidirected_means_diagonal_omega_only():
    m = TreeScm(3, (None, 0, 1, 1), ())
    a = sample_assignment(m, PitSession(1))
    assert set(a.omega) == {(i, i) for i in range(4)}


def test_m2_assignment_sizes():
    a = sample_assignment(M2, PitSession(2))
    assert len(a.lam) == 4
    assert len([k for k in a.omega if k[0] != k[1]]) == 2
    assert len([k for k in a.omega if k[0] == k[1]]) == 5


def test_m1_instrument_covariances():
    a = ParamAssignment({(0, 1): Fraction(3), (1, 2): Fraction(5)},
                        {(0, 0): Fraction(1), (1, 1): Fraction(2), (2, 2): Fraction(7), (1, 2): Fraction(11)})
    S = sigma_matrix(M1, a)
    assert S[0, 1] == 3 and S[0, 2] == 15
    # the three treks between 1 and 2
    assert S[1, 2] == 1 * 3**2 * 5 + 2 * 5 + 11


def test_zero_lambda_gives_omega():
    m = TreeScm(3, (None, 0, 1, 1), ((1, 3), (0, 2)))
    lam = {e: 0 for e in m.directed}
    omega = {(i, i): i + 1 for i in m.nodes}
    omega.update({(1, 3): 9, (0, 2): 4})
    S = sigma_matrix(m, ParamAssignment(lam, omega))
    expected = np.zeros((4, 4), dtype=object)
    for (u, v), w in omega.items():
        expected[u, v] = expected[v, u] = w
    assert (S == expected).all()


@pytest.mark.parametrize("seed", range(5))
def test_m2_matches_trek_oracle(seed):
    s = PitSession(seed)
    a = sample_assignment(M2, s)
    S = sigma_matrix(M2, a, P)
    for i in M2.nodes:
        for j in M2.nodes:
            assert S[i, j] == sigma_trek_oracle(M2, a, i, j, P)


def test_symmetry_and_exact_mode():
    rng = random.Random(4)
    for _ in range(10):
        m = random_model(rng.randint(1, 7), 0.4, rng)
        a = rational_assignment(m, rng)
        S = sigma_matrix(m, a)
        assert (S == S.T).all()
        assert all(S[i, j] == sigma_trek_oracle(m, a, i, j) for i in m.nodes for j in m.nodes)


def test_trek_oracle_size_guard():
    m = random_model(11, 0.1, random.Random(0))
    a = rational_assignment(m, random.Random(0))
    with pytest.raises(ValueError):
        sigma_trek_oracle(m, a, 0, 1)


def test_assignment_key_check():
    a = ParamAssignment({(0, 1): 1}, {(0, 0): 1, (1, 1): 1})
    with pytest.raises(ValueError):
        sigma_matrix(M1, a)


def test_sigma_points_constant_only():
    from treescm import expr as ex
    pts = SigmaPoints.constant(PitSession(0))
    assert pts.is_zero(ex.const(2) * 3 - 6)
    with pytest.raises(ValueError):
        pts.is_zero(ex.sigma(0, 1) + 1)
