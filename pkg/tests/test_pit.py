import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treescm.covariance import SigmaPoints
from treescm.expr import sigma
from treescm.model import TreeScm
from treescm.pit import (DEFAULT_ERROR, DEFAULT_PRIME, BudgetExhausted, DegreeBoundExceeded,
                         PitSession, inv, is_zero_poly, matmul_mod, sqrt_mod, to_field, union_bound_ok)

P = DEFAULT_PRIME


def test_default_prime_properties():
    from sympy import isprime
    assert P == 2**62 - 57 and isprime(P) and P % 4 == 3


def test_fresh_point_is_deterministic():
    a = PitSession(seed=42).fresh_point(3)
    b = PitSession(seed=42).fresh_point(3)
    assert a == b and len(a) == 3 and all(0 <= v < P for v in a)
    assert PitSession(seed=43).fresh_point(3) != a


def test_budget_exhaustion():
    s = PitSession(seed=1, degree_bound=10, trials=2)
    s.fresh_point(2, degree=10)
    s.fresh_point(2, degree=10)
    with pytest.raises(BudgetExhausted):
        s.fresh_point(2, degree=10)
    with pytest.raises(DegreeBoundExceeded):
        PitSession(degree_bound=5).charge(6)


def test_error_mass_budget():
    s = PitSession(target_error=Fraction(10, P))
    s.charge(6)
    with pytest.raises(BudgetExhausted):
        s.charge(5)
    assert s.spent == Fraction(6, P)


@pytest.mark.parametrize("n, e", [(10, 20), (60, 1770), (1000, 10**5), (3000, 4 * 10**6)])
def test_union_bound_plan(n, e):
    # d = n^2 + n, T = e*n: the plan is accepted exactly when T*d/P <= 2^-40
    d, T = n * n + n, e * n
    expected = T * d * 2**40 <= P
    assert union_bound_ok(d, T, P, DEFAULT_ERROR) == expected
    if expected:
        PitSession(degree_bound=d, trials=T)
    else:
        with pytest.raises(BudgetExhausted):
            PitSession(degree_bound=d, trials=T)


def test_union_bound_boundary_values():
    assert union_bound_ok(20, 10, P, DEFAULT_ERROR)
    assert not union_bound_ok(1, P // 2**40 + 1, P, DEFAULT_ERROR)
    assert union_bound_ok(1, P // 2**40, P, DEFAULT_ERROR)


def test_is_zero_poly_examples():
    s = PitSession(seed=3)
    assert is_zero_poly(lambda x: 0, 2, 1, s)
    assert not is_zero_poly(lambda x: x[0], 1, 1, s)
    assert not is_zero_poly(lambda x: (x[0] * x[1] - x[1] * x[0] + x[0] ** 2) % P, 2, 2, s)


def test_chain_determinant_vanishes():
    # 0 -> 1 -> 2 without bidirected edges: sigma01*sigma12 - sigma11*sigma02 is the zero polynomial
    m = TreeScm(2, (None, 0, 1), ())
    s = PitSession(seed=5)
    pts = SigmaPoints(m, s)
    det = sigma(0, 1) * sigma(1, 2) - sigma(1, 1) * sigma(0, 2)
    assert pts.is_zero(det)
    assert not pts.is_zero(sigma(0, 1) * sigma(1, 2))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, P - 1))
def test_field_inverse(a):
    assert a * inv(a, P) % P == 1


@settings(max_examples=100, deadline=None)
@given(st.integers(0, P - 1))
def test_sqrt_mod(a):
    r = sqrt_mod(a * a, P)
    assert r is not None and r * r % P == a * a % P and r <= P - r


def test_sqrt_of_nonresidue():
    # -1 is a non-residue for P = 3 mod 4
    assert sqrt_mod(P - 1, P) is None


def test_to_field_fraction():
    assert to_field(Fraction(3, 4), P) * 4 % P == 3
    assert to_field(-5, P) == P - 5


@pytest.mark.parametrize("prime", [P, 2**89 - 1])
def test_matmul_mod_matches_python_ints(prime):
    rng = random.Random(prime)
    a = np.array([[rng.randrange(prime) for _ in range(7)] for _ in range(5)], dtype=object)
    b = np.array([[rng.randrange(prime) for _ in range(4)] for _ in range(7)], dtype=object)
    assert (matmul_mod(a, b, prime) == a.dot(b) % prime).all()


def test_small_prime_rejected():
    with pytest.raises(ValueError):
        PitSession(prime=1_000_003)
