"""Prime-field arithmetic and Schwartz-Zippel identity testing with an error budget.

A :class:`PitSession` owns the randomness of a run. Every zero test declares
the total degree of the polynomial it examines; the session adds
``degree / prime`` to the error mass it has spent and refuses to go past
``target_error`` (the union bound over all tests of the run).
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

#: 2**62 - 57, the largest prime below 2**62; it is 3 mod 4 so square roots are one ``pow``.
DEFAULT_PRIME = 4611686018427387847
DEFAULT_ERROR = Fraction(1, 2**40)
#: Independent evaluation points behind every verdict that gates an output status.
REPETITIONS = 3


class BudgetExhausted(RuntimeError):
    """The declared error bound can no longer be guaranteed."""


class DegreeBoundExceeded(BudgetExhausted):
    """A test declared a degree above the session's fixed bound."""


def union_bound_ok(degree: int, trials: int, prime: int, error: float | Fraction) -> bool:
    """Whether ``trials`` tests of degree ``degree`` over ``prime`` stay within ``error``."""
    return Fraction(trials * degree, prime) <= Fraction(error)


class PitSession:
    """Randomness and error accounting for one identification run.

    Parameters
    ----------
    seed : int
        Seed of the session RNG; equal seeds give equal runs.
    prime : int
        Field modulus. Must be at least 2**61.
    target_error : float or Fraction
        Overall failure probability allowed for the run.
    degree_bound, trials : int, optional
        A fixed plan. When both are given the plan is checked against the
        union bound up front and every test must respect ``degree_bound``;
        at most ``trials`` tests may be run.
    """

    def __init__(self, seed: int = 0, prime: int = DEFAULT_PRIME,
                 target_error: float | Fraction = DEFAULT_ERROR,
                 degree_bound: Optional[int] = None, trials: Optional[int] = None):
        if prime < 2**61:
            raise ValueError(f"prime must be at least 2**61, got {prime}")
        target = Fraction(target_error)
        if not 0 < target < 1:
            raise ValueError("target error must lie in (0, 1)")
        if degree_bound is not None and trials is not None and not union_bound_ok(
                degree_bound, trials, prime, target):
            raise BudgetExhausted(
                f"{trials} tests of degree {degree_bound} over a {prime.bit_length()}-bit "
                f"prime exceed the error target {float(target):.3g}")
        self.seed = seed
        self.prime = prime
        self.target_error = target
        self.degree_bound = degree_bound
        self.trials = trials
        self.rng = random.Random(seed)
        self.tests = 0
        self.spent = Fraction(0)

    def charge(self, degree: int) -> None:
        """Account for one zero test of a polynomial of total degree ``degree``."""
        if self.degree_bound is not None and degree > self.degree_bound:
            raise DegreeBoundExceeded(f"test of degree {degree} exceeds the bound {self.degree_bound}")
        if self.trials is not None and self.tests >= self.trials:
            raise BudgetExhausted(f"all {self.trials} budgeted tests are used")
        spent = self.spent + Fraction(max(degree, 0), self.prime)
        if spent > self.target_error:
            raise BudgetExhausted(
                f"error mass {float(spent):.3g} would exceed the target {float(self.target_error):.3g}")
        self.spent = spent
        self.tests += 1

    def fresh_point(self, k: int, degree: Optional[int] = None) -> list[int]:
        """``k`` uniform field elements; charges ``degree`` when given."""
        if degree is not None:
            self.charge(degree)
        return [self.rng.randrange(self.prime) for _ in range(k)]

    def nonzero(self) -> int:
        while True:
            v = self.rng.randrange(self.prime)
            if v:
                return v


def is_zero_poly(evaluator: Callable[[Sequence[int]], int], nvars: int, degree: int,
                 session: PitSession, repetitions: int = REPETITIONS) -> bool:
    """Schwartz-Zippel test of a black-box polynomial over the session field.

    ``False`` is always right: a witness point was found. ``True`` is wrong
    with probability at most ``(degree / prime) ** repetitions``.
    """
    session.charge(degree)
    for _ in range(repetitions):
        point = session.fresh_point(nvars)
        if evaluator(point) % session.prime:
            return False
    return True


def inv(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError("inverse of zero in the prime field")
    return pow(a, p - 2, p)


def sqrt_mod(a: int, p: int) -> Optional[int]:
    """Square root in GF(p) for ``p = 3 mod 4``; the smaller representative, or None."""
    if p % 4 != 3:
        raise ValueError("sqrt_mod needs a prime congruent to 3 mod 4")
    a %= p
    r = pow(a, (p + 1) // 4, p)
    if r * r % p != a:
        return None
    return min(r, p - r)


def to_field(x, p: int) -> int:
    """Reduce an int or Fraction into GF(p)."""
    if isinstance(x, Fraction):
        return x.numerator % p * inv(x.denominator, p) % p
    return int(x) % p


_LIMB = 21
_MASK = (1 << _LIMB) - 1


def matmul_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Matrix product over GF(p) for entries already reduced into ``[0, p)``.

    Operands are split into 21-bit limbs so every partial product is an
    exact int64 matmul; limbs are recombined in Python integers.
    Returns an object array of ints in ``[0, p)``.
    """
    a = np.asarray(a, dtype=object)
    b = np.asarray(b, dtype=object)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch {a.shape} @ {b.shape}")
    limbs = -(-p.bit_length() // _LIMB)
    # limbs * inner * 2**42 must stay below 2**63
    if limbs * a.shape[1] >= 1 << 20:
        raise ValueError("inner dimension too large for the limb product")
    al = [((a >> (_LIMB * k)) & _MASK).astype(np.int64) for k in range(limbs)]
    bl = [((b >> (_LIMB * k)) & _MASK).astype(np.int64) for k in range(limbs)]
    out = np.zeros((a.shape[0], b.shape[1]), dtype=object)
    for s in range(2 * limbs - 1):
        acc = None
        for k in range(max(0, s - limbs + 1), min(s, limbs - 1) + 1):
            term = al[k] @ bl[s - k]
            acc = term if acc is None else acc + term
        out = out + acc.astype(object) * pow(2, _LIMB * s, p)
    return out % p
