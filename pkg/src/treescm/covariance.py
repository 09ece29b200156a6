"""Covariances of a tree SCM at a parameter assignment.

``sigma_matrix`` solves Sigma = (I - Lambda)^-T Omega (I - Lambda)^-1 by
back-substitution along the tree; ``sigma_trek_oracle`` sums trek monomials
directly and serves as the independent check.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import expr as ex
from .model import TreeScm
from .pit import REPETITIONS, PitSession, matmul_mod


@dataclass(frozen=True)
class ParamAssignment:
    """Values for every lambda[p, i] and every omega[u, v] (diagonal included).

    Keys: ``lam[(parent[i], i)]`` and ``omega[(u, v)]`` with ``u <= v``.
    """

    lam: dict
    omega: dict

    def omega_at(self, u: int, v: int):
        return self.omega.get((min(u, v), max(u, v)), 0)


def sample_assignment(m: TreeScm, session: PitSession) -> ParamAssignment:
    """Uniform field values for all parameters; diagonal omegas are nonzero."""
    p, rng = session.prime, session.rng
    lam = {(m.parent[i], i): rng.randrange(p) for i in range(1, m.n + 1)}
    omega = {(i, i): session.nonzero() for i in m.nodes}
    for e in m.bidirected:
        omega[e] = rng.randrange(p)
    return ParamAssignment(lam, omega)


def rational_assignment(m: TreeScm, rng, bound: int = 10**6) -> ParamAssignment:
    """Random nonzero integer-valued assignment for exact (rational) work."""
    def draw():
        while True:
            v = rng.randint(-bound, bound)
            if v:
                return Fraction(v)
    lam = {(m.parent[i], i): draw() for i in range(1, m.n + 1)}
    omega = {(i, i): draw() for i in m.nodes}
    for e in m.bidirected:
        omega[e] = draw()
    return ParamAssignment(lam, omega)


def _check(m: TreeScm, a: ParamAssignment) -> None:
    if set(a.lam) != set(m.directed):
        raise ValueError("lambda keys do not match the directed edges of the model")
    expected = {(i, i) for i in m.nodes} | set(m.bidirected)
    if set(a.omega) != expected:
        raise ValueError("omega keys do not match the bidirected edges plus the diagonal")


def path_matrix(m: TreeScm, a: ParamAssignment, modulus: Optional[int] = None) -> np.ndarray:
    """(I - Lambda)^-1: entry [k, i] is the weight of the directed path k -> ... -> i."""
    size = m.n + 1
    A = np.zeros((size, size), dtype=object)
    for i in m.order:
        A[i, i] = 1
        if i:
            p = m.parent[i]
            col = A[:, p] * a.lam[(p, i)]
            A[:, i] = col if modulus is None else col % modulus
            A[i, i] = 1
    return A


def sigma_matrix(m: TreeScm, a: ParamAssignment, modulus: Optional[int] = None) -> np.ndarray:
    """Sigma at the assignment, as an (n+1) x (n+1) object array.

    With ``modulus`` everything is reduced into GF(modulus); otherwise the
    arithmetic of the assignment values is used (ints or Fractions).
    """
    _check(m, a)
    size = m.n + 1
    A = path_matrix(m, a, modulus)
    Om = np.zeros((size, size), dtype=object)
    for (u, v), w in a.omega.items():
        Om[u, v] = w
        Om[v, u] = w
    if modulus is None:
        return A.T.dot(Om).dot(A)
    Om %= modulus
    return matmul_mod(matmul_mod(A.T, Om, modulus), A, modulus)


TREK_ORACLE_MAX_N = 10


def sigma_trek_oracle(m: TreeScm, a: ParamAssignment, i: int, j: int, modulus: Optional[int] = None):
    """sigma[i, j] as a sum of trek monomials (Wright's rule).

    Treks are enumerated explicitly: every top pair (u, v) with u an ancestor
    of i, v an ancestor of j, and either u == v (weight omega[u, u]) or
    u <-> v bidirected; the sides are the directed paths down to i and j.
    """
    if m.n > TREK_ORACLE_MAX_N:
        raise ValueError(f"trek enumeration is limited to n <= {TREK_ORACLE_MAX_N}")

    def downward_paths(target):
        # (top, product of lambdas on top -> ... -> target) for every ancestor top
        out, weight, node = [], 1, target
        out.append((node, weight))
        while node != 0:
            p = m.parent[node]
            weight = weight * a.lam[(p, node)]
            node = p
            out.append((node, weight))
        return out

    total = 0
    for u, left in downward_paths(i):
        for v, right in downward_paths(j):
            if u == v or m.has_bidirected(u, v):
                total = total + left * a.omega_at(u, v) * right
    return total % modulus if modulus is not None else total


class SigmaPoints:
    """A few independent random covariance matrices used as PIT witnesses.

    ``is_zero(e)`` evaluates a sigma-circuit at every point and charges the
    session once with the circuit's degree in the model parameters. A
    ``False`` answer is certain; ``True`` errs with probability at most
    ``(degree / prime) ** count``.
    """

    def __init__(self, m: Optional[TreeScm], session: PitSession, count: int = REPETITIONS):
        self.model = m
        self.session = session
        self.prime = session.prime
        self.assignments = []
        self.sigmas = []
        for _ in range(count):
            if m is None:
                self.assignments.append(None)
                self.sigmas.append(None)
            else:
                a = sample_assignment(m, session)
                self.assignments.append(a)
                self.sigmas.append(sigma_matrix(m, a, self.prime))
        self._caches = [dict() for _ in range(count)]
        self._degrees: dict = {}

    @classmethod
    def constant(cls, session: PitSession, count: int = REPETITIONS) -> "SigmaPoints":
        """Points for circuits without sigma atoms (integer constants only)."""
        return cls(None, session, count)

    def __len__(self) -> int:
        return len(self.sigmas)

    def sigma_degree(self, i: int, j: int) -> int:
        if self.model is None:
            raise ValueError("sigma atom in a constant-only context")
        return self.model.sigma_degree(i, j)

    def degree(self, e: ex.Expr) -> int:
        return ex.degree(e, self.sigma_degree, self._degrees)

    def value(self, e: ex.Expr, k: int) -> int:
        """Value of ``e`` at point ``k`` in GF(prime)."""
        S = self.sigmas[k]

        def lookup(i, j):
            if S is None:
                raise ValueError("sigma atom in a constant-only context")
            return S[i, j]
        return ex.evaluate(e, lookup, self.prime, self._caches[k])

    def values(self, e: ex.Expr) -> list[int]:
        return [self.value(e, k) for k in range(len(self))]

    def is_zero(self, e: ex.Expr) -> bool:
        if e.op == ex.CONST:
            return e.value % self.prime == 0
        self.session.charge(self.degree(e))
        return all(v == 0 for v in self.values(e))

    def all_zero(self, *es: ex.Expr) -> bool:
        return all(self.is_zero(e) for e in es)
