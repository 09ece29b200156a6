"""Brute-force ground truth for small models.

Everything here is exact: covariances come from trek sums over rational
parameter values, equations are solved over the rationals, and cycles are
enumerated exhaustively. It shares no zero tests or randomized search with
the engine, which is what makes it useful as a cross-check.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import networkx as nx

from .covariance import ParamAssignment, rational_assignment, sigma_trek_oracle
from .cyclefind import EquationGraph, Weight2x2, cycle_edges, walk_weight
from .model import MissingEdge, TreeScm, missing_edges

INFINITE = math.inf
MAX_NODES = 8
MAX_CYCLE_NODES = 12


class OracleError(RuntimeError):
    """The instance is outside what the oracle can decide."""


class InconsistentSystem(OracleError):
    """The equations have no solution at the given covariances."""


@dataclass
class SolutionCount:
    """Number of solutions of each lambda parameter: 1, 2 or ``INFINITE``."""

    counts: dict[int, float]
    components: list[list[int]] = field(default_factory=list)
    #: the finitely many values of each parameter (sorted), or None when infinite
    values: dict[int, Optional[list]] = field(default_factory=dict)

    def __getitem__(self, node: int) -> float:
        return self.counts[node]


def enumerate_simple_cycles(g: EquationGraph, max_nodes: int = MAX_CYCLE_NODES,
                            min_length: int = 3) -> list[list]:
    """All simple directed cycles of length >= ``min_length``.

    Each cycle is listed once per orientation, rotated to start at its
    smallest node (in graph order); the list is sorted.
    """
    if len(g) > max_nodes:
        raise OracleError(f"cycle enumeration is limited to {max_nodes} nodes, got {len(g)}")
    dg = nx.DiGraph()
    dg.add_nodes_from(range(len(g)))
    dg.add_edges_from((g.index[u], g.index[v]) for (u, v) in g.weights)
    out = []
    for cyc in nx.simple_cycles(dg):
        if len(cyc) < min_length:
            continue
        k = cyc.index(min(cyc))
        out.append(cyc[k:] + cyc[:k])
    out.sort()
    return [[g.nodes[k] for k in cyc] for cyc in out]


def exact_sigma(m: TreeScm, a: ParamAssignment) -> dict:
    """All covariances by trek sums, keyed by (i, j) in both orders."""
    sig = {}
    for i in m.nodes:
        for j in m.nodes:
            if i <= j:
                sig[(i, j)] = sig[(j, i)] = sigma_trek_oracle(m, a, i, j)
    return sig


def _coefficients(e: MissingEdge, sig: dict) -> tuple:
    # a*x*y - b*x + c*y - d = 0
    i, j, p, q = e.i, e.j, e.p, e.q
    return sig[(p, q)], sig[(p, j)], -sig[(i, q)], -sig[(i, j)]


def _residual(e: MissingEdge, sig: dict, x, y):
    a, b, c, d = _coefficients(e, sig)
    return a * x * y - b * x + c * y - d


def _rank(e: MissingEdge, sig: dict) -> int:
    a, b, c, d = _coefficients(e, sig)
    if a * d - b * c != 0:
        return 2
    return 1 if any((a, b, c, d)) else 0


def _solve_other(e: MissingEdge, sig: dict, known: int, value):
    """Linear equation for the other endpoint: returns (alpha, beta) of alpha*z + beta = 0."""
    a, b, c, d = _coefficients(e, sig)
    if known == e.i:
        # y*(a*x + c) - (b*x + d) = 0
        return a * value + c, -(b * value + d)
    # x*(a*y - b) + (c*y - d) = 0
    return a * value - b, c * value - d


def _rational_sqrt(v: Fraction) -> Optional[Fraction]:
    if v < 0:
        return None
    rn, rd = math.isqrt(v.numerator), math.isqrt(v.denominator)
    if rn * rn == v.numerator and rd * rd == v.denominator:
        return Fraction(rn, rd)
    return None


def _fixed_points(w: Weight2x2) -> list[Fraction]:
    """Rational solutions of x = (b*x + d)/(a*x + c) for a non-scalar weight."""
    a, b, c, d = w.a, w.b, w.c, w.d
    if a == 0:
        if c - b == 0:
            raise InconsistentSystem("cycle equation has no solution")
        return [Fraction(d) / (c - b)]
    disc = (c - b) ** 2 + 4 * a * d
    root = _rational_sqrt(Fraction(disc))
    if root is None:
        raise InconsistentSystem("cycle solutions are irrational although the truth is rational")
    sols = {(-(c - b) + root) / (2 * a), (-(c - b) - root) / (2 * a)}
    return sorted(sols)


def count_solutions(m: TreeScm, a: Optional[ParamAssignment] = None,
                    rng: Optional[random.Random] = None) -> SolutionCount:
    """Solution counts of the missing-edge equations at exact covariances.

    ``a`` defaults to a random rational assignment; the counts then equal
    the generic counts except on a negligible set.
    """
    if m.n > MAX_NODES:
        raise OracleError(f"the oracle is limited to n <= {MAX_NODES}")
    a = a if a is not None else rational_assignment(m, rng or random.Random(0))
    sig = exact_sigma(m, a)
    value: dict[int, Fraction] = {}
    edges = [e for e in missing_edges(m)]
    for e in edges:
        if e.is_root:
            v = e.node
            value[v] = Fraction(sig[(0, v)]) / sig[(0, m.parent[v])]
    pairs = [e for e in edges if not e.is_root]

    # propagate linear consequences until nothing changes
    changed = True
    while changed:
        changed = False
        for e in pairs:
            for known, other in ((e.i, e.j), (e.j, e.i)):
                if known in value and other not in value:
                    alpha, beta = _solve_other(e, sig, known, value[known])
                    if alpha != 0:
                        value[other] = Fraction(-beta) / alpha
                        changed = True
                    elif beta != 0:
                        raise InconsistentSystem(f"edge {e.i} <-> {e.j} has no solution")
    for e in pairs:
        if e.i in value and e.j in value and _residual(e, sig, value[e.i], value[e.j]) != 0:
            raise InconsistentSystem(f"edge {e.i} <-> {e.j} is violated by the propagated values")

    counts: dict[int, float] = {v: 1 for v in value}
    unknown = [v for v in range(1, m.n + 1) if v not in value]
    inner = [e for e in pairs if e.i not in value and e.j not in value]
    for e in inner:
        if _rank(e, sig) == 1:
            raise OracleError(f"rank-1 edge {e.i} <-> {e.j} between unresolved parameters")
    inner = [e for e in inner if _rank(e, sig) == 2]
    forward = {(e.i, e.j): Weight2x2(*_weight_entries(e, sig)) for e in inner}
    g = EquationGraph(unknown, forward, equations={frozenset((e.i, e.j)): e for e in inner})
    comps = g.components()
    solutions = {}
    for comp in comps:
        sols = _component_solutions(g.subgraph(comp), sig)
        for v in comp:
            counts[v] = INFINITE if sols is None else len(sols)
            solutions[v] = None if sols is None else sorted({s[v] for s in sols})
    for v in value:
        solutions[v] = [value[v]]
    return SolutionCount(dict(sorted(counts.items())), comps, dict(sorted(solutions.items())))


def _weight_entries(e: MissingEdge, sig: dict) -> tuple:
    a, b, c, d = _coefficients(e, sig)
    return b, d, a, c


def _component_solutions(g: EquationGraph, sig: dict) -> Optional[list[dict]]:
    """Every solution of a component as {node: value}; None when there are infinitely many."""
    if len(g) == 1:
        return None
    identifying = None
    for cyc in enumerate_simple_cycles(g):
        if not walk_weight(g, cycle_edges(cyc)).is_scalar():
            identifying = cyc
            break
    if identifying is None:
        return None
    base = identifying[0]
    w = walk_weight(g, cycle_edges(identifying))
    out = []
    for x in _fixed_points(w):
        vals = _spread(g, base, x)
        if vals is not None and all(
                _residual(e, sig, vals[e.i], vals[e.j]) == 0 for e in g.equations.values()):
            out.append(vals)
    if not out:
        raise InconsistentSystem("no candidate solves every equation of the component")
    return out


def _component_count(g: EquationGraph, sig: dict) -> float:
    sols = _component_solutions(g, sig)
    return INFINITE if sols is None else len(sols)


def _spread(g: EquationGraph, base, x) -> Optional[dict]:
    """Values forced by ``base = x`` along a spanning tree; None at a pole."""
    vals = {base: Fraction(x)}
    stack = [base]
    while stack:
        u = stack.pop()
        for v in g.neighbors(u):
            if v in vals:
                continue
            w = g[(u, v)]
            den = w.a * vals[u] + w.c
            if den == 0:
                return None
            vals[v] = (w.b * vals[u] + w.d) / den
            stack.append(v)
    return vals


# symbolic checks (small models only) ----------------------------------------


def symbolic_sigma(m: TreeScm):
    """Covariances as exact polynomials in the model parameters.

    Returns ``(ring, sigma)`` where ``sigma[(i, j)]`` is an element of a
    sympy polynomial ring over QQ in variables l_i (lambda[parent[i], i]),
    w_i_i and w_u_v (omega).
    """
    from sympy import QQ
    from sympy.polys.rings import ring

    names = [f"l_{i}" for i in range(1, m.n + 1)]
    names += [f"w_{i}_{i}" for i in m.nodes]
    names += [f"w_{u}_{v}" for u, v in m.bidirected]
    R, *gens = ring(",".join(names), QQ)
    sym = dict(zip(names, gens))
    lam = {(m.parent[i], i): sym[f"l_{i}"] for i in range(1, m.n + 1)}
    omega = {(i, i): sym[f"w_{i}_{i}"] for i in m.nodes}
    omega.update({(u, v): sym[f"w_{u}_{v}"] for u, v in m.bidirected})
    a = ParamAssignment(lam, omega)
    # trek expansion with polynomial ring elements as the parameter values
    sig = {}
    for i in m.nodes:
        for j in m.nodes:
            if i <= j:
                sig[(i, j)] = sig[(j, i)] = R(sigma_trek_oracle(m, a, i, j))
    return R, sig


def symbolic_edge_rank(m: TreeScm, e: MissingEdge, sig: Optional[dict] = None) -> int:
    """Rank of the coefficient matrix from the expanded determinant polynomial."""
    if sig is None:
        _, sig = symbolic_sigma(m)
    i, j, p, q = e.i, e.j, e.p, e.q
    det = sig[(p, q)] * sig[(i, j)] - sig[(i, q)] * sig[(p, j)]
    if det != 0:
        return 2
    return 1 if any(sig[k] != 0 for k in ((p, q), (i, q), (p, j), (i, j))) else 0


def bilinear_factorizes(m: TreeScm, e: MissingEdge, sig: Optional[dict] = None) -> bool:
    """Whether the edge equation splits into a factor in x times a factor in y.

    Decided by full factorization with sympy over QQ, treating x, y and the
    model parameters as indeterminates.
    """
    from sympy import Poly, factor_list, symbols

    if sig is None:
        _, sig = symbolic_sigma(m)
    x, y = symbols("x y")
    i, j, p, q = e.i, e.j, e.p, e.q
    expr = (x * y * sig[(p, q)].as_expr() - x * sig[(p, j)].as_expr()
            - y * sig[(i, q)].as_expr() + sig[(i, j)].as_expr())
    if expr == 0:
        return True
    _, factors = factor_list(expr)
    return not any(Poly(f, x, y).degree(x) > 0 and Poly(f, x, y).degree(y) > 0
                   for f, _ in factors)
