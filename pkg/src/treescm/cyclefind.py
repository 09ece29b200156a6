"""The 2x2-matrix weighted equation graph and the search for identifying cycles.

Each rank-2 missing edge i <-> j gives a bilinear equation

    a*x*y - b*x + c*y - d = 0,   x = lambda[p, i], y = lambda[q, j],

with a = sigma[p,q], b = sigma[p,j], c = -sigma[i,q], d = -sigma[i,j].
Solving for y is the Mobius map of [[b, d], [a, c]]; solving for x is the
map of its adjugate [[c, -d], [-a, b]]. Along a walk the maps compose by
left multiplication, so a closed walk x1 -> ... -> x1 has weight
M_last ... M_first, and x1 satisfies a*x1**2 + (c - b)*x1 - d = 0 for the
entries of that product.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Optional, Sequence

import numpy as np

from . import expr as ex
from .covariance import sample_assignment, sigma_matrix
from .model import MissingEdge, TreeScm
from .pit import REPETITIONS, PitSession, matmul_mod


@dataclass(frozen=True)
class Weight2x2:
    """The matrix [[b, d], [a, c]] over ints, Fractions or :class:`Expr`."""

    b: object
    d: object
    a: object
    c: object

    @classmethod
    def of(cls, rows) -> "Weight2x2":
        (b, d), (a, c) = rows
        return cls(b, d, a, c)

    @classmethod
    def identity(cls, symbolic: bool = False) -> "Weight2x2":
        one, zero = (ex.ONE, ex.ZERO) if symbolic else (1, 0)
        return cls(one, zero, zero, one)

    def rows(self) -> list[list]:
        return [[self.b, self.d], [self.a, self.c]]

    def __matmul__(self, other: "Weight2x2") -> "Weight2x2":
        return Weight2x2(self.b * other.b + self.d * other.a,
                         self.b * other.d + self.d * other.c,
                         self.a * other.b + self.c * other.a,
                         self.a * other.d + self.c * other.c)

    def __add__(self, other: "Weight2x2") -> "Weight2x2":
        return Weight2x2(self.b + other.b, self.d + other.d, self.a + other.a, self.c + other.c)

    def scale(self, k) -> "Weight2x2":
        return Weight2x2(k * self.b, k * self.d, k * self.a, k * self.c)

    def adjoint(self) -> "Weight2x2":
        return Weight2x2(self.c, -self.d, -self.a, self.b)

    def det(self):
        return self.b * self.c - self.d * self.a

    def reduce(self, p: int) -> "Weight2x2":
        return Weight2x2(self.b % p, self.d % p, self.a % p, self.c % p)

    def map(self, fn: Callable) -> "Weight2x2":
        return Weight2x2(fn(self.b), fn(self.d), fn(self.a), fn(self.c))

    def scalar_witnesses(self) -> tuple:
        """Entries that all vanish iff the matrix is a multiple of the identity."""
        return self.a, self.d, self.b - self.c

    def is_scalar(self) -> bool:
        """Exact test for numeric entries."""
        return all(w == 0 for w in self.scalar_witnesses())


class CycleClass(enum.Enum):
    TWO_SOLUTIONS = "two-solutions"
    ONE_SOLUTION = "one-solution"
    NO_SOLUTION = "no-solution"
    INFINITE = "infinite"


def classify(w: Weight2x2, is_zero: Callable[[object], bool]) -> CycleClass:
    """Solution count of x = (b*x + d)/(a*x + c) for a closed-walk weight."""
    a, b, c, d = w.a, w.b, w.c, w.d
    if not is_zero(a):
        if is_zero((c - b) * (c - b) + 4 * a * d):
            return CycleClass.ONE_SOLUTION
        return CycleClass.TWO_SOLUTIONS
    if not is_zero(c - b):
        return CycleClass.ONE_SOLUTION
    if not is_zero(d):
        return CycleClass.NO_SOLUTION
    return CycleClass.INFINITE


def edge_coefficients(e: MissingEdge, sigma=None) -> tuple:
    """(a, b, c, d) of the edge equation; symbolic unless a sigma matrix is given."""
    i, j, p, q = e.i, e.j, e.p, e.q
    s = ex.sigma if sigma is None else (lambda u, v: sigma[u, v])
    return s(p, q), s(p, j), -s(i, q), -s(i, j)


def edge_weight(e: MissingEdge, forward: bool = True, sigma=None) -> Weight2x2:
    """Weight of i -> j (``forward``) or j -> i for the missing edge ``e``."""
    a, b, c, d = edge_coefficients(e, sigma)
    w = Weight2x2(b, d, a, c)
    return w if forward else w.adjoint()


def cycle_edges(nodes: Sequence) -> list[tuple]:
    """[x1, ..., xt] -> [(x1, x2), ..., (xt, x1)]."""
    return [(nodes[k], nodes[(k + 1) % len(nodes)]) for k in range(len(nodes))]


def walk_weight(weights, path: Sequence[tuple], symbolic: bool = False,
                modulus: Optional[int] = None) -> Weight2x2:
    """Ordered product M_(x_{t-1},x_t) ... M_(x_1,x_2) along a directed walk.

    ``weights`` maps directed edges to :class:`Weight2x2` (an
    :class:`EquationGraph` works too).
    """
    for (_, v), (u, _) in zip(path, path[1:]):
        if v != u:
            raise ValueError(f"walk is not contiguous at {v!r} -> {u!r}")
    acc = Weight2x2.identity(symbolic)
    for e in path:
        acc = weights[e] @ acc
        if modulus is not None:
            acc = acc.reduce(modulus)
    return acc


class EquationGraph:
    """Doubly directed graph of bilinear equations between unknowns.

    Parameters
    ----------
    nodes : sequence
        Unknowns, in the order used for every deterministic choice.
    forward : dict
        ``(u, v) -> Weight2x2`` for one direction of each equation; the
        reverse edge gets the adjugate.
    model : TreeScm, optional
        When weights contain sigma atoms, the model used to sample them.
    equations : dict, optional
        ``frozenset({u, v}) -> MissingEdge`` for graphs built from a model.
    """

    def __init__(self, nodes: Sequence[Hashable], forward: dict, model: Optional[TreeScm] = None,
                 equations: Optional[dict] = None):
        self.nodes = list(nodes)
        self.index = {v: k for k, v in enumerate(self.nodes)}
        self.model = model
        self.equations = equations or {}
        self.weights: dict = {}
        for (u, v), w in forward.items():
            if u == v:
                raise ValueError(f"self-loop at {u!r}")
            if (u, v) in self.weights or (v, u) in self.weights:
                raise ValueError(f"two equations between {u!r} and {v!r}")
            self.weights[(u, v)] = w
            self.weights[(v, u)] = w.adjoint()

    @classmethod
    def from_model(cls, m: TreeScm, edges: Iterable[MissingEdge],
                   nodes: Optional[Sequence[int]] = None) -> "EquationGraph":
        """Symbolic graph over lambda[parent[i], i] for the given rank-2 edges."""
        edges = list(edges)
        if nodes is None:
            nodes = sorted({e.i for e in edges} | {e.j for e in edges})
        keep = set(nodes)
        forward, equations = {}, {}
        for e in edges:
            if e.i in keep and e.j in keep:
                forward[(e.i, e.j)] = edge_weight(e)
                equations[frozenset((e.i, e.j))] = e
        return cls(nodes, forward, model=m, equations=equations)

    def __getitem__(self, edge: tuple) -> Weight2x2:
        return self.weights[edge]

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def edges(self) -> list[tuple]:
        """Directed edges in lexicographic (source, target) order of node positions."""
        return sorted(self.weights, key=lambda e: (self.index[e[0]], self.index[e[1]]))

    def neighbors(self, u) -> list:
        return sorted((v for (x, v) in self.weights if x == u), key=self.index.__getitem__)

    def subgraph(self, nodes: Sequence) -> "EquationGraph":
        keep = set(nodes)
        forward = {}
        for (u, v), w in self.weights.items():
            if u in keep and v in keep and (v, u) not in forward:
                forward[(u, v)] = w
        eqs = {k: e for k, e in self.equations.items() if k <= keep}
        return EquationGraph([v for v in self.nodes if v in keep], forward, self.model, eqs)

    def components(self) -> list[list]:
        """Connected components, each in node order, ordered by their first node."""
        seen, out = set(), []
        for s in self.nodes:
            if s in seen:
                continue
            comp, queue = [], deque([s])
            seen.add(s)
            while queue:
                u = queue.popleft()
                comp.append(u)
                for v in self.neighbors(u):
                    if v not in seen:
                        seen.add(v)
                        queue.append(v)
            out.append(sorted(comp, key=self.index.__getitem__))
        return out

    def weight_degree(self) -> int:
        """Degree bound of weight entries in the model parameters (0 for constants)."""
        if self.model is None:
            return 0
        deg = self.model.sigma_degree
        return max((ex.degree(x, deg) for w in self.weights.values()
                    for x in (w.b, w.d, w.a, w.c) if isinstance(x, ex.Expr)), default=0)

    def instantiate(self, session: PitSession) -> dict:
        """Weights at a fresh random parameter assignment, reduced into GF(p)."""
        P = session.prime
        if self.model is None:
            return {e: w.map(lambda x: _field_const(x, P)) for e, w in self.weights.items()}
        S = sigma_matrix(self.model, sample_assignment(self.model, session), P)
        cache: dict = {}
        lookup = lambda i, j: S[i, j]  # noqa: E731
        return {e: w.map(lambda x: ex.evaluate(x, lookup, P, cache) if isinstance(x, ex.Expr)
                         else _field_const(x, P))
                for e, w in self.weights.items()}


def _field_const(x, p: int) -> int:
    if isinstance(x, ex.Expr):
        return ex.evaluate(x, _no_sigma, p)
    return int(x) % p


def _no_sigma(i, j):
    raise ValueError("sigma atom in a graph without a model")


def draw_tags(g: EquationGraph, t: int, session: PitSession) -> list[dict]:
    """Random values for the tag variables of layers 1..t, one per directed edge."""
    edges = g.edges
    return [{e: session.rng.randrange(session.prime) for e in edges} for _ in range(t)]


def _layer(g: EquationGraph, numeric: dict, tags: dict, p: int,
           active: Optional[set] = None) -> np.ndarray:
    # block (target, source) holds tag * weight: left multiplication along walks
    c = len(g)
    A = np.zeros((2 * c, 2 * c), dtype=object)
    for e, w in numeric.items():
        if active is not None and e not in active:
            continue
        u, v = g.index[e[0]], g.index[e[1]]
        x = tags[e]
        A[2 * v, 2 * u] = x * w.b % p
        A[2 * v, 2 * u + 1] = x * w.d % p
        A[2 * v + 1, 2 * u] = x * w.a % p
        A[2 * v + 1, 2 * u + 1] = x * w.c % p
    return A


def _block(M: np.ndarray, target: int, source: int) -> Weight2x2:
    r, s = 2 * target, 2 * source
    return Weight2x2(M[r, s], M[r, s + 1], M[r + 1, s], M[r + 1, s + 1])


def layered_product(g: EquationGraph, t: int, session: PitSession, numeric: Optional[dict] = None,
                    tags: Optional[list] = None) -> list[list[Weight2x2]]:
    """Tag-weighted sums over all walks of length ``t``.

    Entry ``[i][j]`` is the sum over walks i -> ... -> j of
    ``x^(1)_(e1) ... x^(t)_(et) * M_et ... M_e1`` evaluated at random tag
    values (and, for model graphs, a random parameter point). It is computed
    as the product of the t per-layer block matrices.
    """
    P = session.prime
    numeric = g.instantiate(session) if numeric is None else numeric
    tags = draw_tags(g, t, session) if tags is None else tags
    c = len(g)
    prod = np.zeros((2 * c, 2 * c), dtype=object)
    for k in range(2 * c):
        prod[k, k] = 1
    for k in range(t):
        prod = matmul_mod(_layer(g, numeric, tags[k], P), prod, P)
    return [[_block(prod, j, i) for j in range(c)] for i in range(c)]


def _walk_degree(g: EquationGraph, t: int) -> int:
    return t * (g.weight_degree() + 1)


def has_identifying_walk(g: EquationGraph, node, t: int, session: PitSession,
                         repetitions: int = REPETITIONS) -> bool:
    """Whether ``node`` lies on a closed walk of length ``t`` whose weight is not scalar."""
    session.charge(_walk_degree(g, t))
    i = g.index[node]
    for _ in range(repetitions):
        numeric = g.instantiate(session)
        tags = draw_tags(g, t, session)
        if not _closed_block(g, numeric, tags, i, t, session.prime, None).is_scalar():
            return True
    return False


def _closed_block(g: EquationGraph, numeric: dict, tags: list, i: int, t: int, p: int,
                  active: Optional[set]) -> Weight2x2:
    """(i, i) block of the layered product restricted to ``active`` edges."""
    # sparse propagation of the two columns belonging to node i
    cur = {g.nodes[i]: (1, 0, 0, 1)}
    edges = [e for e in numeric if active is None or e in active]
    for k in range(t):
        nxt: dict = {}
        layer = tags[k]
        for (u, v) in edges:
            col = cur.get(u)
            if col is None:
                continue
            w, x = numeric[(u, v)], layer[(u, v)]
            b0, d0, a0, c0 = col
            nb = (w.b * b0 + w.d * a0) * x
            nd = (w.b * d0 + w.d * c0) * x
            na = (w.a * b0 + w.c * a0) * x
            nc = (w.a * d0 + w.c * c0) * x
            old = nxt.get(v)
            if old is None:
                nxt[v] = (nb % p, nd % p, na % p, nc % p)
            else:
                nxt[v] = ((old[0] + nb) % p, (old[1] + nd) % p, (old[2] + na) % p, (old[3] + nc) % p)
        cur = nxt
    b, d, a, c = cur.get(g.nodes[i], (0, 0, 0, 0))
    return Weight2x2(b, d, a, c)


@dataclass
class CycleSearch:
    """Outcome of the identifying-cycle search with the data needed for diagnostics."""

    cycle: Optional[list]
    length: Optional[int] = None
    tests: int = 0


def find_identifying_cycle(g: EquationGraph, session: PitSession,
                           repetitions: int = REPETITIONS) -> Optional[list]:
    """A simple identifying cycle of ``g`` as a node list, or None.

    Lengths t = 2, 3, ... are scanned with layered products until some node
    has a non-scalar closed-walk sum; edges are then deleted greedily in
    lexicographic order as long as such a walk survives. At the minimal t the
    surviving edges form a simple cycle.
    """
    return search_identifying_cycle(g, session, repetitions).cycle


def search_identifying_cycle(g: EquationGraph, session: PitSession,
                             repetitions: int = REPETITIONS) -> CycleSearch:
    c = len(g)
    if c < 3 or not g.weights:
        return CycleSearch(None)
    P = session.prime
    tests = 0
    for _ in range(repetitions):
        numeric = g.instantiate(session)
        tags = draw_tags(g, c, session)
        prod = np.zeros((2 * c, 2 * c), dtype=object)
        for k in range(2 * c):
            prod[k, k] = 1
        for t in range(1, c + 1):
            prod = matmul_mod(_layer(g, numeric, tags[t - 1], P), prod, P)
            if t < 2:
                continue
            session.charge(_walk_degree(g, t))
            tests += 1
            for i in range(c):
                if not _block(prod, i, i).is_scalar():
                    cycle = _self_reduce(g, numeric, tags, i, t, session)
                    _verify_cycle(g, cycle, session)
                    return CycleSearch(cycle, t, tests)
    return CycleSearch(None, None, tests)


def _distances(g: EquationGraph, active: set, start, reverse: bool) -> dict:
    dist = {start: 0}
    queue = deque([start])
    adj: dict = {}
    for (u, v) in active:
        a, b = (v, u) if reverse else (u, v)
        adj.setdefault(a, []).append(b)
    while queue:
        u = queue.popleft()
        for v in adj.get(u, ()):
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def _self_reduce(g: EquationGraph, numeric: dict, tags: list, i: int, t: int,
                 session: PitSession) -> list:
    P = session.prime
    root = g.nodes[i]
    active = set(numeric)
    # edges off every closed walk of length t through root can go without a test
    down = _distances(g, active, root, reverse=False)
    up = _distances(g, active, root, reverse=True)
    active = {(u, v) for (u, v) in active
              if u in down and v in up and down[u] + 1 + up[v] <= t}
    degree = _walk_degree(g, t)

    def survives(edges: set) -> bool:
        session.charge(degree)
        return not _closed_block(g, numeric, tags, i, t, P, edges).is_scalar()

    # Deleting a whole run of edges at once succeeds iff deleting them one by
    # one would; splitting failed runs reproduces the one-at-a-time outcome.
    def reduce(run: list) -> None:
        nonlocal active
        if not run:
            return
        trial = active - set(run)
        if survives(trial):
            active = trial
            return
        if len(run) > 1:
            mid = len(run) // 2
            reduce(run[:mid])
            reduce(run[mid:])

    order = [e for e in g.edges if e in active]
    reduce(order)

    succ = {}
    for (u, v) in active:
        if u in succ:
            raise RuntimeError("self-reduction left a branching walk; a zero test failed")
        succ[u] = v
    cycle, u = [root], succ.get(root)
    while u is not None and u != root and len(cycle) <= len(active):
        cycle.append(u)
        u = succ.get(u)
    if u != root or len(cycle) != len(active) or len(cycle) != t:
        raise RuntimeError("self-reduction did not end in a simple cycle; a zero test failed")
    return cycle


def _verify_cycle(g: EquationGraph, cycle: list, session: PitSession) -> None:
    path = cycle_edges(cycle)
    session.charge(len(cycle) * g.weight_degree())
    for _ in range(REPETITIONS):
        if not walk_weight(g.instantiate(session), path, modulus=session.prime).is_scalar():
            return
    raise RuntimeError(f"extracted cycle {cycle} is not identifying at fresh points")


def to_dot(g: EquationGraph, cycles: Iterable[Sequence] = (), name: str = "equations") -> str:
    """DOT rendering: one arrow per equation (its forward weight), cycle edges bold."""
    on_cycle = {e for c in cycles for e in cycle_edges(list(c))}
    lines = [f"digraph {name} {{"]
    for v in g.nodes:
        label = f"λ[{g.model.parent[v]},{v}]" if g.model is not None else str(v)
        lines.append(f'  "{v}" [label="{label}"];')
    done = set()
    for (u, v) in g.edges:
        if (v, u) in done:
            continue
        done.add((u, v))
        w = g.weights[(u, v)]
        label = "[[{}, {}], [{}, {}]]".format(*(_short(x) for x in (w.b, w.d, w.a, w.c)))
        style = ", penwidth=3, color=blue" if (u, v) in on_cycle or (v, u) in on_cycle else ""
        lines.append(f'  "{u}" -> "{v}" [label="{label}", dir=both{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _short(x) -> str:
    if isinstance(x, ex.Expr):
        try:
            return ex.render(x, limit=50)
        except ex.ExpressionTooLarge:
            return "…"
    return str(x)
