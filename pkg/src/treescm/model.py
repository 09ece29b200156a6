"""Tree-shaped mixed graphs and their missing bidirected edges."""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional, Union


class ModelError(ValueError):
    """Raised for malformed or non-tree model input."""


@dataclass(frozen=True)
class TreeScm:
    """A linear SCM whose directed part is a tree rooted at node 0.

    Attributes:
        `n`: largest node index; nodes are ``0..n``
        `parent`: ``parent[i]`` is the unique directed parent of ``i >= 1``;
            ``parent[0]`` is ``None``
        `bidirected`: sorted tuple of pairs ``(i, j)`` with ``i < j``
    """

    n: int
    parent: tuple
    bidirected: tuple
    order: tuple = field(init=False, repr=False, compare=False)
    depth: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        parent = tuple(self.parent)
        if len(parent) != self.n + 1:
            raise ModelError(f"parent array has length {len(parent)}, expected {self.n + 1}")
        if parent[0] is not None:
            raise ModelError("node 0 is the root and must have parent null")
        for i in range(1, self.n + 1):
            p = parent[i]
            if not isinstance(p, int) or isinstance(p, bool):
                raise ModelError(f"parent of node {i} must be an integer, got {p!r}")
            if not 0 <= p <= self.n:
                raise ModelError(f"parent of node {i} is out of range: {p}")
            if p == i:
                raise ModelError(f"node {i} is its own parent")

        children = [[] for _ in range(self.n + 1)]
        for i in range(1, self.n + 1):
            children[parent[i]].append(i)
        order, depth = [0], [0] * (self.n + 1)
        k = 0
        while k < len(order):
            u = order[k]
            for c in children[u]:
                depth[c] = depth[u] + 1
                order.append(c)
            k += 1
        if len(order) != self.n + 1:
            unreachable = sorted(set(range(self.n + 1)) - set(order))
            raise ModelError(f"directed part is not a tree rooted at 0; cycle through nodes {unreachable}")

        pairs = set()
        for e in self.bidirected:
            if len(e) != 2:
                raise ModelError(f"bidirected edge {e!r} must have two endpoints")
            i, j = e
            for v in (i, j):
                if not isinstance(v, int) or isinstance(v, bool) or not 0 <= v <= self.n:
                    raise ModelError(f"bidirected edge {e!r} has node index out of range")
            if i == j:
                raise ModelError(f"bidirected self-loop at node {i}")
            key = (min(i, j), max(i, j))
            if key in pairs:
                raise ModelError(f"duplicate bidirected edge {key[0]}<->{key[1]}")
            pairs.add(key)

        object.__setattr__(self, "parent", parent)
        object.__setattr__(self, "bidirected", tuple(sorted(pairs)))
        object.__setattr__(self, "order", tuple(order))
        object.__setattr__(self, "depth", tuple(depth))

    @property
    def nodes(self) -> range:
        return range(self.n + 1)

    @property
    def directed(self) -> list[tuple[int, int]]:
        """Directed edges ``(parent[i], i)`` in node order."""
        return [(self.parent[i], i) for i in range(1, self.n + 1)]

    def has_bidirected(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self._bset

    @property
    def _bset(self) -> frozenset:
        cached = self.__dict__.get("_bset_cache")
        if cached is None:
            cached = frozenset(self.bidirected)
            object.__setattr__(self, "_bset_cache", cached)
        return cached

    def ancestors(self, i: int) -> list[int]:
        """Nodes on the directed path from ``i`` up to the root, ``i`` first."""
        out = [i]
        while out[-1] != 0:
            out.append(self.parent[out[-1]])
        return out

    def sigma_degree(self, i: int, j: int) -> int:
        """Upper bound on the total degree of sigma[i, j] in the model parameters."""
        return self.depth[i] + self.depth[j] + 1

    def to_dict(self) -> dict:
        return {"n": self.n, "parent": list(self.parent), "bidirected": [list(e) for e in self.bidirected]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True, order=True)
class MissingEdge:
    """A non-root missing bidirected edge ``i <-> j`` with ``i < j``.

    The equation it induces relates lambda[p, i] and lambda[q, j].
    """

    i: int
    j: int
    p: int
    q: int

    @property
    def is_root(self) -> bool:
        return False


@dataclass(frozen=True, order=True)
class RootMissingEdge:
    """A missing edge ``0 <-> node``; it pins lambda[parent[node], node] linearly."""

    node: int

    @property
    def is_root(self) -> bool:
        return True


def parse_model(text: Union[str, bytes, dict]) -> TreeScm:
    """Parse the JSON model document ``{"n", "parent", "bidirected"}``."""
    if isinstance(text, dict):
        doc = text
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelError("model document must be a JSON object")
    for key in ("n", "parent"):
        if key not in doc:
            raise ModelError(f"model document lacks field {key!r}")
    n = doc["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise ModelError(f"n must be a non-negative integer, got {n!r}")
    parent = doc["parent"]
    if not isinstance(parent, list):
        raise ModelError("parent must be an array")
    bidirected = doc.get("bidirected", [])
    if not isinstance(bidirected, list) or not all(isinstance(e, list) for e in bidirected):
        raise ModelError("bidirected must be an array of pairs")
    return TreeScm(n=n, parent=tuple(parent), bidirected=tuple(tuple(e) for e in bidirected))


_DOT_EDGE = re.compile(r"(\w+)\s*(->|--)\s*(\w+)\s*(\[[^\]]*\])?")


def parse_dot(text: str) -> TreeScm:
    """Import a model from DOT.

    ``a -> b`` makes ``a`` the parent of ``b``; ``a -- b`` or
    ``a -> b [dir=both]`` is a bidirected edge. Node names must be the
    integers ``0..n``.
    """
    body = re.sub(r"//[^\n]*|#[^\n]*", "", text)
    body = body[body.find("{") + 1: body.rfind("}")] if "{" in body else body
    parents: dict[int, int] = {}
    bidirected = []
    seen = {0}
    for stmt in re.split(r"[;\n]", body):
        m = _DOT_EDGE.search(stmt)
        if not m:
            bare = stmt.strip().split("[")[0].strip()
            if bare.isdigit():
                seen.add(int(bare))
            continue
        a, op, b, attrs = m.groups()
        if not (a.isdigit() and b.isdigit()):
            raise ModelError(f"DOT node names must be integers: {stmt.strip()!r}")
        u, v = int(a), int(b)
        seen.update((u, v))
        both = attrs is not None and re.search(r"dir\s*=\s*\"?both", attrs)
        if op == "--" or both:
            bidirected.append((u, v))
        else:
            if v in parents:
                raise ModelError(f"node {v} has two directed parents ({parents[v]} and {u})")
            parents[v] = u
    n = max(seen)
    missing = [i for i in range(1, n + 1) if i not in parents]
    if missing:
        raise ModelError(f"nodes without a directed parent: {missing}")
    return TreeScm(n=n, parent=(None, *(parents[i] for i in range(1, n + 1))),
                   bidirected=tuple(bidirected))


def missing_edges(m: TreeScm) -> list[Union[RootMissingEdge, MissingEdge]]:
    """All unordered pairs absent from the bidirected set.

    Root-incident edges come first, then non-root ones, each in
    lexicographic order.
    """
    root = [RootMissingEdge(i) for i in range(1, m.n + 1) if not m.has_bidirected(0, i)]
    rest = [MissingEdge(i, j, m.parent[i], m.parent[j])
            for i, j in combinations(range(1, m.n + 1), 2) if not m.has_bidirected(i, j)]
    return root + rest


def random_model(n: int, density: float, rng: Optional[random.Random] = None,
                 parents: Optional[Iterable[int]] = None) -> TreeScm:
    """Random tree SCM: uniform recursive tree plus Bernoulli(density) bidirected edges."""
    rng = rng or random.Random()
    if parents is None:
        parent = (None, *(rng.randrange(i) for i in range(1, n + 1)))
    else:
        parent = (None, *parents)
    bidirected = tuple((i, j) for i, j in combinations(range(n + 1), 2) if rng.random() < density)
    return TreeScm(n=n, parent=parent, bidirected=bidirected)


M1 = TreeScm(n=2, parent=(None, 0, 1), bidirected=((1, 2),))
M2 = TreeScm(n=4, parent=(None, 0, 1, 0, 1), bidirected=((2, 4), (1, 4)))
