"""Arithmetic circuits over covariance symbols with structural sharing.

Nodes are immutable; children are referenced, never copied, so products of
long chains of 2x2 matrices stay linear in size. No algebraic simplification
is attempted beyond folding the neutral constants 0 and 1; equality of two
circuits is decided by evaluation, not by normal forms.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, Iterator, Optional

SIGMA, CONST, ADD, MUL, NEG = "sigma", "const", "add", "mul", "neg"


class Expr:
    __slots__ = ("op", "args", "value", "__weakref__")

    def __init__(self, op: str, args: tuple = (), value=None):
        self.op = op
        self.args = args
        self.value = value

    # construction -------------------------------------------------------

    def __add__(self, other) -> "Expr":
        return add(self, lift(other))

    __radd__ = __add__

    def __mul__(self, other) -> "Expr":
        return mul(self, lift(other))

    __rmul__ = __mul__

    def __neg__(self) -> "Expr":
        return neg(self)

    def __sub__(self, other) -> "Expr":
        return add(self, neg(lift(other)))

    def __rsub__(self, other) -> "Expr":
        return add(lift(other), neg(self))

    def __repr__(self) -> str:
        try:
            return f"Expr({render(self, limit=200)})"
        except ExpressionTooLarge:
            return f"Expr(<{size(self)} nodes>)"

    @property
    def is_zero_const(self) -> bool:
        return self.op == CONST and self.value == 0


class ExpressionTooLarge(ValueError):
    """The infix rendering would exceed the requested limit."""


def sigma(i: int, j: int) -> Expr:
    """The shared atom for sigma[i, j] (symmetric)."""
    return _sigma(i, j) if i <= j else _sigma(j, i)


@lru_cache(maxsize=None)
def _sigma(i: int, j: int) -> Expr:
    return Expr(SIGMA, (), (i, j))


@lru_cache(maxsize=1024)
def const(k: int) -> Expr:
    if not isinstance(k, int):
        raise TypeError(f"constants are integers, got {k!r}")
    return Expr(CONST, (), k)


ZERO = const(0)
ONE = const(1)


def lift(x) -> Expr:
    return x if isinstance(x, Expr) else const(int(x))


def add(a: Expr, b: Expr) -> Expr:
    if a.is_zero_const:
        return b
    if b.is_zero_const:
        return a
    if a.op == CONST and b.op == CONST:
        return const(a.value + b.value)
    return Expr(ADD, (a, b))


def mul(a: Expr, b: Expr) -> Expr:
    if a.is_zero_const or b.is_zero_const:
        return ZERO
    if a.op == CONST and a.value == 1:
        return b
    if b.op == CONST and b.value == 1:
        return a
    if a.op == CONST and b.op == CONST:
        return const(a.value * b.value)
    return Expr(MUL, (a, b))


def neg(a: Expr) -> Expr:
    if a.op == CONST:
        return const(-a.value)
    if a.op == NEG:
        return a.args[0]
    return Expr(NEG, (a,))


def postorder(*roots: Expr) -> Iterator[Expr]:
    """Each reachable node once, children before parents."""
    seen: set[int] = set()
    for root in roots:
        if id(root) in seen:
            continue
        stack = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                yield node
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for child in reversed(node.args):
                if id(child) not in seen:
                    stack.append((child, False))


def size(*roots: Expr) -> int:
    """Number of distinct nodes reachable from ``roots``."""
    return sum(1 for _ in postorder(*roots))


def evaluate(root: Expr, sigma_value: Callable[[int, int], object], modulus: Optional[int] = None,
             cache: Optional[dict] = None):
    """Value of ``root`` with sigma[i, j] replaced by ``sigma_value(i, j)``.

    With ``modulus`` the arithmetic is over GF(modulus); otherwise it is the
    native arithmetic of the supplied values (int, Fraction, float, ...).
    ``cache`` maps nodes to values and may be shared between calls
    evaluating at the same point.
    """
    memo = {} if cache is None else cache
    for node in postorder(root):
        key = node
        if key in memo:
            continue
        op = node.op
        if op == SIGMA:
            v = sigma_value(*node.value)
        elif op == CONST:
            v = node.value
        elif op == ADD:
            v = memo[node.args[0]] + memo[node.args[1]]
        elif op == MUL:
            v = memo[node.args[0]] * memo[node.args[1]]
        else:
            v = -memo[node.args[0]]
        if modulus is not None:
            v %= modulus
        memo[key] = v
    return memo[root]


def degree(root: Expr, sigma_degree: Callable[[int, int], int], cache: Optional[dict] = None) -> int:
    """Upper bound on the total degree once sigma[i, j] has degree ``sigma_degree(i, j)``."""
    memo = {} if cache is None else cache
    for node in postorder(root):
        key = node
        if key in memo:
            continue
        if node.op == SIGMA:
            d = sigma_degree(*node.value)
        elif node.op == CONST:
            d = 0
        elif node.op == MUL:
            d = memo[node.args[0]] + memo[node.args[1]]
        else:
            d = max(memo[c] for c in node.args)
        memo[key] = d
    return memo[root]


def tree_size(root: Expr) -> int:
    """Number of nodes after expanding all sharing (the rendered length, roughly)."""
    memo: dict[int, int] = {}
    for node in postorder(root):
        memo[id(node)] = 1 + sum(memo[id(c)] for c in node.args)
    return memo[id(root)]


def render(root: Expr, limit: Optional[int] = None) -> str:
    """Fully parenthesised infix text: atoms ``σ[i,j]``, integers as ``(k)``."""
    if limit is not None and tree_size(root) > limit:
        raise ExpressionTooLarge(f"expression expands to more than {limit} nodes")
    memo: dict[int, str] = {}
    for node in postorder(root):
        op = node.op
        if op == SIGMA:
            s = "σ[%d,%d]" % node.value
        elif op == CONST:
            s = f"({node.value})"
        elif op == ADD:
            s = f"({memo[id(node.args[0])]}+{memo[id(node.args[1])]})"
        elif op == MUL:
            s = f"({memo[id(node.args[0])]}*{memo[id(node.args[1])]})"
        else:
            s = f"(-{memo[id(node.args[0])]})"
        memo[id(node)] = s
    return memo[id(root)]


def to_table(*roots: Expr) -> tuple[list[list], list[int]]:
    """Shared-node table ``[op, ...]`` plus indices of ``roots``; children precede parents."""
    index: dict[int, int] = {}
    rows: list[list] = []
    for node in postorder(*roots):
        if node.op == SIGMA:
            row = [SIGMA, *node.value]
        elif node.op == CONST:
            row = [CONST, node.value]
        else:
            row = [node.op, *(index[id(c)] for c in node.args)]
        index[id(node)] = len(rows)
        rows.append(row)
    return rows, [index[id(r)] for r in roots]


def from_table(rows: list[list]) -> list[Expr]:
    nodes: list[Expr] = []
    for row in rows:
        op = row[0]
        if op == SIGMA:
            nodes.append(sigma(row[1], row[2]))
        elif op == CONST:
            nodes.append(const(row[1]))
        elif op in (ADD, MUL):
            nodes.append(Expr(op, (nodes[row[1]], nodes[row[2]])))
        elif op == NEG:
            nodes.append(Expr(NEG, (nodes[row[1]],)))
        else:
            raise ValueError(f"unknown node kind {op!r}")
    return nodes
