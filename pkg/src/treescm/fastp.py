"""Closed forms (p + q*sqrt(s)) / (r + t*sqrt(s)) over covariance circuits.

A :class:`Fastp` with ``q = t = 0`` is rational; ``s`` is then the shared
zero node. Square roots are never taken symbolically: ``sqrt(s)`` is a formal
symbol tau with tau**2 = s, and identities are decided by random evaluation.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import expr as ex
from .covariance import SigmaPoints
from .cyclefind import CycleClass, Weight2x2, classify
from .model import MissingEdge
from .pit import inv, sqrt_mod


class FastpError(ValueError):
    """A zero denominator or an otherwise malformed closed form."""


class DegeneratePropagation(FastpError):
    """The propagated denominator vanishes identically."""


@dataclass(frozen=True, eq=False)
class Fastp:
    p: ex.Expr
    q: ex.Expr
    r: ex.Expr
    t: ex.Expr
    s: ex.Expr

    @property
    def is_rational(self) -> bool:
        return self.q.is_zero_const and self.t.is_zero_const

    def numerator(self) -> tuple[ex.Expr, ex.Expr]:
        return self.p, self.q

    def denominator(self) -> tuple[ex.Expr, ex.Expr]:
        return self.r, self.t

    def roots(self) -> tuple[ex.Expr, ...]:
        return self.p, self.q, self.r, self.t, self.s


def fastp_rational(num: ex.Expr, den: ex.Expr, points: Optional[SigmaPoints] = None) -> Fastp:
    """``num / den`` as a closed form; ``den`` is zero-tested when ``points`` is given."""
    num, den = ex.lift(num), ex.lift(den)
    if den.is_zero_const or (points is not None and points.is_zero(den)):
        raise FastpError("denominator is identically zero")
    return Fastp(num, ex.ZERO, den, ex.ZERO, ex.ZERO)


ZERO_FASTP = Fastp(ex.ZERO, ex.ZERO, ex.ONE, ex.ZERO, ex.ZERO)


@dataclass
class CycleRoots:
    """Solutions of the fixed-point equation of a closed-walk weight.

    ``fastp`` holds one closed form; when ``branches`` is 2 the two solutions
    are its + and - square-root branches.
    """

    kind: CycleClass
    fastp: Optional[Fastp] = None
    branches: int = 0


def roots_from_cycle(w: Weight2x2, points: SigmaPoints) -> CycleRoots:
    """Solve x = (b*x + d)/(a*x + c) for a symbolic closed-walk weight.

    The roots of a*x**2 + (c - b)*x - d are (-(c - b) +- sqrt(D)) / (2a) with
    D = (c - b)**2 + 4ad. Only vanishing of D matters, never its sign.
    """
    a, b, c, d = (ex.lift(x) for x in (w.a, w.b, w.c, w.d))
    kind = classify(Weight2x2(b, d, a, c), points.is_zero)
    cb = c - b
    if kind is CycleClass.TWO_SOLUTIONS:
        disc = cb * cb + 4 * a * d
        return CycleRoots(kind, Fastp(-cb, ex.ONE, 2 * a, ex.ZERO, disc), 2)
    if kind is CycleClass.ONE_SOLUTION:
        if not points.is_zero(a):
            # double root
            return CycleRoots(kind, fastp_rational(-cb, 2 * a), 1)
        return CycleRoots(kind, fastp_rational(d, cb), 1)
    return CycleRoots(kind)


def _edge_sigmas(e: MissingEdge):
    i, j, p, q = e.i, e.j, e.p, e.q
    s = ex.sigma
    return s(p, q), s(p, j), s(i, q), s(i, j)


def propagate(e: MissingEdge, y: Fastp, points: SigmaPoints, forward: bool = False) -> Fastp:
    """Closed form for the other endpoint of ``e`` through its equation.

    By default ``y`` is lambda[q, j] and the result is lambda[p, i]; with
    ``forward`` the roles swap. The square-root term ``s`` is reused as is.
    """
    spq, spj, siq, sij = _edge_sigmas(e)
    u, v, r, t = y.p, y.q, y.r, y.t
    if forward:
        # lambda[q,j] = (x*s_pj - s_ij) / (x*s_pq - s_iq)
        num_a, num_b, den_a, den_b = spj, sij, spq, siq
    else:
        # lambda[p,i] = (y*s_iq - s_ij) / (y*s_pq - s_pj)
        num_a, num_b, den_a, den_b = siq, sij, spq, spj
    p_new = u * num_a - r * num_b
    q_new = v * num_a - t * num_b
    r_new = u * den_a - r * den_b
    t_new = v * den_a - t * den_b
    if points.is_zero(r_new) and points.is_zero(t_new):
        raise DegeneratePropagation(f"propagation through {e.i} <-> {e.j} divides by zero")
    return Fastp(p_new, q_new, r_new, t_new, y.s)


def _times(x: tuple, y: tuple, s: ex.Expr) -> tuple:
    # (A + B tau)(C + D tau) with tau**2 = s
    (a, b), (c, d) = x, y
    return a * c + b * d * s, a * d + b * c


def satisfaction_residual(x: Fastp, y: Fastp, e: MissingEdge) -> tuple[ex.Expr, ex.Expr]:
    """(u, v) with the edge equation at (x, y), denominators cleared, equal to u + v*tau."""
    if x.s is not y.s and not (x.is_rational or y.is_rational):
        raise FastpError("closed forms with different square-root terms")
    s = y.s if x.is_rational else x.s
    spq, spj, siq, sij = _edge_sigmas(e)
    nx, dx = x.numerator(), x.denominator()
    ny, dy = y.numerator(), y.denominator()
    terms = [(spq, _times(nx, ny, s)), (-spj, _times(nx, dy, s)),
             (-siq, _times(dx, ny, s)), (sij, _times(dx, dy, s))]
    u = v = ex.ZERO
    for k, (cu, cv) in terms:
        u = u + k * cu
        v = v + k * cv
    return u, v


def fastp_satisfies(x: Fastp, y: Fastp, e: MissingEdge, points: SigmaPoints) -> bool:
    """Whether x = lambda[p, i], y = lambda[q, j] satisfy the equation of ``e``.

    Both the rational part and the tau part must vanish identically, so for
    irrational forms this holds exactly when both conjugate branches satisfy it.
    """
    u, v = satisfaction_residual(x, y, e)
    return points.is_zero(u) and points.is_zero(v)


def common_root(w1: Weight2x2, w2: Weight2x2, points: SigmaPoints) -> Fastp:
    """The shared root of the fixed-point quadratics of two closed walks at one node.

    Eliminating x**2 from a1*x**2 + (c1-b1)*x - d1 and a2*x**2 + (c2-b2)*x - d2
    leaves a linear equation; its solution is the common root whenever the
    quadratics are not proportional.
    """
    a1, b1, c1, d1 = (ex.lift(x) for x in (w1.a, w1.b, w1.c, w1.d))
    a2, b2, c2, d2 = (ex.lift(x) for x in (w2.a, w2.b, w2.c, w2.d))
    num = a2 * d1 - a1 * d2
    den = a2 * (c1 - b1) - a1 * (c2 - b2)
    return fastp_rational(num, den, points)


def denominator_norm(f: Fastp) -> ex.Expr:
    """(r + t*sqrt(s)) * (r - t*sqrt(s)); it vanishes iff some branch sits at a pole."""
    return f.r * f.r - f.t * f.t * f.s


def finite_branch(f: Fastp, points: SigmaPoints) -> Fastp:
    """Rational form of the branch of ``f`` whose denominator does not vanish.

    Requires the denominator norm to vanish while r and t do not: then on the
    other branch sqrt(s) = -r/t up to sign, and on this one the value is
    (p*t + q*r) / (2*r*t).
    """
    return fastp_rational(f.p * f.t + f.q * f.r, 2 * f.r * f.t, points)


# evaluation ---------------------------------------------------------------


def _exact_sqrt(x: Fraction) -> Optional[Fraction]:
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def eval_fastp(f: Fastp, sigma, branch: int = 1, modulus: Optional[int] = None):
    """Value of ``f`` at the covariance matrix ``sigma`` on the given branch.

    In field mode (``modulus``) the square root is the smaller field root and
    ``branch`` picks its sign. Otherwise ``sigma`` holds ints/Fractions/floats;
    rational radicands with rational roots stay exact, others become floats.
    """
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    lookup = lambda i, j: sigma[i, j]  # noqa: E731
    cache: dict = {}
    p, q, r, t = (ex.evaluate(x, lookup, modulus, cache) for x in (f.p, f.q, f.r, f.t))
    if f.is_rational:
        root = 0
    else:
        s = ex.evaluate(f.s, lookup, modulus, cache)
        if modulus is not None:
            root = sqrt_mod(s, modulus)
            if root is None:
                raise FastpError("radicand is not a square in the field")
        else:
            if s < 0:
                raise FastpError("negative radicand")
            root = _exact_sqrt(Fraction(s)) if isinstance(s, (int, Fraction)) else None
            if root is None:
                root = math.sqrt(s)
        root = branch * root
    num, den = p + q * root, r + t * root
    if modulus is not None:
        den %= modulus
        if den == 0:
            raise FastpError("denominator vanishes at this point")
        return num * inv(den, modulus) % modulus
    if den == 0:
        raise FastpError("denominator vanishes at this point")
    if isinstance(num, (int, Fraction)) and isinstance(den, (int, Fraction)):
        return Fraction(num) / Fraction(den)
    return num / den


# text form ----------------------------------------------------------------


def serialize_fastp(f: Fastp, branch: int = 1, limit: Optional[int] = None) -> str:
    """Infix text; raises :class:`expr.ExpressionTooLarge` past ``limit`` nodes."""
    if f.is_rational:
        return f"{ex.render(f.p, limit)}/{ex.render(f.r, limit)}"
    sign = "+" if branch == 1 else "-"
    root = f"sqrt({ex.render(f.s, limit)})"

    def part(a: ex.Expr, b: ex.Expr) -> str:
        if b.is_zero_const:
            return ex.render(a, limit)
        return f"({ex.render(a, limit)}{sign}({ex.render(b, limit)}*{root}))"
    return f"{part(f.p, f.q)}/{part(f.r, f.t)}"


_TOKEN = re.compile(r"\s*(σ\[\s*\d+\s*,\s*\d+\s*\]|\d+|sqrt|[-+*/()])")


def _tokens(text: str) -> list[str]:
    out, pos = [], 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FastpError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


class _Parser:
    """Recursive descent into values A + B*tau, tau the one square root."""

    def __init__(self, text: str):
        self.toks = _tokens(text)
        self.k = 0
        self.s: Optional[ex.Expr] = None

    def peek(self) -> Optional[str]:
        return self.toks[self.k] if self.k < len(self.toks) else None

    def take(self, want: Optional[str] = None) -> str:
        tok = self.peek()
        if tok is None or (want is not None and tok != want):
            raise FastpError(f"expected {want or 'a token'}, got {tok!r}")
        self.k += 1
        return tok

    def sum(self) -> tuple:
        a, b = self.product()
        while self.peek() in ("+", "-"):
            op = self.take()
            c, d = self.product()
            if op == "-":
                c, d = -c, -d
            a, b = a + c, b + d
        return a, b

    def product(self) -> tuple:
        x = self.unary()
        while self.peek() == "*":
            self.take()
            y = self.unary()
            if not (x[1].is_zero_const or y[1].is_zero_const) and self.s is None:
                raise FastpError("product of square roots without a radicand")
            x = _times(x, y, self.s if self.s is not None else ex.ZERO)
        return x

    def unary(self) -> tuple:
        if self.peek() == "-":
            self.take()
            a, b = self.unary()
            return -a, -b
        return self.atom()

    def atom(self) -> tuple:
        tok = self.take()
        if tok == "(":
            v = self.sum()
            self.take(")")
            return v
        if tok == "sqrt":
            self.take("(")
            a, b = self.sum()
            self.take(")")
            if not b.is_zero_const:
                raise FastpError("nested square roots")
            if self.s is None:
                self.s = a
            elif ex.render(self.s) != ex.render(a):
                raise FastpError("more than one distinct square root")
            return ex.ZERO, ex.ONE
        if tok.startswith("σ"):
            i, j = (int(v) for v in tok[2:-1].split(","))
            return ex.sigma(i, j), ex.ZERO
        if tok.isdigit():
            return ex.const(int(tok)), ex.ZERO
        raise FastpError(f"unexpected token {tok!r}")


def parse_fastp(text: str) -> Fastp:
    """Inverse of :func:`serialize_fastp` (the + branch)."""
    parser = _Parser(text)
    p, q = parser.sum()
    if parser.peek() == "/":
        parser.take()
        r, t = parser.sum()
    else:
        r, t = ex.ONE, ex.ZERO
    if parser.peek() is not None:
        raise FastpError(f"trailing input at token {parser.peek()!r}")
    s = parser.s if parser.s is not None else ex.ZERO
    if q.is_zero_const and t.is_zero_const:
        s = ex.ZERO
    if r.is_zero_const and t.is_zero_const:
        raise FastpError("denominator is identically zero")
    return Fastp(p, q, r, t, s)
