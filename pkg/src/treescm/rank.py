"""Generic rank of the 2x2 coefficient matrix of each missing edge."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .covariance import SigmaPoints
from .model import MissingEdge, TreeScm, missing_edges
from .pit import PitSession


@dataclass(frozen=True)
class EdgeRank:
    edge: MissingEdge
    rank: int


def coefficient_entries(e: MissingEdge) -> tuple:
    """Index pairs of [[sigma_pq, sigma_iq], [sigma_pj, sigma_ij]], row-major."""
    i, j, p, q = e.i, e.j, e.p, e.q
    return (p, q), (i, q), (p, j), (i, j)


def edge_rank(m: TreeScm, e: MissingEdge, session: PitSession,
              points: Optional[SigmaPoints] = None) -> EdgeRank:
    """Rank of the coefficient matrix of ``e`` over the rational function field.

    The determinant is tested first; a nonzero value at any point proves
    rank 2. Otherwise any nonzero entry proves rank 1.
    """
    if e.is_root:
        raise ValueError("root-incident missing edges carry no 2x2 matrix")
    pts = points if points is not None else SigmaPoints(m, session)
    (pq, iq, pj, ij) = coefficient_entries(e)
    deg = m.sigma_degree
    det_degree = max(deg(*pq) + deg(*ij), deg(*iq) + deg(*pj))
    P = pts.prime

    pts.session.charge(det_degree)
    for S in pts.sigmas:
        if (S[pq] * S[ij] - S[iq] * S[pj]) % P:
            return EdgeRank(e, 2)
    for idx in (pq, iq, pj, ij):
        pts.session.charge(deg(*idx))
        if any(S[idx] % P for S in pts.sigmas):
            return EdgeRank(e, 1)
    return EdgeRank(e, 0)


def rank_table(m: TreeScm, session: PitSession, points: Optional[SigmaPoints] = None) -> list[EdgeRank]:
    """Ranks of all non-root missing edges, in lexicographic edge order."""
    pts = points if points is not None else SigmaPoints(m, session)
    return [edge_rank(m, e, session, pts) for e in missing_edges(m) if not e.is_root]
