"""Identification of every lambda parameter of a tree SCM.

Steps: rank the missing edges, mark the parameters fixed by linear
root equations, split the rank-2 equation graph into components and solve
each one either from a mark or from an identifying cycle.
"""

from __future__ import annotations

import enum
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from . import expr as ex
from .covariance import SigmaPoints
from .cyclefind import (CycleClass, EquationGraph, cycle_edges, search_identifying_cycle,
                        walk_weight)
from .fastp import (Fastp, FastpError, common_root, denominator_norm, fastp_rational,
                    fastp_satisfies, finite_branch, propagate, roots_from_cycle, serialize_fastp)
from .model import MissingEdge, TreeScm, missing_edges
from .pit import PitSession
from .rank import EdgeRank, rank_table


class Status(enum.Enum):
    IDENTIFIABLE = "identifiable"
    TWO_IDENTIFIABLE = "2-identifiable"
    UNIDENTIFIABLE = "unidentifiable"


#: Rendered closed forms larger than this (after expanding shared nodes) are
#: emitted as a node table instead of infix text.
RENDER_LIMIT = 20000


@dataclass
class NodeResult:
    node: int
    status: Status
    fastp: Optional[Fastp] = None
    provenance: str = "none"

    @property
    def branches(self) -> int:
        return {Status.IDENTIFIABLE: 1, Status.TWO_IDENTIFIABLE: 2}.get(self.status, 0)


@dataclass
class ComponentInfo:
    nodes: list[int]
    kind: str
    seed: Optional[int] = None
    cycle: Optional[list[int]] = None
    cycle_class: Optional[str] = None
    discriminating_edge: Optional[tuple[int, int]] = None
    pole_node: Optional[int] = None


@dataclass
class IdentReport:
    model: TreeScm
    results: dict[int, NodeResult]
    ranks: list[EdgeRank]
    components: list[ComponentInfo]
    marks: dict[int, str]
    anomalies: list[str] = field(default_factory=list)
    seed: int = 0
    prime: int = 0
    tests: int = 0
    error_spent: float = 0.0

    def status(self, node: int) -> Status:
        return self.results[node].status

    def component_of(self, node: int) -> ComponentInfo:
        for c in self.components:
            if node in c.nodes:
                return c
        raise KeyError(node)


def root_identify(m: TreeScm, i: int, points: Optional[SigmaPoints] = None) -> Fastp:
    """lambda[p, i] = sigma[0, i] / sigma[0, p] when 0 <-> i is missing."""
    if i == 0 or m.has_bidirected(0, i):
        raise ValueError(f"node {i} has no missing root edge")
    return fastp_rational(ex.sigma(0, i), ex.sigma(0, m.parent[i]), points)


def rank1_marks(m: TreeScm, ranks: list[EdgeRank], points: Optional[SigmaPoints] = None,
                anomalies: Optional[list] = None) -> dict[int, Fastp]:
    """Marks contributed by rank-1 edges: their endpoints with a missing root edge.

    A rank-1 edge with neither root edge missing should not exist; it is
    reported in ``anomalies``. When ``points`` is given, at least one of the
    marks must turn the edge equation into the zero polynomial of the other
    variable; otherwise that is reported too.
    """
    out: dict[int, Fastp] = {}
    for er in ranks:
        if er.rank != 1:
            continue
        e = er.edge
        ends = [v for v in (e.i, e.j) if not m.has_bidirected(0, v)]
        if not ends and anomalies is not None:
            anomalies.append(f"rank-1 edge {e.i} <-> {e.j} has no endpoint with a missing root edge")
        for v in ends:
            out[v] = root_identify(m, v, points)
        if ends and points is not None and anomalies is not None:
            if not any(_annihilates(e, v, out[v], points) for v in ends):
                anomalies.append(f"no root solution makes the rank-1 edge {e.i} <-> {e.j} vanish")
    return out


def _annihilates(e: MissingEdge, v: int, f: Fastp, points: SigmaPoints) -> bool:
    # the equation reads x*(y*s_pq - s_pj) = y*s_iq - s_ij, or symmetrically in y;
    # the mark must make both sides vanish for every value of the other variable
    s = ex.sigma
    i, j, p, q = e.i, e.j, e.p, e.q
    if v == j:
        pairs = ((s(p, q), s(p, j)), (s(i, q), s(i, j)))
    else:
        pairs = ((s(p, q), s(i, q)), (s(p, j), s(i, j)))
    return all(points.is_zero(f.p * a - f.r * b) for a, b in pairs)


def _oriented_edge(g: EquationGraph, u: int, v: int) -> tuple[MissingEdge, bool]:
    """The equation between u and v and whether u plays the lambda[p, i] role."""
    e = g.equations[frozenset((u, v))]
    return e, e.i == u


def _propagate_step(g: EquationGraph, u: int, v: int, fu: Fastp, points: SigmaPoints) -> Fastp:
    e, u_is_i = _oriented_edge(g, u, v)
    return propagate(e, fu, points, forward=u_is_i)


def _satisfies(g: EquationGraph, u: int, v: int, fu: Fastp, fv: Fastp, points: SigmaPoints) -> bool:
    e, u_is_i = _oriented_edge(g, u, v)
    x, y = (fu, fv) if u_is_i else (fv, fu)
    return fastp_satisfies(x, y, e, points)


def bfs_tree(g: EquationGraph, component: list[int], seed: int) -> tuple[list[int], dict]:
    """Breadth-first order from ``seed`` and the parent of each reached node."""
    comp = set(component)
    order, parent = [seed], {seed: None}
    queue = deque([seed])
    while queue:
        u = queue.popleft()
        for v in g.neighbors(u):
            if v in comp and v not in parent:
                parent[v] = u
                order.append(v)
                queue.append(v)
    return order, parent


def propagate_component(g: EquationGraph, component: list[int], seed: int, seed_form: Fastp,
                        points: SigmaPoints, marks: Optional[dict] = None,
                        anomalies: Optional[list] = None) -> dict[int, Fastp]:
    """Closed forms for every node of ``component`` starting from ``seed``.

    Nodes carrying a mark keep it; the mark is checked against the equation
    to its tree parent and a failure goes to ``anomalies``.
    """
    marks = marks or {}
    order, parent = bfs_tree(g, component, seed)
    forms = {seed: seed_form}
    for v in order[1:]:
        u = parent[v]
        if v in marks:
            forms[v] = marks[v]
            if not _satisfies(g, u, v, forms[u], forms[v], points) and anomalies is not None:
                anomalies.append(f"marks of nodes {u} and {v} disagree on their equation")
        else:
            forms[v] = _propagate_step(g, u, v, forms[u], points)
    return forms


def _tree_path(parent: dict, v: int) -> list[int]:
    path = [v]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return path[::-1]


def _nodes_to_edges(nodes: list[int]) -> list[tuple]:
    return list(zip(nodes, nodes[1:]))


def run_identification(m: TreeScm, session: Optional[PitSession] = None) -> IdentReport:
    """Status and closed form of every lambda parameter of ``m``."""
    session = session if session is not None else PitSession()
    points = SigmaPoints(m, session)
    anomalies: list[str] = []

    ranks = rank_table(m, session, points)
    marks: dict[int, Fastp] = {}
    provenance: dict[int, str] = {}
    for e in missing_edges(m):
        if e.is_root:
            marks[e.node] = root_identify(m, e.node)
            provenance[e.node] = "root-edge"
    for v, f in rank1_marks(m, ranks, points, anomalies).items():
        marks.setdefault(v, f)
        provenance.setdefault(v, "rank-1")

    g = EquationGraph.from_model(m, [r.edge for r in ranks if r.rank == 2], nodes=range(1, m.n + 1))
    results: dict[int, NodeResult] = {}
    components: list[ComponentInfo] = []
    for comp in g.components():
        info = _solve_component(g, comp, marks, provenance, points, session, results, anomalies)
        components.append(info)

    return IdentReport(m, dict(sorted(results.items())), ranks, components,
                       {v: provenance[v] for v in sorted(provenance)}, anomalies,
                       seed=session.seed, prime=session.prime, tests=session.tests,
                       error_spent=float(session.spent))


def _solve_component(g, comp, marks, provenance, points, session, results, anomalies) -> ComponentInfo:
    def assign(forms: dict, status: Status, prov_of) -> None:
        for v in comp:
            results[v] = NodeResult(v, status, forms.get(v), prov_of(v))

    def unidentifiable() -> None:
        for v in comp:
            results[v] = NodeResult(v, Status.UNIDENTIFIABLE)

    marked = [v for v in comp if v in marks]
    if marked:
        seed = min(marked)
        try:
            forms = propagate_component(g, comp, seed, marks[seed], points, marks, anomalies)
        except FastpError as exc:
            anomalies.append(f"component {comp}: {exc}")
            unidentifiable()
            return ComponentInfo(comp, "degenerate", seed)
        assign(forms, Status.IDENTIFIABLE, lambda v: provenance.get(v, "propagation"))
        return ComponentInfo(comp, "marked", seed)

    if len(comp) == 1:
        unidentifiable()
        return ComponentInfo(comp, "isolated")

    sub = g.subgraph(comp)
    found = search_identifying_cycle(sub, session)
    if found.cycle is None:
        unidentifiable()
        return ComponentInfo(comp, "no-identifying-cycle")

    cycle = found.cycle
    base = cycle[0]
    w = walk_weight(sub, cycle_edges(cycle), symbolic=True)
    roots = roots_from_cycle(w, points)
    info = ComponentInfo(comp, "cycle", base, cycle, roots.kind.value)
    prov = lambda v: "cycle" if v == base else "propagation"  # noqa: E731

    if roots.kind in (CycleClass.NO_SOLUTION, CycleClass.INFINITE):
        anomalies.append(f"identifying cycle {cycle} classified as {roots.kind.value}")
        unidentifiable()
        return info
    try:
        forms = propagate_component(g, comp, base, roots.fastp, points)
        if roots.kind is CycleClass.ONE_SOLUTION:
            assign(forms, Status.IDENTIFIABLE, prov)
            return info
        pole = _first_pole(comp, forms, points)
        if pole is not None:
            # one branch sends this parameter to infinity, so only the other is a solution
            info.pole_node = pole
            seed = pole
            seed_form = finite_branch(forms[pole], points)
            prov = lambda v: "cycle" if v == seed else "propagation"  # noqa: E731
        else:
            bad = _first_violated(sub, forms, points)
            if bad is None:
                assign(forms, Status.TWO_IDENTIFIABLE, prov)
                return info
            # only one branch survives: intersect the cycle quadratic with the
            # quadratic of a closed walk through the violated equation
            info.discriminating_edge = bad
            _, parent = bfs_tree(g, comp, base)
            u, v = bad
            walk = (_nodes_to_edges(_tree_path(parent, u)) + [(u, v)]
                    + _nodes_to_edges(_tree_path(parent, v)[::-1]))
            w2 = walk_weight(sub, walk, symbolic=True)
            seed, seed_form = base, common_root(w, w2, points)
        forms = propagate_component(g, comp, seed, seed_form, points)
    except FastpError as exc:
        anomalies.append(f"component {comp}: {exc}")
        unidentifiable()
        info.kind = "degenerate"
        return info
    assign(forms, Status.IDENTIFIABLE, prov)
    return info


def _first_pole(comp: list[int], forms: dict, points: SigmaPoints) -> Optional[int]:
    for v in comp:
        if points.is_zero(denominator_norm(forms[v])):
            return v
    return None


def _first_violated(g: EquationGraph, forms: dict, points: SigmaPoints) -> Optional[tuple[int, int]]:
    for key in sorted(g.equations, key=lambda k: tuple(sorted(k))):
        e = g.equations[key]
        if not fastp_satisfies(forms[e.i], forms[e.j], e, points):
            return e.i, e.j
    return None


# output -------------------------------------------------------------------


def _fastp_json(f: Fastp, branches: int, limit: int) -> dict:
    try:
        if branches == 2:
            return {"fastp_pair": [serialize_fastp(f, 1, limit), serialize_fastp(f, -1, limit)]}
        return {"fastp": serialize_fastp(f, 1, limit)}
    except ex.ExpressionTooLarge:
        rows, roots = ex.to_table(*f.roots())
        return {"fastp_dag": {"nodes": rows, "p": roots[0], "q": roots[1], "r": roots[2],
                              "t": roots[3], "s": roots[4], "branches": branches}}


def report_to_dict(rep: IdentReport, limit: int = RENDER_LIMIT) -> dict:
    m = rep.model
    nodes = []
    for v, res in rep.results.items():
        item = {"node": v, "parameter": f"λ[{m.parent[v]},{v}]", "status": res.status.value,
                "provenance": res.provenance}
        if res.fastp is not None:
            item.update(_fastp_json(res.fastp, res.branches, limit))
        nodes.append(item)
    comps = []
    for c in rep.components:
        d = {"nodes": c.nodes, "kind": c.kind}
        if c.seed is not None:
            d["seed"] = c.seed
        if c.cycle is not None:
            d["cycle"] = c.cycle
            d["cycle_class"] = c.cycle_class
        if c.pole_node is not None:
            d["pole_node"] = c.pole_node
        if c.discriminating_edge is not None:
            d["discriminating_edge"] = list(c.discriminating_edge)
        comps.append(d)
    return {
        "model": m.to_dict(),
        "nodes": nodes,
        "diagnostics": {
            "edge_ranks": [{"edge": [r.edge.i, r.edge.j], "rank": r.rank} for r in rep.ranks],
            "components": comps,
            "marks": [{"node": v, "provenance": p} for v, p in rep.marks.items()],
            "anomalies": rep.anomalies,
            "pit": {"seed": rep.seed, "prime": rep.prime, "tests": rep.tests,
                    "error_bound": rep.error_spent},
        },
    }


def report_to_json(rep: IdentReport, limit: int = RENDER_LIMIT) -> str:
    return json.dumps(report_to_dict(rep, limit), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def report_to_text(rep: IdentReport, limit: int = RENDER_LIMIT) -> str:
    d = report_to_dict(rep, limit)
    lines = []
    for item in d["nodes"]:
        head = f"{item['parameter']:<12} {item['status']:<15} [{item['provenance']}]"
        if "fastp" in item:
            head += f"  {item['fastp']}"
        elif "fastp_pair" in item:
            head += "  " + "  |  ".join(item["fastp_pair"])
        elif "fastp_dag" in item:
            head += f"  <closed form with {len(item['fastp_dag']['nodes'])} shared nodes>"
        lines.append(head)
    diag = d["diagnostics"]
    for c in diag["components"]:
        extra = f" through {c['cycle']} ({c['cycle_class']})" if "cycle" in c else ""
        if "discriminating_edge" in c:
            extra += f", one root kept by equation {c['discriminating_edge']}"
        if "pole_node" in c:
            extra += f", other root has a pole at node {c['pole_node']}"
        lines.append(f"component {c['nodes']}: {c['kind']}{extra}")
    for a in diag["anomalies"]:
        lines.append(f"anomaly: {a}")
    pit = diag["pit"]
    lines.append(f"zero tests: {pit['tests']}, error bound {pit['error_bound']:.3g}")
    return "\n".join(lines) + "\n"
