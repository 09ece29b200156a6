"""
Identifying cycles in an equation graph
=======================================

Four unknowns x, y, z, u linked by 2x2 weights. The triangle x-y-z closes to
the identity and fixes nothing; x-u-z closes to a non-scalar matrix and pins x
to the roots of a quadratic. The randomized search finds the second one.
"""

from treescm.cyclefind import EquationGraph, Weight2x2, cycle_edges, search_identifying_cycle, walk_weight
from treescm.fastp import eval_fastp, roots_from_cycle
from treescm.covariance import SigmaPoints
from treescm.pit import PitSession

W = Weight2x2.of
g = EquationGraph(["x", "y", "z", "u"], {
    ("x", "y"): W([[1, 0], [2, 1]]),
    ("y", "z"): W([[1, 0], [-2, 1]]),
    ("z", "x"): W([[1, 0], [0, 1]]),
    ("x", "u"): W([[1, 2], [2, 1]]),
    ("u", "z"): W([[1, -1], [0, 1]]),
})

for cyc in (["x", "y", "z"], ["x", "u", "z"]):
    w = walk_weight(g, cycle_edges(cyc))
    print(cyc, w, "scalar" if w.is_scalar() else "identifying")

for seed in range(3):
    res = search_identifying_cycle(g, PitSession(seed))
    print("seed", seed, "->", res.cycle, f"({res.tests} zero tests)")

# the base x solves x = (b x + d) / (a x + c)
w = walk_weight(g, cycle_edges(["x", "u", "z"]))
roots = roots_from_cycle(w, SigmaPoints.constant(PitSession(0)))
print([eval_fastp(roots.fastp, None, b) for b in (1, -1)])

with open("equation_graph.dot", "w") as fh:
    from treescm.cyclefind import to_dot
    fh.write(to_dot(g, [["x", "u", "z"]]))
