"""
Runtime on a larger model
=========================

A random tree on 61 nodes with no bidirected edges, so every pair of nodes
contributes an equation.
"""

import random
import time

from treescm.identify import run_identification
from treescm.model import TreeScm
from treescm.pit import PitSession

rng = random.Random(60)
m = TreeScm(60, tuple([None] + [rng.randrange(i) for i in range(1, 61)]), ())

t0 = time.perf_counter()
rep = run_identification(m, PitSession(1))
print(f"{len(rep.results)} parameters in {time.perf_counter() - t0:.2f} s")
print("zero tests:", rep.tests, " error bound:", rep.error_spent)
print(sorted({r.provenance for r in rep.results.values()}))

# keep every root edge so nothing is fixed by a linear equation and the
# parameters must come from cycles of the equation graph
m = TreeScm(60, m.parent, tuple((0, i) for i in range(1, 61)))
t0 = time.perf_counter()
rep = run_identification(m, PitSession(1))
print(f"{len(rep.results)} parameters in {time.perf_counter() - t0:.2f} s")
print({s.value: sum(r.status is s for r in rep.results.values()) for s in {r.status for r in rep.results.values()}})
