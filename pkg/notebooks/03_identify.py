"""
Identifying every parameter
===========================

Run the full pipeline on three small models and compare with exact
solution counting.
"""

import random

from treescm.identify import report_to_text, run_identification
from treescm.model import M2, TreeScm
from treescm.oracle import count_solutions
from treescm.pit import PitSession

# three unknowns that only see each other: two solutions survive
two = TreeScm(3, (None, 0, 0, 2), ((0, 1), (0, 2), (0, 3)))
# a triangle with two roots plus an extra equation that keeps one of them
one = TreeScm(5, (None, 0, 1, 0, 1, 1), ((0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (1, 5), (2, 3)))

for name, m in (("M2", M2), ("two branches", two), ("one branch", one)):
    print("==", name)
    rep = run_identification(m, PitSession(seed=7))
    print(report_to_text(rep, limit=60))
    print("exact counts:", count_solutions(m, rng=random.Random(0)).counts)
