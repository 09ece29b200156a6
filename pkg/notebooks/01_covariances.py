"""
Covariances of a tree model
===========================

Build the instrumental-variable model 0 -> 1 -> 2 with 1 <-> 2, compute its
covariance matrix at a rational parameter point and check it against the
trek sum.
"""

import random

from treescm.covariance import rational_assignment, sigma_matrix, sigma_trek_oracle
from treescm.model import M1

a = rational_assignment(M1, random.Random(1), bound=9)
print("lambda:", {k: str(v) for k, v in a.lam.items()})
print("omega: ", {k: str(v) for k, v in a.omega.items()})

S = sigma_matrix(M1, a)
print(S)

# every entry is also a sum over treks
print(all(S[i, j] == sigma_trek_oracle(M1, a, i, j) for i in M1.nodes for j in M1.nodes))

# lambda[1,2] is the instrument ratio
print(S[0, 2] / S[0, 1] == a.lam[(1, 2)])
