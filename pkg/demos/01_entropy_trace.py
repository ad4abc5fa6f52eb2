"""
Recurrence matrices and the entropy trace
=========================================

Three points on a line, a radius of 1, and the potential/entropy sequence
that the sampler watches.
"""

import numpy as np

from mess import entropy_trace, pairwise_distances, recurrence_matrix

# snapshots are columns; here each is a one-dimensional state
X = np.array([[0.0, 0.5, 1.2]])
D = pairwise_distances(X)
print("distances\n", D)

# open balls: a pair is recurrent when its distance is strictly below eps
R = recurrence_matrix(D, 1.0)
print("recurrence matrix\n", R.astype(int))

# v_j is the share of recurrent pairs among the first j snapshots
tr = entropy_trace(R)
print("v   ", tr.v)
print("eta ", tr.eta)
print("h   ", tr.h)

# no recurrences at all means the largest possible entropy, log(j)
ident = entropy_trace(np.eye(5, dtype=bool))
print("identity eta matches log(j):", np.allclose(ident.eta, np.log(np.arange(1, 6))))
