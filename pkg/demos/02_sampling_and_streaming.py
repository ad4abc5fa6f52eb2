"""
Greedy sampling, streaming and plateau stopping
===============================================

The offline sampler sees the whole matrix; the streaming one keeps only
the accepted snapshots. Both pick the same columns.
"""

import numpy as np

from mess import EpsilonRule, StopConfig, mess_sample, mess_sample_streaming
from mess.datagen import gen_plateau_stream, gen_random_walk

X = gen_random_walk(20, 300, seed=1)
res = mess_sample(X, EpsilonRule.relative(0.1))
print(f"eps_abs = {res.epsilon_abs:.3f}, kept {res.ell} of {res.n_seen} snapshots")

on = mess_sample_streaming(iter(X.T), res.epsilon_abs)
print("streaming selects the same columns:", np.array_equal(on.selected, res.selected))
print("streaming trace is a surrogate:", on.approximate)

# a stream that stops exploring: after a few centers it only revisits them
Y, centers = gen_plateau_stream(8, 5, 400, eps=1.0, seed=3, noise=0.9)
stopped = mess_sample(Y, 1.0, StopConfig(potential_tol=1e-3, window=10))
print("selected", stopped.selected, "plateau from j =", stopped.stop_index)
print("horizon", stopped.horizon.as_dict())
