"""
MESS against the truncated SVD at equal basis size
==================================================

POD is Frobenius-optimal, so it wins on the total error. MESS needs no
SVD and bounds the worst snapshot instead.
"""

import time

import numpy as np

from mess import EpsilonRule, mess_sample, orthonormalize, pod_basis, reconstruction_errors
from mess.datagen import gen_random_walk

X = gen_random_walk(2000, 400, seed=0)

t = time.process_time()
res = mess_sample(X, EpsilonRule.relative(0.1), method="gram")
B = orthonormalize(X[:, res.selected], method="householder")
t_mess = time.process_time() - t

t = time.process_time()
P = pod_basis(X, ell=B.ell)
t_svd = time.process_time() - t

for name, basis, secs in (("MESS", B, t_mess), ("POD ", P, t_svd)):
    rep = reconstruction_errors(X, basis, scale=res.diameter)
    print(f"{name} ell={basis.ell:3d}  max rel {rep.max_rel:.3e}  "
          f"frobenius rel {rep.frobenius / np.linalg.norm(X):.3e}  cpu {secs:.2f} s")
