"""
Galerkin reduced model of the brusselator
=========================================

The reduced state follows the projected vector field. MESS and POD bases
of the same size are compared along the trajectory.
"""

import numpy as np

from mess import EpsilonRule, mess_sample, orthonormalize, pod_basis
from mess.datagen import BrusselatorConfig, galerkin_rom_demo, gen_brusselator

cfg = BrusselatorConfig(grid_points=40, t_end=10.0, n_snapshots=200)
X = gen_brusselator(cfg)

res = mess_sample(X, EpsilonRule.relative(0.1))
bases = {"MESS": orthonormalize(X[:, res.selected])}
bases["POD"] = pod_basis(X, ell=bases["MESS"].ell)

for name, B in bases.items():
    full, lifted = galerkin_rom_demo(cfg, B, full=X)
    err = np.linalg.norm(full - lifted, axis=0) / np.linalg.norm(full, axis=0)
    print(f"{name} ell={B.ell}: relative error at t=1, 5, 10: "
          + ", ".join(f"{err[np.searchsorted(cfg.times(), t)]:.1e}" for t in (1.0, 5.0, 10.0)))
