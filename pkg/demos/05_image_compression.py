"""
Compressing a grayscale image
=============================

Image columns are the snapshots. The picture is written to PGM, read
back, compressed and written out again.
"""

import tempfile
from pathlib import Path

import numpy as np

from mess import EpsilonRule, mess_sample, orthonormalize, project, reconstruction_errors
from mess.datagen import gen_test_image
from mess.matio import read_matrix, write_matrix

out = Path(tempfile.mkdtemp())
write_matrix(gen_test_image(96, 128, seed=0), out / "picture.pgm")
img = read_matrix(out / "picture.pgm")

for rel in (0.05, 0.1, 0.15, 0.25):
    res = mess_sample(img, EpsilonRule.relative(rel))
    B = orthonormalize(img[:, res.selected])
    rep = reconstruction_errors(img, B, eps_abs=res.epsilon_abs)
    # projections can overshoot [0, 1] slightly; clip before quantizing
    write_matrix(np.clip(project(B, img), 0.0, 1.0), out / f"picture_{rel:.2f}.pgm")
    print(f"eps={rel:.2f}: {B.ell} of {img.shape[1]} columns, max rel error {rep.max_rel:.3f}")

print("images written to", out)
