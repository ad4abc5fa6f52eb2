"""Distances, recurrence matrices and entropy traces of snapshot matrices.

Snapshot matrices are plain two-dimensional ``float64`` arrays whose
columns are the snapshots (states at successive instants). Distances are
Euclidean, balls are open (a distance exactly equal to the radius is *not*
recurrent) and logarithms are natural.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import NumericalError, ParameterError, ValidationError

__all__ = [
    "EntropyTrace",
    "as_snapshots",
    "pairwise_distances",
    "diameter",
    "recurrence_matrix",
    "frobenius_potentials",
    "entropy_trace",
    "trace_from_deltas",
]

DISTANCE_METHODS = ("direct", "gram")

# relative agreement required between the recursion and the direct count
_RECURSION_RTOL = 1e-12


def as_snapshots(X, name="X"):
    """Validate ``X`` as a snapshot matrix and return it as ``float64``.

    The result is Fortran-ordered so that each snapshot (column) is one
    contiguous block of memory.
    """
    X = np.asarray(X)
    if X.ndim != 2:
        raise ValidationError(f"{name} must be two-dimensional, got ndim={X.ndim}")
    m, n = X.shape
    if m < 1 or n < 1:
        raise ValidationError(f"{name} must have at least one row and one column, got {X.shape}")
    if not np.issubdtype(X.dtype, np.number) or np.iscomplexobj(X):
        raise ValidationError(f"{name} must be real-valued, got dtype {X.dtype}")
    X = np.asfortranarray(X, dtype=np.float64)
    if not np.all(np.isfinite(X)):
        bad = np.argwhere(~np.isfinite(X))[0]
        raise ValidationError(f"{name} contains a non-finite entry at (row={bad[0]}, col={bad[1]})")
    return X


def pairwise_distances(X, method="direct"):
    """Euclidean distances between all pairs of columns of ``X``.

    Parameters
    ----------
    X : (m, n) array_like
        Snapshot matrix.
    method : {"direct", "gram"}
        ``"direct"`` differences every pair of columns, which is accurate
        but costs O(m n^2) memory-bound operations. ``"gram"`` expands
        ``|a - b|^2 = |a|^2 + |b|^2 - 2 a.b`` so the bulk of the work is one
        matrix product; negative round-off is clamped to zero. Use it when
        ``m`` is large and distances are not tiny relative to the norms.

    Returns
    -------
    D : (n, n) ndarray
        Symmetric, non-negative, zero diagonal.
    """
    X = as_snapshots(X)
    n = X.shape[1]
    if n == 1:
        return np.zeros((1, 1))
    if method == "direct":
        return squareform(pdist(np.ascontiguousarray(X.T), metric="euclidean"))
    if method == "gram":
        G = X.T @ X
        sq = np.diag(G).copy()
        D2 = sq[:, None] + sq[None, :] - 2.0 * G
        D2 = 0.5 * (D2 + D2.T)
        np.maximum(D2, 0.0, out=D2)
        np.fill_diagonal(D2, 0.0)
        return np.sqrt(D2)
    raise ParameterError(f"unknown distance method {method!r}; expected one of {DISTANCE_METHODS}")


def diameter(X, method="direct"):
    """Largest pairwise distance between columns of ``X`` (0 for one column)."""
    return float(pairwise_distances(X, method=method).max())


def recurrence_matrix(D, eps):
    """Threshold a distance matrix into a boolean recurrence matrix.

    ``R[i, j]`` is true iff ``D[i, j] < eps``; the diagonal is always true.
    """
    if not np.isfinite(eps) or eps <= 0:
        raise ParameterError(f"eps must be a positive finite radius, got {eps!r}")
    D = np.asarray(D, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValidationError(f"distance matrix must be square, got shape {D.shape}")
    R = D < eps
    np.fill_diagonal(R, True)
    return R


def _check_recurrence(R):
    R = np.asarray(R)
    if R.ndim != 2 or R.shape[0] != R.shape[1] or R.shape[0] < 1:
        raise ValidationError(f"recurrence matrix must be square and non-empty, got shape {R.shape}")
    R = R.astype(bool)
    if not np.all(np.diag(R)):
        raise ValidationError("recurrence matrix must have a true diagonal")
    if not np.array_equal(R, R.T):
        raise ValidationError("recurrence matrix must be symmetric")
    return R


def frobenius_potentials(R):
    """Potentials ``|R[:j, :j]|_F^2 / j^2`` evaluated directly, for j = 1..n.

    The leading-block counts are read off a two-dimensional cumulative sum,
    independently of the row-increment recursion used by
    :func:`entropy_trace`.
    """
    R = _check_recurrence(R)
    n = R.shape[0]
    counts = np.cumsum(np.cumsum(R.astype(np.int64), axis=0), axis=1)[np.arange(n), np.arange(n)]
    j = np.arange(1, n + 1, dtype=np.float64)
    return counts / j**2


@dataclass
class EntropyTrace:
    """Potential, entropy and increment sequences of a snapshot stream.

    Indexing is 0-based in the arrays: ``v[k]`` is the potential of the
    first ``k + 1`` snapshots, ``delta[k]`` and ``h[k]`` describe the step
    that appends snapshot ``k + 1``.

    Attributes
    ----------
    v : ndarray, shape (n,)
        Frobenius potentials, in ``[1/j, 1]``.
    eta : ndarray, shape (n,)
        Frobenius entropies ``-log(v)``.
    h : ndarray, shape (n - 1,)
        Dynamical entropies ``eta[k + 1] - eta[k]``.
    delta : ndarray of int, shape (n - 1,)
        Odd increments of the leading-block count, ``1 <= delta[k] <= 2k + 3``.
    approximate : bool
        True when ``delta`` is a lower-bound surrogate (streaming mode).
    """

    v: np.ndarray
    eta: np.ndarray
    h: np.ndarray
    delta: np.ndarray
    approximate: bool = field(default=False)

    def __len__(self):
        return len(self.v)

    def is_strictly_increasing(self):
        """True iff the entropy grows at every step."""
        return bool(np.all(self.h > 0))


def trace_from_deltas(delta, approximate=False):
    """Run the potential recursion ``v_{j+1} = (j^2 v_j + delta_j) / (j+1)^2``.

    Starting from ``v_1 = 1``; ``delta`` holds ``delta_1 .. delta_{n-1}``.
    """
    delta = np.asarray(delta, dtype=np.int64)
    n = len(delta) + 1
    v = np.empty(n)
    v[0] = 1.0
    for j in range(1, n):
        v[j] = (j * j * v[j - 1] + delta[j - 1]) / ((j + 1) * (j + 1))
    eta = -np.log(v) + 0.0  # no negative zeros
    return EntropyTrace(v=v, eta=eta, h=np.diff(eta), delta=delta, approximate=approximate)


def entropy_trace(R):
    """Exact entropy trace of a recurrence matrix.

    The potentials come from the row-increment recursion and are checked
    against the direct leading-block counts of :func:`frobenius_potentials`.

    Raises
    ------
    NumericalError
        If the two evaluations disagree beyond 1e-12 relative.
    """
    R = _check_recurrence(R)
    # row j (0-based) contributes its strictly-lower entries twice plus the diagonal
    lower = np.tril(R, k=-1).sum(axis=1)
    delta = 2 * lower[1:] + 1
    trace = trace_from_deltas(delta)
    direct = frobenius_potentials(R)
    rel = np.abs(trace.v - direct) / direct
    if rel.size and rel.max() > _RECURSION_RTOL:
        k = int(rel.argmax())
        raise NumericalError(
            f"potential recursion drifted from direct count at j={k + 1}: relative error {rel[k]:.3e}"
        )
    return trace
