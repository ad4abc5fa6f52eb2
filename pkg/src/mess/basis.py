"""Reduced bases: orthonormalization, projection and reconstruction errors."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateInputError, ParameterError
from .metrics import as_snapshots, diameter

__all__ = [
    "ReducedBasis",
    "ErrorReport",
    "orthonormalize",
    "project",
    "reconstruction_errors",
]

DEFAULT_RANK_TOL = 1e-12


@dataclass
class ReducedBasis:
    """Column-orthonormal ``m x ell`` matrix together with its origin.

    Attributes
    ----------
    q : ndarray, shape (m, ell)
    provenance : {"mess_qr", "pod"}
    rank_tol : float
        Relative tolerance used to discard dependent columns.
    dropped : ndarray of int
        Positions (within the orthonormalized input) of discarded columns.
    source_indices : ndarray of int, optional
        Snapshot indices the basis was built from, when known.
    """

    q: np.ndarray
    provenance: str
    rank_tol: float = DEFAULT_RANK_TOL
    dropped: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.intp))
    source_indices: Optional[np.ndarray] = None

    @property
    def m(self):
        return self.q.shape[0]

    @property
    def ell(self):
        return self.q.shape[1]

    def orthonormality_defect(self):
        """``|Q^T Q - I|_F``."""
        return float(np.linalg.norm(self.q.T @ self.q - np.eye(self.ell)))


def _mgs2(Y, rank_tol):
    m, k = Y.shape
    Q = np.empty((m, k), order="F")
    dropped = []
    ell = 0
    for c in range(k):
        y = Y[:, c]
        norm0 = np.linalg.norm(y)
        if norm0 == 0.0:
            dropped.append(c)
            continue
        w = y.copy()
        for _ in range(2):
            for i in range(ell):
                qi = Q[:, i]
                w -= (qi @ w) * qi
        r = np.linalg.norm(w)
        if r <= rank_tol * norm0:
            dropped.append(c)
            continue
        Q[:, ell] = w / r
        ell += 1
    return Q[:, :ell], dropped


def _householder(Y, rank_tol):
    # |R[k, k]| is the distance of column k from the span of its predecessors
    cols = np.arange(Y.shape[1])
    norms = np.linalg.norm(Y, axis=0)
    cols = cols[norms > 0]
    while cols.size:
        Q, R = np.linalg.qr(Y[:, cols], mode="reduced")
        weak = np.abs(np.diag(R)) <= rank_tol * norms[cols]
        if not weak.any():
            break
        cols = cols[~weak]
    else:
        Q = np.zeros((Y.shape[0], 0))
    dropped = np.setdiff1d(np.arange(Y.shape[1]), cols)
    return np.asfortranarray(Q), dropped.tolist()


def orthonormalize(Y, rank_tol=DEFAULT_RANK_TOL, method="mgs", source_indices=None):
    """Orthonormal basis for the range of the columns of ``Y``.

    Columns whose residual, after removing the components along the basis
    vectors accepted so far, has norm ``<= rank_tol * |column|`` are dropped.

    Parameters
    ----------
    Y : (m, k) array_like
        Sampled snapshots.
    rank_tol : float
        Relative drop tolerance.
    method : {"mgs", "householder"}
        ``"mgs"`` is modified Gram-Schmidt run twice per column. It is
        incremental and suits streaming. ``"householder"`` calls LAPACK and
        re-factorizes after dropping weak columns; it is much faster for
        wide ``Y``.
    source_indices : array_like of int, optional
        Snapshot indices of the columns of ``Y``, stored on the result.

    Returns
    -------
    ReducedBasis
    """
    Y = as_snapshots(Y, name="Y")
    if not rank_tol > 0:
        raise ParameterError(f"rank_tol must be positive, got {rank_tol!r}")
    if not np.any(Y):
        raise DegenerateInputError("cannot orthonormalize an all-zero matrix")
    if method == "mgs":
        Q, dropped = _mgs2(Y, rank_tol)
    elif method == "householder":
        Q, dropped = _householder(Y, rank_tol)
    else:
        raise ParameterError(f"unknown orthonormalization method {method!r}")
    if source_indices is not None:
        source_indices = np.asarray(source_indices, dtype=np.intp)
    return ReducedBasis(
        q=Q,
        provenance="mess_qr",
        rank_tol=rank_tol,
        dropped=np.asarray(dropped, dtype=np.intp),
        source_indices=source_indices,
    )


def project(B, x):
    """Orthogonal projection ``Q (Q^T x)`` of a vector or of matrix columns."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != B.m or x.ndim > 2:
        raise ParameterError(f"expected leading dimension {B.m}, got shape {x.shape}")
    return B.q @ (B.q.T @ x)


@dataclass
class ErrorReport:
    """Per-snapshot back-projection errors.

    ``max_rel`` is ``max_abs`` divided by the normalization scale, which is
    either the snapshot diameter or ``|X|_F`` (see ``normalization``).
    """

    per_snapshot: np.ndarray
    max_abs: float
    max_rel: float
    eps_abs: Optional[float]
    normalization: str
    scale: float

    @property
    def frobenius(self):
        """``|X - Q Q^T X|_F``."""
        return float(np.sqrt(np.sum(self.per_snapshot**2)))

    @property
    def bound_holds(self):
        """True iff every error is strictly below ``eps_abs``."""
        if self.eps_abs is None:
            return None
        return bool(self.max_abs < self.eps_abs)


def reconstruction_errors(X, B, eps_abs=None, normalization="diameter", scale=None):
    """Euclidean errors ``|x_j - Q Q^T x_j|`` for every column of ``X``.

    Parameters
    ----------
    X : (m, n) array_like
    B : ReducedBasis
    eps_abs : float, optional
        Radius the errors are meant to stay below; recorded on the report.
    normalization : {"diameter", "frobenius"}
        Scale for ``max_rel``.
    scale : float, optional
        Precomputed scale, avoiding a second pass over ``X``.
    """
    X = as_snapshots(X)
    if X.shape[0] != B.m:
        raise ParameterError(f"X has {X.shape[0]} rows but the basis has dimension {B.m}")
    if normalization not in ("diameter", "frobenius"):
        raise ParameterError(f"unknown normalization {normalization!r}")
    resid = X - project(B, X)
    errs = np.linalg.norm(resid, axis=0)
    max_abs = float(errs.max())
    if scale is None:
        scale = diameter(X) if normalization == "diameter" else float(np.linalg.norm(X))
    if scale > 0:
        max_rel = max_abs / scale
    else:
        max_rel = 0.0 if max_abs == 0 else float("inf")
    return ErrorReport(
        per_snapshot=errs,
        max_abs=max_abs,
        max_rel=max_rel,
        eps_abs=None if eps_abs is None else float(eps_abs),
        normalization=normalization,
        scale=float(scale),
    )
