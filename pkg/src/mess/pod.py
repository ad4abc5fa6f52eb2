"""Proper orthogonal decomposition: the truncated-SVD reference basis."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .basis import ReducedBasis
from .errors import DegenerateInputError, NumericalError, ParameterError
from .metrics import as_snapshots

__all__ = ["SvdFactors", "svd", "numerical_rank", "truncate_energy", "pod_basis"]


@dataclass
class SvdFactors:
    """Economy SVD ``X = U diag(sigma) V^T`` with ``r = min(m, n)``."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    @property
    def r(self):
        return self.sigma.size

    def rank(self, tol=None):
        return numerical_rank(self.sigma, tol=tol, shape=(self.u.shape[0], self.v.shape[0]))


def svd(X):
    """Economy-size singular value decomposition of a snapshot matrix.

    LAPACK's divide-and-conquer driver is tried first; if it fails to
    converge the QR-iteration driver is used.

    Raises
    ------
    NumericalError
        When both drivers fail.
    """
    X = as_snapshots(X)
    failures = []
    for driver in ("gesdd", "gesvd"):
        try:
            U, s, Vt = la.svd(X, full_matrices=False, lapack_driver=driver, check_finite=False)
        except (np.linalg.LinAlgError, ValueError) as exc:
            failures.append(f"{driver}: {exc}")
            continue
        return SvdFactors(u=U, sigma=s, v=Vt.T)
    raise NumericalError(f"SVD of {X.shape[0]}x{X.shape[1]} matrix did not converge ({'; '.join(failures)})")


def numerical_rank(sigma, tol=None, shape=None):
    """Number of singular values above ``tol``.

    The default tolerance is ``max(m, n) * machine_eps * sigma[0]``.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.size == 0 or sigma[0] == 0:
        return 0
    if tol is None:
        size = max(shape) if shape is not None else sigma.size
        tol = size * np.finfo(np.float64).eps * sigma[0]
    return int(np.count_nonzero(sigma > tol))


def truncate_energy(sigma, energy_eps, full_output=False):
    """Smallest ``ell`` keeping a ``1 - energy_eps**2`` share of the energy.

    Energy is the sum of squared singular values. When only the full
    numerical rank meets the target, the rank is returned and, with
    ``full_output``, the second return value (``at_rank``) is true.

    Parameters
    ----------
    sigma : array_like
        Singular values, sorted non-increasing.
    energy_eps : float
        Relative Frobenius error budget, in (0, 1).
    full_output : bool
        Also return the ``at_rank`` flag.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    if not 0 < energy_eps < 1:
        raise ParameterError(f"energy_eps must lie in (0, 1), got {energy_eps!r}")
    if sigma.ndim != 1 or sigma.size == 0:
        raise ParameterError("sigma must be a non-empty vector")
    if np.any(sigma < 0) or np.any(np.diff(sigma) > 0):
        raise ParameterError("sigma must be non-negative and sorted non-increasing")
    if sigma[0] == 0:
        raise DegenerateInputError("all singular values are zero")
    energy = np.cumsum(sigma**2)
    target = (1.0 - energy_eps**2) * energy[-1]
    ell = int(np.searchsorted(energy, target, side="left")) + 1
    rank = numerical_rank(sigma)
    ell = min(ell, rank)
    if full_output:
        return ell, ell >= rank
    return ell


def pod_basis(X, ell=None, energy_eps=None, factors=None):
    """Leading left singular vectors of ``X`` as a :class:`ReducedBasis`.

    Exactly one of ``ell`` and ``energy_eps`` must be given. Pass
    ``factors`` to reuse an existing decomposition.
    """
    if (ell is None) == (energy_eps is None):
        raise ParameterError("give exactly one of ell and energy_eps")
    if factors is None:
        factors = svd(X)
    rank = factors.rank()
    if rank == 0:
        raise DegenerateInputError("snapshot matrix is zero")
    if energy_eps is not None:
        ell = truncate_energy(factors.sigma, energy_eps)
    if int(ell) != ell or ell < 1:
        raise ParameterError(f"ell must be a positive integer, got {ell!r}")
    if ell > rank:
        raise ParameterError(f"ell={ell} exceeds the numerical rank {rank}")
    return ReducedBasis(q=np.asfortranarray(factors.u[:, : int(ell)]), provenance="pod", rank_tol=0.0)
