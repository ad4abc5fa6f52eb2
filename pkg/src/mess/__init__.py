"""Maximum entropy snapshot sampling for snapshot compression and reduced bases.

Snapshots are the columns of a ``float64`` matrix. The sampler keeps the
columns that are pairwise at least ``eps`` apart (greedy, in time order);
any orthonormal basis of the kept columns reproduces every snapshot to
within ``eps``.
"""

from .basis import ErrorReport, ReducedBasis, orthonormalize, project, reconstruction_errors
from .errors import (
    DegenerateInputError,
    FormatError,
    MessError,
    NumericalError,
    ParameterError,
    StreamError,
    ValidationError,
)
from .metrics import (
    EntropyTrace,
    diameter,
    entropy_trace,
    frobenius_potentials,
    pairwise_distances,
    recurrence_matrix,
)
from .pod import SvdFactors, pod_basis, svd, truncate_energy
from .sampler import (
    EpsilonRule,
    HorizonEstimate,
    SampleResult,
    StopConfig,
    detect_plateau,
    horizon_bound,
    mess_sample,
    mess_sample_streaming,
    verify_max_entropy,
)

__all__ = [
    "ErrorReport",
    "ReducedBasis",
    "orthonormalize",
    "project",
    "reconstruction_errors",
    "DegenerateInputError",
    "FormatError",
    "MessError",
    "NumericalError",
    "ParameterError",
    "StreamError",
    "ValidationError",
    "EntropyTrace",
    "diameter",
    "entropy_trace",
    "frobenius_potentials",
    "pairwise_distances",
    "recurrence_matrix",
    "SvdFactors",
    "pod_basis",
    "svd",
    "truncate_energy",
    "EpsilonRule",
    "HorizonEstimate",
    "SampleResult",
    "StopConfig",
    "detect_plateau",
    "horizon_bound",
    "mess_sample",
    "mess_sample_streaming",
    "verify_max_entropy",
]

__version__ = "0.1.0"
