"""Maximum entropy snapshot sampling.

A column is kept iff it lies at distance >= ``eps`` from every column kept
before it. The kept columns are pairwise ``eps``-separated, so their own
entropy trace is strictly increasing, and every discarded column lies in
the open ``eps``-ball of an earlier kept one.
"""

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DegenerateInputError, ParameterError, StreamError, ValidationError
from .metrics import (
    EntropyTrace,
    as_snapshots,
    entropy_trace,
    pairwise_distances,
    recurrence_matrix,
    trace_from_deltas,
)

__all__ = [
    "EpsilonRule",
    "StopConfig",
    "HorizonEstimate",
    "SampleResult",
    "mess_sample",
    "mess_sample_streaming",
    "verify_max_entropy",
    "detect_plateau",
    "horizon_bound",
]


@dataclass(frozen=True)
class EpsilonRule:
    """Ball radius, either absolute or as a fraction of the sample diameter."""

    mode: str
    value: float

    def __post_init__(self):
        if self.mode not in ("absolute", "relative"):
            raise ParameterError(f"epsilon mode must be 'absolute' or 'relative', got {self.mode!r}")
        if not math.isfinite(self.value) or self.value <= 0:
            raise ParameterError(f"epsilon must be positive, got {self.value!r}")
        if self.mode == "relative" and self.value >= 1:
            raise ParameterError(f"relative epsilon must lie in (0, 1), got {self.value!r}")

    @classmethod
    def absolute(cls, value):
        return cls("absolute", float(value))

    @classmethod
    def relative(cls, value):
        return cls("relative", float(value))

    def resolve(self, diam):
        """Absolute radius for a sample of diameter ``diam``."""
        if self.mode == "absolute":
            return self.value
        if diam <= 0:
            raise DegenerateInputError("relative epsilon needs a sample with positive diameter")
        return self.value * diam

    def describe(self):
        return {"mode": self.mode, "value": self.value}


@dataclass(frozen=True)
class StopConfig:
    """Plateau rule for interrupting the sampling.

    Sampling stops once ``window`` consecutive steps change the potential
    (or, with ``criterion="entropy"``, the dynamical entropy) by less than
    ``potential_tol``. ``window=1`` is the single-step rule.
    """

    potential_tol: float = 1e-3
    window: int = 10
    enabled: bool = True
    criterion: str = "potential"

    def __post_init__(self):
        if not math.isfinite(self.potential_tol) or self.potential_tol <= 0:
            raise ParameterError(f"potential_tol must be positive, got {self.potential_tol!r}")
        if int(self.window) != self.window or self.window < 1:
            raise ParameterError(f"window must be a positive integer, got {self.window!r}")
        if self.criterion not in ("potential", "entropy"):
            raise ParameterError(f"criterion must be 'potential' or 'entropy', got {self.criterion!r}")


@dataclass(frozen=True)
class HorizonEstimate:
    """How many snapshots past a plateau keep the 4*eps back-projection bound.

    ``i_max`` is the largest ``i >= 0`` with
    ``i (1 - v_star) < j_star v_star - (1 - v_star) / 2`` (``math.inf``
    when ``v_star == 1``). ``guaranteed`` is false when no ``i >= 1``
    qualifies.
    """

    j_star: int
    v_star: float
    i_max: float
    guaranteed: bool

    def as_dict(self):
        i_max = None if math.isinf(self.i_max) else int(self.i_max)
        return {
            "j_star": self.j_star,
            "v_star": self.v_star,
            "i_max": i_max,
            "unbounded": math.isinf(self.i_max),
            "guaranteed": self.guaranteed,
        }


@dataclass
class SampleResult:
    """Outcome of a sampling run.

    Attributes
    ----------
    selected : ndarray of int
        0-based indices of the kept columns, strictly increasing, starts at 0.
    trace : EntropyTrace
        Trace over every column seen (exact offline, surrogate streaming).
    epsilon_abs : float
        Absolute ball radius actually used.
    stop_index : int or None
        1-based step at which the plateau run begins, if one was detected.
    n_seen : int
        Number of columns consumed.
    rule : EpsilonRule
    horizon : HorizonEstimate or None
        Filled in whenever ``stop_index`` is.
    samples : ndarray, optional
        The kept columns themselves (streaming mode only).
    diameter : float or None
        Largest pairwise distance (offline mode only).
    """

    selected: np.ndarray
    trace: EntropyTrace
    epsilon_abs: float
    stop_index: Optional[int]
    n_seen: int
    rule: EpsilonRule
    horizon: Optional[HorizonEstimate] = None
    samples: Optional[np.ndarray] = field(default=None, repr=False)
    diameter: Optional[float] = None

    @property
    def ell(self):
        return len(self.selected)

    @property
    def approximate(self):
        return self.trace.approximate


def _plateau_diffs(trace, criterion):
    if criterion == "potential":
        return np.abs(np.diff(trace.v))
    return np.abs(np.diff(trace.h))


def detect_plateau(trace, stop):
    """First 1-based step ``j`` opening a run of ``stop.window`` small changes.

    With the potential criterion, step ``k`` is small when
    ``|v_{k+1} - v_k| < stop.potential_tol``; with the entropy criterion the
    test is ``|h_{k+1} - h_k| < stop.potential_tol``. Returns ``None`` when
    no run of the required length exists.
    """
    small = _plateau_diffs(trace, stop.criterion) < stop.potential_tol
    w = int(stop.window)
    if small.size < w:
        return None
    run = np.convolve(small.astype(np.int64), np.ones(w, dtype=np.int64), mode="valid")
    hits = np.flatnonzero(run == w)
    if hits.size == 0:
        return None
    return int(hits[0]) + 1


class _PlateauWatch:
    """Online version of :func:`detect_plateau` fed one potential at a time."""

    def __init__(self, stop):
        self.stop = stop
        self.prev_v = 1.0
        self.prev_h = None
        self.step = 0  # 1-based index of the last completed small/large test
        self.run = 0

    def push(self, v):
        """Feed the next potential; return the plateau start once confirmed."""
        if self.stop.criterion == "potential":
            change = abs(v - self.prev_v)
        else:
            h = math.log(self.prev_v) - math.log(v)
            prev_h, self.prev_h = self.prev_h, h
            self.prev_v = v
            if prev_h is None:
                return None
            change = abs(h - prev_h)
        self.prev_v = v
        self.step += 1
        self.run = self.run + 1 if change < self.stop.potential_tol else 0
        if self.run >= self.stop.window:
            return self.step - self.stop.window + 1
        return None


def _stop_column(j_star, stop):
    """Number of columns needed before the plateau run is confirmed."""
    extra = 1 if stop.criterion == "potential" else 2
    return j_star + stop.window + extra - 1


def horizon_bound(j_star, v_star):
    """Evaluate the horizon inequality at a plateau ``(j_star, v_star)``."""
    if int(j_star) != j_star or j_star < 1:
        raise ParameterError(f"j_star must be a positive integer, got {j_star!r}")
    if not (0 < v_star <= 1):
        raise ParameterError(f"v_star must lie in (0, 1], got {v_star!r}")
    j_star = int(j_star)
    a = 1.0 - v_star
    b = j_star * v_star - 0.5 * a
    if a == 0.0:
        return HorizonEstimate(j_star, float(v_star), math.inf, True)
    if not b > 0:
        return HorizonEstimate(j_star, float(v_star), 0, False)
    i = max(math.ceil(b / a) - 1, 0)
    # settle rounding so the result matches the floating predicate exactly
    while (i + 1) * a < b:
        i += 1
    while i > 0 and not i * a < b:
        i -= 1
    return HorizonEstimate(j_star, float(v_star), i, i >= 1)


def _horizon_for(trace, j_star):
    return horizon_bound(j_star, float(trace.v[j_star - 1]))


def mess_sample(X, rule, stop=None, *, method="direct", distances=None):
    """Greedy maximum entropy sampling of the columns of ``X``.

    Parameters
    ----------
    X : (m, n) array_like
        Snapshot matrix.
    rule : EpsilonRule or float
        Ball radius; a bare float is taken as absolute.
    stop : StopConfig, optional
        Plateau rule. Once the plateau run is confirmed no further column
        is accepted, though the trace still covers every column.
    method : {"direct", "gram"}
        Distance evaluation, see :func:`mess.metrics.pairwise_distances`.
    distances : (n, n) ndarray, optional
        Precomputed pairwise distances of the columns of ``X``, e.g. shared
        across a sweep over radii. ``method`` is then ignored.

    Returns
    -------
    SampleResult
    """
    X = as_snapshots(X)
    if not isinstance(rule, EpsilonRule):
        rule = EpsilonRule.absolute(rule)
    n = X.shape[1]
    if distances is None:
        D = pairwise_distances(X, method=method)
    else:
        D = np.asarray(distances, dtype=np.float64)
        if D.shape != (n, n):
            raise ValidationError(f"distances must have shape {(n, n)}, got {D.shape}")
    diam = float(D.max())
    eps = rule.resolve(diam)
    trace = entropy_trace(recurrence_matrix(D, eps))

    stop_index = None
    limit = n
    if stop is not None and stop.enabled:
        stop_index = detect_plateau(trace, stop)
        if stop_index is not None:
            limit = min(n, _stop_column(stop_index, stop))

    selected = [0]
    for j in range(1, limit):
        if np.all(D[j, selected] >= eps):
            selected.append(j)

    horizon = _horizon_for(trace, stop_index) if stop_index is not None else None
    return SampleResult(
        selected=np.asarray(selected, dtype=np.intp),
        trace=trace,
        epsilon_abs=eps,
        stop_index=stop_index,
        n_seen=n,
        rule=rule,
        horizon=horizon,
        diameter=diam,
    )


def mess_sample_streaming(source: Iterable, eps_abs: float, stop: Optional[StopConfig] = None):
    """Single-pass sampling that stores only the kept snapshots.

    The selection is identical to :func:`mess_sample` with the same absolute
    radius and no stop rule. The trace is a surrogate: the increment at each
    step counts only *kept* snapshots inside the ball, a lower bound of the
    exact increment, and the result is flagged approximate. The plateau
    rule, if given, is evaluated on this surrogate.
    """
    if not math.isfinite(eps_abs) or eps_abs <= 0:
        raise ParameterError(f"eps_abs must be positive, got {eps_abs!r}")
    rule = EpsilonRule.absolute(eps_abs)
    watch = _PlateauWatch(stop) if stop is not None and stop.enabled else None

    rows = []  # kept snapshots, one contiguous row each
    selected = []
    deltas = []
    v = [1.0]
    stop_index = None
    accepting = True
    m = None
    j = 0
    for j, x in enumerate(source):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1:
            x = x.reshape(-1)
        if m is None:
            m = x.size
            if m == 0:
                raise StreamError("snapshots must be non-empty")
        elif x.size != m:
            raise StreamError(f"snapshot {j} has dimension {x.size}, expected {m}")
        if not np.all(np.isfinite(x)):
            raise ValidationError(f"snapshot {j} contains non-finite values")

        if j == 0:
            rows.append(x.copy())
            selected.append(0)
            continue
        d = cdist(x[None, :], np.asarray(rows), metric="euclidean")[0]
        inside = int(np.count_nonzero(d < eps_abs))
        delta = 2 * inside + 1
        deltas.append(delta)
        v.append((j * j * v[-1] + delta) / ((j + 1) * (j + 1)))

        if accepting and inside == 0:
            rows.append(x.copy())
            selected.append(j)

        if watch is not None and stop_index is None:
            stop_index = watch.push(v[-1])
            if stop_index is not None:
                accepting = False

    if m is None:
        raise DegenerateInputError("empty snapshot stream")

    trace = trace_from_deltas(deltas, approximate=True)
    horizon = _horizon_for(trace, stop_index) if stop_index is not None else None
    return SampleResult(
        selected=np.asarray(selected, dtype=np.intp),
        trace=trace,
        epsilon_abs=float(eps_abs),
        stop_index=stop_index,
        n_seen=j + 1,
        rule=rule,
        horizon=horizon,
        samples=np.asfortranarray(np.asarray(rows).T),
    )


def verify_max_entropy(X_sel, eps_abs, *, method="direct"):
    """True iff the columns of ``X_sel`` are pairwise at distance >= ``eps_abs``.

    The answer is cross-checked against strict growth of the entropy trace
    of the same columns; the two must coincide.
    """
    X_sel = as_snapshots(X_sel, name="X_sel")
    D = pairwise_distances(X_sel, method=method)
    R = recurrence_matrix(D, eps_abs)
    separated = int(R.sum()) == R.shape[0]
    increasing = entropy_trace(R).is_strictly_increasing()
    if separated != increasing:
        raise AssertionError("separation and entropy monotonicity disagree")
    return separated
