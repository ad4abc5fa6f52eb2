"""Desk-scale snapshot sources.

The brusselator is the standard 1-D reaction-diffusion test problem on
``x in (0, 1)`` discretized by the method of lines on ``N`` interior nodes::

    u_i' = 1 + u_i^2 v_i - 4 u_i + alpha (N+1)^2 (u_{i-1} - 2 u_i + u_{i+1})
    v_i' = 3 u_i - u_i^2 v_i     + alpha (N+1)^2 (v_{i-1} - 2 v_i + v_{i+1})

with ``u(x, 0) = 1 + sin(2 pi x)``, ``v(x, 0) = 3`` and boundary values held
at ``(u, v) = (1, 3)``. States are stacked as ``[u_1..u_N, v_1..v_N]``.
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .basis import ReducedBasis
from .errors import NumericalError, ParameterError

__all__ = [
    "BrusselatorConfig",
    "brusselator_rhs",
    "brusselator_initial_state",
    "gen_brusselator",
    "gen_random_walk",
    "gen_plateau_stream",
    "gen_test_image",
    "galerkin_rom_demo",
]


@dataclass(frozen=True)
class BrusselatorConfig:
    """Parameters of a brusselator run.

    ``boundary="periodic"`` replaces the fixed end values by wrap-around
    neighbours; uniform initial data then stays uniform and the model
    reduces to the two-state reaction ODE at every node.
    """

    grid_points: int = 100
    alpha: float = 0.02
    t_end: float = 10.0
    n_snapshots: int = 500
    dt_internal: float = 1e-3
    boundary: str = "dirichlet"
    u0: Optional[tuple] = None
    v0: Optional[tuple] = None

    def __post_init__(self):
        if self.grid_points < 1:
            raise ParameterError("grid_points must be positive")
        if not self.alpha > 0:
            raise ParameterError("alpha must be positive")
        if not self.t_end >= 0:
            raise ParameterError("t_end must be non-negative")
        if self.n_snapshots < 1:
            raise ParameterError("n_snapshots must be positive")
        if self.t_end > 0 and self.n_snapshots < 2:
            raise ParameterError("n_snapshots must be at least 2 when t_end > 0")
        if not self.dt_internal > 0:
            raise ParameterError("dt_internal must be positive")
        if self.t_end > 0 and self.dt_internal > self.t_end / self.n_snapshots:
            raise ParameterError("dt_internal must not exceed t_end / n_snapshots")
        if self.boundary not in ("dirichlet", "periodic"):
            raise ParameterError(f"unknown boundary {self.boundary!r}")

    @property
    def m(self):
        return 2 * self.grid_points

    def times(self):
        if self.n_snapshots == 1:
            return np.array([0.0])
        return np.linspace(0.0, self.t_end, self.n_snapshots)


def brusselator_initial_state(cfg):
    N = cfg.grid_points
    x = np.arange(1, N + 1) / (N + 1)
    u = 1.0 + np.sin(2.0 * np.pi * x) if cfg.u0 is None else np.broadcast_to(np.asarray(cfg.u0, float), (N,))
    v = np.full(N, 3.0) if cfg.v0 is None else np.broadcast_to(np.asarray(cfg.v0, float), (N,))
    return np.concatenate([u, v])


def brusselator_rhs(cfg, y):
    """Vector field of the discretized system.

    ``y`` may be a state vector or an ``(m, k)`` stack of states.
    """
    N = cfg.grid_points
    u, v = y[:N], y[N:]
    c = cfg.alpha * (N + 1) ** 2
    if cfg.boundary == "dirichlet":
        pad = ((1, 1),) + ((0, 0),) * (y.ndim - 1)
        up = np.pad(u, pad, constant_values=1.0)
        vp = np.pad(v, pad, constant_values=3.0)
        lap_u = up[:-2] - 2.0 * u + up[2:]
        lap_v = vp[:-2] - 2.0 * v + vp[2:]
    else:
        lap_u = np.roll(u, 1, axis=0) - 2.0 * u + np.roll(u, -1, axis=0)
        lap_v = np.roll(v, 1, axis=0) - 2.0 * v + np.roll(v, -1, axis=0)
    uuv = u * u * v
    du = 1.0 + uuv - 4.0 * u + c * lap_u
    dv = 3.0 * u - uuv + c * lap_v
    return np.concatenate([du, dv])


def _stable_step(cfg, y):
    # diffusion spectral radius plus a Gershgorin bound of the reaction Jacobian
    N = cfg.grid_points
    u, v = y[:N], y[N:]
    reaction = np.max(np.abs(2 * u * v - 4) + np.abs(3 - 2 * u * v) + 2 * u * u)
    return 0.4 / (2.0 * cfg.alpha * (N + 1) ** 2 + reaction)


def _rk4_between(f, y, t0, t1, h_max):
    steps = max(1, int(np.ceil((t1 - t0) / h_max - 1e-12)))
    h = (t1 - t0) / steps
    for _ in range(steps):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def _integrate(f, y0, times, step_for, label):
    out = np.empty((y0.size, times.size), order="F")
    out[:, 0] = y0
    y = y0
    for k in range(1, times.size):
        y = _rk4_between(f, y, times[k - 1], times[k], step_for(y))
        if not np.all(np.isfinite(y)):
            raise NumericalError(f"{label} blew up between t={times[k - 1]:.6g} and t={times[k]:.6g} (snapshot {k})")
        out[:, k] = y
    return out


def gen_brusselator(cfg=None):
    """Snapshot matrix of the brusselator at ``n_snapshots`` uniform instants.

    Integration is classical RK4 with step ``min(dt_internal, stability
    guard)``, shrunk so that output instants are hit exactly.
    """
    cfg = cfg or BrusselatorConfig()
    y0 = brusselator_initial_state(cfg)
    f = lambda y: brusselator_rhs(cfg, y)  # noqa: E731
    return _integrate(f, y0, cfg.times(), lambda y: min(cfg.dt_internal, _stable_step(cfg, y)), "brusselator")


def gen_random_walk(m, n, step_scale=1.0, seed=0):
    """Gaussian random walk: column ``j`` is the sum of ``j`` i.i.d. steps."""
    if m < 1 or n < 1 or step_scale < 0:
        raise ParameterError("m, n must be positive and step_scale non-negative")
    rng = np.random.default_rng(seed)
    steps = rng.standard_normal((m, n)) * step_scale
    steps[:, 0] = 0.0
    return np.asfortranarray(np.cumsum(steps, axis=1))


def gen_plateau_stream(m, n_centers, n_total, eps, seed=0, noise=0.25):
    """Stream that visits ``n_centers`` separated states, then keeps recurring.

    The first ``n_centers`` columns are centers at mutual distance
    ``>= 3 eps``; every later column is a random center plus a perturbation
    of norm ``< noise * eps``, so it lies inside the ball of that center.

    Returns
    -------
    X : (m, n_total) ndarray
    centers : ndarray of int
        Column indices of the centers (``0 .. n_centers - 1``).
    """
    if n_total < n_centers or n_centers < 1 or not eps > 0 or not 0 <= noise < 1:
        raise ParameterError("need n_total >= n_centers >= 1, eps > 0, noise in [0, 1)")
    rng = np.random.default_rng(seed)
    # spread centers on a scaled simplex-like set: random directions, radius large enough
    C = rng.standard_normal((m, n_centers))
    C /= np.linalg.norm(C, axis=0)
    C *= 3.0 * eps * max(1.0, np.sqrt(n_centers))
    while n_centers > 1:
        d = np.linalg.norm(C[:, :, None] - C[:, None, :], axis=0)
        np.fill_diagonal(d, np.inf)
        if d.min() >= 3.0 * eps:
            break
        C *= 1.5
    X = np.empty((m, n_total), order="F")
    X[:, :n_centers] = C
    picks = rng.integers(0, n_centers, size=n_total - n_centers)
    for k, c in enumerate(picks):
        p = rng.standard_normal(m)
        p *= noise * eps * rng.uniform(0.0, 1.0) / np.linalg.norm(p)
        X[:, n_centers + k] = C[:, c] + p
    return X, np.arange(n_centers)


def gen_test_image(height=96, width=128, seed=0):
    """Synthetic grayscale picture in ``[0, 1]``: smooth shapes plus texture.

    Image columns are the snapshots, matching how images are read from
    PGM files.
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width]
    y = yy / max(height - 1, 1)
    x = xx / max(width - 1, 1)
    img = 0.45 + 0.25 * np.sin(3.0 * np.pi * x) * np.cos(2.0 * np.pi * y)
    img += 0.3 * np.exp(-((x - 0.6) ** 2 + (y - 0.4) ** 2) / 0.02)
    img += 0.02 * rng.standard_normal((height, width))
    return np.asfortranarray(np.clip(img, 0.0, 1.0))


def galerkin_rom_demo(cfg, B: ReducedBasis, full=None):
    """Integrate the full and the Galerkin-reduced brusselator side by side.

    The reduced state obeys ``z' = Q^T f(Q z)`` with ``z(0) = Q^T x(0)`` and
    is lifted back as ``Q z``. Both use RK4 with the same step.

    Parameters
    ----------
    cfg : BrusselatorConfig
    B : ReducedBasis
    full : (m, n_snapshots) ndarray, optional
        Full trajectory already computed with :func:`gen_brusselator` for
        the same ``cfg``; it is integrated afresh when omitted.

    Returns
    -------
    full, lifted : (m, n_snapshots) ndarray
        Trajectories sampled at ``cfg.times()``.

    Raises
    ------
    NumericalError
        If either trajectory leaves the finite range; the reduced one is
        reported as an unstable reduced model.
    """
    if B.m != cfg.m:
        raise ParameterError(f"basis dimension {B.m} does not match state dimension {cfg.m}")
    Q = B.q
    y0 = brusselator_initial_state(cfg)
    times = cfg.times()
    guard = lambda y: min(cfg.dt_internal, _stable_step(cfg, y))  # noqa: E731
    if full is None:
        full = _integrate(lambda y: brusselator_rhs(cfg, y), y0, times, guard, "full model")
    elif full.shape != (cfg.m, times.size):
        raise ParameterError(f"full trajectory has shape {full.shape}, expected {(cfg.m, times.size)}")

    # reuse the full model's step sizes so the two trajectories see the same clock
    def reduced_rhs(z):
        return Q.T @ brusselator_rhs(cfg, Q @ z)

    z = Q.T @ y0
    lifted = np.empty_like(full)
    lifted[:, 0] = Q @ z
    for k in range(1, times.size):
        z = _rk4_between(reduced_rhs, z, times[k - 1], times[k], guard(full[:, k - 1]))
        if not np.all(np.isfinite(z)) or np.abs(z).max() > 1e8:
            raise NumericalError(
                f"reduced model unstable (ell={B.ell}) between t={times[k - 1]:.6g} and t={times[k]:.6g}"
            )
        lifted[:, k] = Q @ z
    return full, lifted


def with_overrides(cfg, **kwargs):
    """Copy of ``cfg`` with some fields replaced, skipping ``None`` values."""
    return replace(cfg, **{k: v for k, v in kwargs.items() if v is not None})
