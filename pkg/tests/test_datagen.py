import numpy as np
import pytest
from scipy.integrate import solve_ivp

from mess.basis import ReducedBasis, orthonormalize
from mess.datagen import (
    BrusselatorConfig,
    brusselator_initial_state,
    brusselator_rhs,
    galerkin_rom_demo,
    gen_brusselator,
    gen_plateau_stream,
    gen_random_walk,
    gen_test_image,
    with_overrides,
)
from mess.errors import NumericalError, ParameterError
from mess.pod import pod_basis


def _kinetics(t, y):
    u, v = y
    return [1.0 + u * u * v - 4.0 * u, 3.0 * u - u * u * v]


def test_periodic_uniform_state_follows_kinetics():
    # a spatially constant state has zero Laplacian, reducing to two ODEs
    cfg = BrusselatorConfig(grid_points=8, t_end=2.0, n_snapshots=21, boundary="periodic", u0=1.3, v0=2.1)
    X = gen_brusselator(cfg)
    ref = solve_ivp(_kinetics, (0, 2.0), [1.3, 2.1], t_eval=cfg.times(), rtol=1e-11, atol=1e-12)
    np.testing.assert_allclose(X[:8], np.tile(ref.y[0], (8, 1)), atol=1e-7)
    np.testing.assert_allclose(X[8:], np.tile(ref.y[1], (8, 1)), atol=1e-7)


def test_dirichlet_matches_reference_solver():
    cfg = BrusselatorConfig(grid_points=20, t_end=1.0, n_snapshots=11)
    X = gen_brusselator(cfg)
    ref = solve_ivp(
        lambda t, y: brusselator_rhs(cfg, y),
        (0, 1.0),
        brusselator_initial_state(cfg),
        t_eval=cfg.times(),
        method="LSODA",
        rtol=1e-10,
        atol=1e-12,
    )
    np.testing.assert_allclose(X, ref.y, atol=1e-6)


def test_steady_state_is_fixed():
    # (u, v) = (1, 3) satisfies the boundary values and zeroes the kinetics
    cfg = BrusselatorConfig(grid_points=10, t_end=1.0, n_snapshots=5, u0=1.0, v0=3.0)
    np.testing.assert_allclose(brusselator_rhs(cfg, brusselator_initial_state(cfg)), 0.0, atol=1e-12)
    X = gen_brusselator(cfg)
    np.testing.assert_allclose(X, np.repeat(X[:, :1], 5, axis=1), atol=1e-12)


def test_rhs_accepts_stacks():
    cfg = BrusselatorConfig(grid_points=6)
    Y = np.random.default_rng(0).uniform(0.5, 2.0, (12, 3))
    stacked = brusselator_rhs(cfg, Y)
    for k in range(3):
        np.testing.assert_allclose(stacked[:, k], brusselator_rhs(cfg, Y[:, k]))


def test_brusselator_defaults(brusselator_snapshots):
    X = brusselator_snapshots
    assert X.shape == (200, 500)
    assert np.all(np.isfinite(X)) and X.min() > 0
    np.testing.assert_array_equal(X[:, 0], brusselator_initial_state(BrusselatorConfig()))


@pytest.mark.parametrize(
    "kwargs",
    [
        {"grid_points": 0},
        {"alpha": 0.0},
        {"t_end": -1.0},
        {"n_snapshots": 0},
        {"n_snapshots": 1},
        {"dt_internal": 0.0},
        {"dt_internal": 1.0},
        {"boundary": "neumann"},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ParameterError):
        BrusselatorConfig(**kwargs)


def test_single_snapshot_at_t0():
    cfg = BrusselatorConfig(grid_points=4, t_end=0.0, n_snapshots=1)
    assert gen_brusselator(cfg).shape == (8, 1)


def test_blow_up_reported(monkeypatch):
    import mess.datagen as dg

    monkeypatch.setattr(dg, "brusselator_rhs", lambda cfg, y: np.full_like(y, np.inf))
    with pytest.raises(NumericalError, match="snapshot 1"):
        gen_brusselator(BrusselatorConfig(grid_points=4, t_end=1.0, n_snapshots=3))


def test_with_overrides():
    cfg = with_overrides(BrusselatorConfig(), grid_points=10, alpha=None)
    assert cfg.grid_points == 10 and cfg.alpha == 0.02


def test_random_walk():
    X = gen_random_walk(5, 50, 2.0, seed=1)
    np.testing.assert_array_equal(X[:, 0], 0.0)
    np.testing.assert_array_equal(X, gen_random_walk(5, 50, 2.0, seed=1))
    steps = np.diff(X, axis=1)
    assert 1.5 < steps.std() < 2.5
    with pytest.raises(ParameterError):
        gen_random_walk(0, 5)


def test_plateau_stream_structure():
    eps = 0.7
    X, centers = gen_plateau_stream(4, 6, 300, eps, seed=5, noise=0.5)
    C = X[:, centers]
    d = np.linalg.norm(C[:, :, None] - C[:, None, :], axis=0)
    assert d[~np.eye(6, dtype=bool)].min() >= 3 * eps
    tail = X[:, 6:]
    nearest = np.linalg.norm(tail[:, :, None] - C[:, None, :], axis=0).min(axis=1)
    assert nearest.max() < 0.5 * eps
    with pytest.raises(ParameterError):
        gen_plateau_stream(2, 5, 3, 1.0)


def test_test_image(image_snapshots):
    assert image_snapshots.shape == (96, 128)
    assert image_snapshots.min() >= 0 and image_snapshots.max() <= 1
    np.testing.assert_array_equal(image_snapshots, gen_test_image(96, 128, seed=0))


def test_rom_with_full_basis_reproduces_model():
    cfg = BrusselatorConfig(grid_points=10, t_end=1.0, n_snapshots=11)
    full, lifted = galerkin_rom_demo(cfg, ReducedBasis(q=np.eye(20), provenance="pod"))
    np.testing.assert_allclose(lifted, full, atol=1e-12)


def test_rom_reduced_basis_is_finite():
    cfg = BrusselatorConfig(grid_points=20, t_end=2.0, n_snapshots=41)
    X = gen_brusselator(cfg)
    full, lifted = galerkin_rom_demo(cfg, pod_basis(X, ell=8))
    assert np.all(np.isfinite(lifted))
    assert np.linalg.norm(full - lifted) / np.linalg.norm(full) < 0.05


def test_rom_errors():
    cfg = BrusselatorConfig(grid_points=4, t_end=1.0, n_snapshots=3)
    with pytest.raises(ParameterError):
        galerkin_rom_demo(cfg, orthonormalize(np.eye(5)))


def test_rom_reuses_given_trajectory():
    cfg = BrusselatorConfig(grid_points=10, t_end=1.0, n_snapshots=11)
    X = gen_brusselator(cfg)
    B = pod_basis(X, ell=4)
    full, lifted = galerkin_rom_demo(cfg, B)
    np.testing.assert_array_equal(full, X)
    _, again = galerkin_rom_demo(cfg, B, full=X)
    np.testing.assert_array_equal(again, lifted)
    with pytest.raises(ParameterError):
        galerkin_rom_demo(cfg, B, full=X[:, :3])
