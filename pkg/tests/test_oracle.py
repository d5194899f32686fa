import math

import numpy as np
import pytest

from _support import PI, U, spectrum
from movingwall import oracle
from movingwall.errors import InvalidArgumentError
from movingwall.spectral import InitialState, PhysicsConfig, evaluate_grid


@pytest.mark.parametrize("kw", [dict(points=50), dict(dt=0.0), dict(scheme="euler")])
def test_grid_config_validation(kw):
    with pytest.raises(InvalidArgumentError):
        oracle.GridConfig(**kw)


def test_grid_state_needs_dirichlet_ends():
    with pytest.raises(InvalidArgumentError):
        oracle.GridState(0.0, np.ones(10, dtype=complex))


def test_stationary_state_only_picks_up_a_phase():
    cfg = PhysicsConfig(u=0.0)
    grid = oracle.GridConfig(points=1999, dt=1e-6)
    y = grid.y()
    phi = np.sqrt(2.0) * np.sin(2 * math.pi * y)
    phi[0] = phi[-1] = 0.0
    T = 1e-3
    out = oracle.evolve(oracle.GridState(0.0, phi), grid, cfg, T)
    energy = cfg.hbar**2 * (2 * math.pi / cfg.ell0) ** 2 / (2 * cfg.mass)
    expected = np.exp(-1j * energy * T / cfg.hbar) * phi
    assert np.max(np.abs(out.amplitudes - expected)) < 1e-6


def test_zero_stays_zero():
    cfg = PhysicsConfig()
    grid = oracle.GridConfig(points=200, dt=1e-7)
    out = oracle.evolve(oracle.GridState(0.0, np.zeros(202, dtype=complex)), grid, cfg, 1e-5)
    assert not np.any(out.amplitudes)


def test_single_step_advances_time():
    cfg = PhysicsConfig()
    grid = oracle.GridConfig(points=300, dt=1e-7)
    s0 = oracle.initial_grid(InitialState.TGP, grid, cfg)
    s1 = oracle.transform_equation_step(s0, grid, cfg)
    assert s1.t == pytest.approx(1e-7)
    assert s1.amplitudes[0] == 0 and s1.amplitudes[-1] == 0


def test_norm_is_conserved_in_the_moving_frame():
    cfg = PhysicsConfig(k=-50 * PI)
    grid = oracle.GridConfig(points=999, dt=2e-8)
    s0 = oracle.initial_grid(InitialState.TGP, grid, cfg)
    s1 = oracle.evolve(s0, grid, cfg, 2e-4)
    assert abs(s1.norm(cfg) - s0.norm(cfg)) <= 1e-12


def test_contracting_box_norm_is_conserved():
    cfg = PhysicsConfig(u=-50 * PI)
    grid = oracle.GridConfig(points=999, dt=2e-8)
    s0 = oracle.initial_grid(InitialState.TBS, grid, cfg)
    s1 = oracle.evolve(s0, grid, cfg, 2e-4)
    assert abs(s1.norm(cfg) - s0.norm(cfg)) <= 1e-12


def test_compare_with_itself_is_zero():
    spec = spectrum("tgp", U, 0.0)
    t = 3e-4
    ref = evaluate_grid(spec, t, 1000).psi
    gs = oracle.GridState(t, ref)
    assert oracle.compare(spec, gs) == (0.0, 0.0)


def test_compare_rejects_time_mismatch():
    spec = spectrum("tgp", U, 0.0)
    gs = oracle.GridState(1e-4, evaluate_grid(spec, 1e-4, 500).psi)
    with pytest.raises(InvalidArgumentError):
        oracle.compare(spec, gs, t=2e-4)


def test_evolve_needs_whole_steps():
    cfg = PhysicsConfig()
    grid = oracle.GridConfig(points=200, dt=1e-7)
    s0 = oracle.initial_grid(InitialState.TGP, grid, cfg)
    with pytest.raises(InvalidArgumentError):
        oracle.evolve(s0, grid, cfg, 1.5e-7)


def test_coarse_grid_tracks_series_short_time():
    spec = spectrum("tgp", U, 25 * PI)
    g = oracle.solve(InitialState.TGP, oracle.GridConfig(1999, 1e-8), spec.config, 1e-4)
    l2, linf = oracle.compare(spec, g)
    assert l2 < 2e-2 and linf < 2e-2


def test_self_convergence_is_second_order_for_smooth_data():
    spec = spectrum("tgp", U, 0.0)
    study = oracle.convergence_study(spec, oracle.GridConfig(499, 4e-8), 1e-4, levels=3)
    assert study.converged()
    assert study.ratios[0] > 3
    assert study.norm_drift < 1e-12
    assert study.spectral_errors[-1] < study.spectral_errors[0]
