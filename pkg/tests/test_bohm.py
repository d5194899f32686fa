import math

import numpy as np
import pytest

from _support import PI, U, spectrum
from movingwall import bohm
from movingwall.errors import InvalidArgumentError, NodeSingularityError
from movingwall.spectral import PhysicsConfig, SpectralState


def test_velocity_vanishes_at_symmetric_centre():
    spec = spectrum("tgp", 0.0, 0.0)
    for t in (0.0, 1e-3, 3e-3):
        assert bohm.velocity(spec, 0.5, t) == pytest.approx(0.0, abs=1e-9)


def test_eigenstate_velocity_is_zero():
    cfg = PhysicsConfig(u=0.0, n_terms=3)
    spec = SpectralState.from_coefficients(cfg, [0.0, 0.0, math.sqrt(0.5)])
    for x in (0.1, 0.25, 0.5, 0.77):
        assert bohm.velocity(spec, x, 1e-3) == pytest.approx(0.0, abs=1e-10)


def test_kicked_gaussian_starts_at_hbar_k_over_m():
    spec = spectrum("tgp", U, 25 * PI)
    assert bohm.velocity(spec, 0.5, 0.0) == pytest.approx(50 * PI, rel=1e-8)


def test_velocity_outside_box_rejected():
    with pytest.raises(InvalidArgumentError):
        bohm.velocity(spectrum("tgp", U, 0.0), 1.0, 0.0)


def test_velocity_at_node_raises():
    cfg = PhysicsConfig(u=0.0, n_terms=2)
    spec = SpectralState.from_coefficients(cfg, [0.0, 1.0])
    with pytest.raises(NodeSingularityError):
        bohm.velocity(spec, 0.5, 0.0)


def test_velocity_matches_current_over_density():
    from movingwall.spectral import evaluate
    spec = spectrum("tbs", U, -50 * PI)
    x, t = 0.53, 4e-4
    s = evaluate(spec, x, t)
    ref = (np.conj(s.psi) * s.dpsi).imag / abs(s.psi) ** 2 / spec.config.mass
    assert bohm.velocity(spec, x, t) == pytest.approx(float(ref), rel=1e-12)


def test_static_tiny_box_centre_is_at_rest():
    spec = spectrum("tbs", 0.0, 0.0)
    tr = bohm.integrate_trajectory(spec, 0.5, 1e-3)
    assert tr.status is bohm.TrajectoryStatus.COMPLETED
    assert np.max(np.abs(tr.positions - 0.5)) < 1e-12


def test_mirror_starts_give_mirror_paths():
    spec = spectrum("tgp", 0.0, 0.0)
    d = 0.004
    a = bohm.integrate_trajectory(spec, 0.5 - d, 5e-4)
    b = bohm.integrate_trajectory(spec, 0.5 + d, 5e-4)
    assert np.max(np.abs((a.positions - 0.5) + (b.positions - 0.5))) < 1e-8


def test_trajectories_stay_ordered_and_inside():
    spec = spectrum("tgp", U, 0.0)
    starts = bohm.fig2_starts(spec)
    trajs = bohm.ensemble(spec, bohm.EnsembleSpec(starts, 1e-3))
    assert [tr.x0 for tr in trajs] == list(starts)
    pos = np.vstack([tr.positions for tr in trajs])
    assert np.all(np.diff(pos, axis=0) > 0)
    ell = spec.config.ell0 + spec.config.u * trajs[0].times
    assert np.all(pos > 0) and np.all(pos < ell)
    assert np.all(np.diff(trajs[0].times) > 0)


def test_halving_step_barely_moves_endpoint():
    spec = spectrum("tbs", U, 0.0)
    x0 = 0.51
    a = bohm.integrate_trajectory(spec, x0, 1e-3, 1e-7).positions[-1]
    b = bohm.integrate_trajectory(spec, x0, 1e-3, 5e-8).positions[-1]
    assert abs(a - b) <= 1e-6 * spec.config.ell0


def test_threaded_ensemble_matches_serial():
    spec = spectrum("tbs", U, 25 * PI)
    es = bohm.EnsembleSpec((0.49, 0.5, 0.51), 2e-4)
    serial = bohm.ensemble(spec, es)
    threaded = bohm.ensemble(spec, es, workers=3)
    for a, b in zip(serial, threaded):
        assert np.array_equal(a.positions, b.positions)


def test_empty_ensemble():
    assert bohm.ensemble(spectrum("tgp", U, 0.0), bohm.EnsembleSpec((), 1e-3)) == []


@pytest.mark.parametrize("x0", [0.0, 1.0, -0.2])
def test_start_must_be_inside(x0):
    with pytest.raises(InvalidArgumentError):
        bohm.integrate_trajectory(spectrum("tgp", U, 0.0), x0, 1e-4)


class _StubField:
    def __init__(self, spec, velocity):
        self.spec = spec
        self._v = velocity

    def velocity(self, t, x):
        return self._v(t, x)


def test_wall_runaway_is_clamped(monkeypatch):
    spec = spectrum("tgp", 0.0, 0.0)
    # a field that throws the particle through the right wall within one step
    monkeypatch.setattr(bohm, "_GuidanceField", lambda s: _StubField(s, lambda t, x: 1e7))
    tr = bohm.integrate_trajectory(spec, 0.5, 1e-5)
    assert tr.status is bohm.TrajectoryStatus.WALL_CLAMPED
    assert np.all(tr.positions < 1.0)


def test_node_hit_aborts(monkeypatch):
    spec = spectrum("tgp", 0.0, 0.0)

    def v(t, x):
        if t > 5e-7:
            raise NodeSingularityError("wavefunction node", t, x)
        return 0.0

    monkeypatch.setattr(bohm, "_GuidanceField", lambda s: _StubField(s, v))
    tr = bohm.integrate_trajectory(spec, 0.5, 1e-5)
    assert tr.status is bohm.TrajectoryStatus.NODE_ABORTED
    assert tr.times[-1] <= 6e-7


def test_sampling_after_stop_is_nan():
    tr = bohm.Trajectory(np.array([0.0, 1.0]), np.array([0.3, 0.4]), 0.3,
                         bohm.TrajectoryStatus.WALL_CLAMPED)
    out = bohm.sample_at(tr, [0.5, 2.0])
    assert out[0] == pytest.approx(0.35) and math.isnan(out[1])


def test_leading_gaussian_trajectory_rides_with_the_wall():
    # long-run drift of the x_c + 2 sigma0 path, averaged over t in [0.005, 0.01]
    spec = spectrum("tgp", U, 0.0)
    tr = bohm.integrate_trajectory(spec, spec.config.xc + 2 * spec.config.sigma0, 0.01)
    assert tr.status is bohm.TrajectoryStatus.COMPLETED
    x_mid, x_end = bohm.sample_at(tr, [0.005, 0.01])
    mean_speed = (x_end - x_mid) / 0.005
    assert mean_speed == pytest.approx(spec.config.u, rel=0.1)
