"""Acceptance criteria 1-12, each at its stated tolerance.

Every test logs one PASS/FAIL line (printed in the pytest terminal summary)
before asserting, so the full picture is visible even when some fail.
"""

import filecmp
import math
import os

import numpy as np

from _support import ACCEPTANCE_LOG, PI, U, force_scale, spectrum
from movingwall import bohm, cli, oracle
from movingwall import observables as ob
from movingwall.spectral import (InitialState, PhysicsConfig, coefficient_closed_form_tgp,
                                 coefficient_quadrature)

ERF_NORM = math.erf(0.05 / (2 * math.sqrt(2) * 0.005))  # Erf[5/sqrt 2]
NORM_TIMES = (0.0005, 0.001, 0.003)


def record(number, ok, detail):
    verdict = "PASS" if ok else "FAIL"
    ACCEPTANCE_LOG.append((number, verdict, detail))
    print(f"criterion {number}: {verdict}  {detail}")
    assert ok, f"criterion {number}: {detail}"


def test_criterion_01_gaussian_norm():
    spec = spectrum("tgp", U, 0.0)
    quad_err = abs(spec.initial_norm - ERF_NORM)
    drift = max(abs(ob.norm(spec, t) - ERF_NORM) for t in NORM_TIMES)
    ok = quad_err <= 1e-9 and drift <= 1e-6
    record(1, ok, f"|initial norm - Erf| = {quad_err:.2e} (tol 1e-9); "
                  f"max |norm(t) - Erf| over t in {NORM_TIMES} = {drift:.2e} (tol 1e-6)")


def test_criterion_02_tiny_box_norm():
    spec = spectrum("tbs", U, 0.0)
    dev = max(abs(ob.norm(spec, t) - 1.0) for t in (0.0,) + NORM_TIMES)
    bigger = spectrum("tbs", U, 0.0, n_terms=1000)
    dev_1000 = abs(ob.norm(bigger, 0.003) - 1.0)
    record(2, dev <= 1e-6,
           f"max |norm(t) - 1| = {dev:.2e} at n_terms=400 (tol 1e-6); "
           f"the 400-mode series keeps only {spec.parseval:.10f} of the state; "
           f"n_terms=1000 still misses {dev_1000:.2e}")


def test_criterion_03_closed_form_coefficients():
    n = np.arange(1, 401)
    worst, where = 0.0, None
    for u in (0.0, 20 * PI, 100 * PI, 200 * PI):
        for k in (0.0, 25 * PI, -25 * PI, 75 * PI, -75 * PI):
            cfg = PhysicsConfig(u=u, k=k)
            cf = coefficient_closed_form_tgp(n, cfg)
            qd = coefficient_quadrature(n, InitialState.TGP, cfg)
            dev = float(np.max(np.abs(cf - qd)) / np.max(np.abs(qd)))
            if dev > worst:
                worst, where = dev, (round(u / PI), round(k / PI))
    record(3, worst <= 1e-8,
           f"max_n |closed - quadrature| / max_n |f_n| = {worst:.2e} (tol 1e-8), "
           f"worst at u={where[0]}pi, k={where[1]}pi")


def test_criterion_04_momentum_theorem():
    dt = 1e-7
    times = np.linspace(1e-4, 3e-3, 20)
    worst, where = 0.0, None
    for st in ("tbs", "tgp"):
        for k in (0.0, 25 * PI):
            spec = spectrum(st, U, k)
            scale = force_scale(spec.config)
            for t in times:
                fd = (ob.p_expectation(spec, t + dt, normalized=False)
                      - ob.p_expectation(spec, t - dt, normalized=False)) / (2 * dt)
                f = ob.force_boundary(spec, t)
                rel = abs(fd - f) / max(abs(f), scale)
                if rel > worst:
                    worst, where = rel, (st, round(k / PI), t)
    record(4, worst <= 1e-3,
           f"max |d<p>/dt - f| / max(|f|, hbar^2/(2m l0^3)) = {worst:.2e} (tol 1e-3), "
           f"worst {where[0]} k={where[1]}pi t={where[2]:.2e}")


def _all_preset_physics():
    seen = {}
    for p in cli.PRESETS.values():
        for sc in p.scenarios:
            key = (sc.state.value, sc.physics.u, sc.physics.k)
            seen.setdefault(key, (sc.t0, sc.t1))
    return seen


def test_criterion_05_three_formulations():
    worst, where = 0.0, None
    for (st, u, k), (t0, t1) in sorted(_all_preset_physics().items()):
        spec = spectrum(st, u, k)
        scale = force_scale(spec.config)
        for t in np.linspace(t0, t1, 21):
            vals = [ob.force(spec, t, f) for f in ob.ForceFormulation]
            rel = (max(vals) - min(vals)) / max(max(abs(v) for v in vals), scale)
            if rel > worst:
                worst, where = rel, (st, round(u / PI), round(k / PI), t)
    record(5, worst <= 1e-8,
           f"max spread of boundary/general-bohm/general-qm = {worst:.2e} relative (tol 1e-8) "
           f"over {len(_all_preset_physics())} preset configurations")


def test_criterion_06_static_nullity():
    f_worst, x_worst = 0.0, 0.0
    for st in ("tbs", "tgp"):
        spec = spectrum(st, 0.0, 0.0)
        scale = force_scale(spec.config)
        for t in np.linspace(0, 3e-3, 61):
            f_worst = max(f_worst, abs(ob.force(spec, t)) / scale)
        for t in np.linspace(0, 3e-3, 11):
            x_worst = max(x_worst, abs(ob.x_expectation(spec, t) - spec.config.xc))
    record(6, f_worst <= 1e-8 and x_worst <= 1e-8,
           f"sup |f| = {f_worst:.2e} x scale (tol 1e-8); sup |<x> - x_c| = {x_worst:.2e} (tol 1e-8)")


def test_criterion_07_initial_momenta():
    # verdict on the normalised expectation; raw integrals over the series are reported too
    k = 25 * PI
    tbs_spec, tgp_spec = spectrum("tbs", U, k), spectrum("tgp", U, k)
    tbs = ob.p_expectation(tbs_spec, 0.0)
    tbs_raw = ob.p_expectation(tbs_spec, 0.0, normalized=False)
    tgp = ob.p_expectation(tgp_spec, 0.0)
    tgp_raw = ob.p_expectation(tgp_spec, 0.0, normalized=False)
    target = k * ERF_NORM
    e_tbs = abs(tbs - k) / k
    e_tgp = max(abs(tgp - target), abs(tgp_raw - target)) / target
    record(7, e_tbs <= 1e-6 and e_tgp <= 1e-6,
           f"TBS <p>(0) = {tbs:.12g} vs hbar k, rel {e_tbs:.1e}; "
           f"TGP <p>(0) = {tgp:.12g} (raw {tgp_raw:.12g}) vs hbar k Erf[5/sqrt2], "
           f"worst rel {e_tgp:.1e} (tol 1e-6); raw TBS integral {tbs_raw:.12g} "
           f"is low by the truncation deficit ({abs(tbs_raw - k) / k:.1e})")


def test_criterion_08_static_bohm_paths():
    sample_t = np.linspace(0, 3e-3, 31)
    centre_worst, track_worst = 0.0, 0.0
    notes = []
    for st in ("tbs", "tgp"):
        spec = spectrum(st, 0.0, 0.0)
        centre = bohm.integrate_trajectory(spec, 0.5, 3e-3)
        assert centre.status is bohm.TrajectoryStatus.COMPLETED
        centre_worst = max(centre_worst, float(np.max(np.abs(centre.positions - 0.5))))
        xm = np.array([ob.x_expectation(spec, t) for t in sample_t])
        tr = bohm.integrate_trajectory(spec, xm[0], 3e-3)
        assert tr.status is bohm.TrajectoryStatus.COMPLETED
        dev = float(np.max(np.abs(bohm.sample_at(tr, sample_t) - xm)))
        track_worst = max(track_worst, dev)
        notes.append(f"{st}: {dev:.1e}")
    # probe: start at the un-normalised mean, which sits below 0.5 by half the truncated norm
    spec = spectrum("tgp", 0.0, 0.0)
    x_raw = ob.x_expectation(spec, 0.0, normalized=False)
    probe = bohm.integrate_trajectory(spec, x_raw, 3e-3)
    probe_dev = float(np.nanmax(np.abs(bohm.sample_at(probe, sample_t) - x_raw)))
    record(8, centre_worst <= 1e-6 and track_worst <= 1e-4,
           f"central path max |x - 0.5| = {centre_worst:.1e} (tol 1e-6); "
           f"max |x(t) - <x>(t)| = {track_worst:.1e} (tol 1e-4) [{'; '.join(notes)}]; "
           f"probe from raw mean {x_raw:.9f} drifts {probe_dev:.1e}")


def test_criterion_09_onset_ordering():
    times = np.linspace(0.0, 3e-3, 501)  # the fig4-force-long window
    onset = {}
    for st in ("tbs", "tgp"):
        dyn = ob.force_series(spectrum(st, U, 0.0), times)
        static = ob.force_series(spectrum(st, 0.0, 0.0), times)
        onset[st] = ob.deviation_onset(dyn, static)
    ok = (onset["tbs"] is not None and onset["tgp"] is not None
          and onset["tbs"] < onset["tgp"] and 1.5 <= onset["tgp"] / onset["tbs"] <= 3)
    ratio = onset["tgp"] / onset["tbs"] if ok or (onset["tbs"] and onset["tgp"]) else float("nan")
    record(9, ok, f"onset TBS = {onset['tbs']}, TGP = {onset['tgp']}, ratio {ratio:.2f} "
                  f"(need TBS earlier and ratio in [1.5, 3]; window [0, 3e-3], 501 samples)")


def test_criterion_10_oracle_equivalence():
    t_end = 5e-4
    base = oracle.GridConfig(999, 4e-8)
    converged = oracle.GridConfig(15999, 1e-8)
    parts, ok = [], True
    for st in ("tgp", "tbs"):
        spec = spectrum(st, U, 0.0)
        study = oracle.convergence_study(spec, base, t_end, levels=4)
        l2, _ = oracle.compare(spec, oracle.solve(InitialState(st), converged, spec.config, t_end))
        good = study.converged() and study.norm_drift <= 1e-6 and l2 <= 1e-3
        ok &= good
        parts.append(f"{st}: refinement ratios {', '.join(f'{r:.2f}' for r in study.ratios)} "
                     f"(need >= 3), drift {study.norm_drift:.1e}, "
                     f"L2 at {converged.points} pts = {l2:.2e} (tol 1e-3)")
    record(10, ok, "; ".join(parts))


def test_criterion_11_sign_phenomenology():
    times = np.linspace(0.0, 5e-4, 501)
    signs = {}
    for m in (-25, 25):
        spec = spectrum("tgp", U, m * PI)
        series = ob.force_series(spec, times)
        floor = 1e-8 * force_scale(spec.config)
        signs[m] = (ob.first_excursion_sign(series, floor=floor),
                    float(np.max(np.abs(series.values))))
    static_plus = ob.first_excursion_sign(ob.force_series(spectrum("tgp", 0.0, 25 * PI), times))
    ok = signs[-25][0] == 1 and signs[25][0] == -1
    record(11, ok, f"dynamic TGP first excursion: k=-25pi -> {signs[-25][0]:+d} (peak {signs[-25][1]:.2e}), "
                   f"k=+25pi -> {signs[25][0]:+d} (peak {signs[25][1]:.1e}); "
                   f"static k=+25pi curve -> {static_plus:+d}")


def _dir_identical(a, b):
    names = sorted(n for n in os.listdir(a) if n.endswith(".csv"))
    if names != sorted(n for n in os.listdir(b) if n.endswith(".csv")):
        return False
    match, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
    return not mismatch and not errors and len(match) == len(names)


def test_criterion_12_determinism(tmp_path):
    ok = True
    for name in ("fig7-force-u", "fig1-initial"):
        dirs = []
        for tag, threads in (("a", 1), ("b", 1), ("c", 4)):
            d = tmp_path / f"{name}-{tag}"
            assert cli.main(["run", "--preset", name, "--out", str(d),
                             "--threads", str(threads)]) == 0
            dirs.append(d)
        ok &= _dir_identical(dirs[0], dirs[1]) and _dir_identical(dirs[0], dirs[2])
    record(12, ok, "fig7-force-u and fig1-initial CSVs byte-identical across two runs "
                   "and across --threads 1 / 4")
