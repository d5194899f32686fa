"""Scenario runner: config files or named presets in, CSV/SVG/manifest out.

Exit codes: 0 success, 2 usage or configuration error (including an unknown
preset), 3 I/O failure, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import ast
import configparser
import csv
import json
import math
import operator
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import __version__, bohm, observables, oracle
from .errors import InvalidArgumentError, MovingWallError
from .numerics import QuadratureSpec
from .spectral import InitialState, PhysicsConfig, SpectralState, build_spectrum, evaluate

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4
NORM_TOLERANCE = 1e-6
PI = math.pi

COMPUTATIONS = ("wavefield", "norm", "x-mean", "p-mean", "force", "trajectories", "oracle-compare")


class ConfigError(InvalidArgumentError):
    pass


class RunError(Exception):
    """A numeric failure tagged with the operation and the preset/config it came from."""

    def __init__(self, where: str, source: str, exc: Exception):
        super().__init__(f"{where} failed for {source}: {type(exc).__name__}: {exc}")
        self.cause = exc


# --------------------------------------------------------------------------
# expressions in config values

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}


def eval_expr(text: str, names: Mapping[str, float]) -> float:
    """Evaluate a small arithmetic expression such as ``100*pi`` or ``xc - 2*sigma0``."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse expression {text!r}") from exc

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](walk(node.operand))
        if isinstance(node, ast.Name):
            if node.id not in names:
                raise ConfigError(f"unknown name {node.id!r} in {text!r}")
            return float(names[node.id])
        raise ConfigError(f"unsupported syntax in {text!r}")

    return walk(tree)


def _uses_name(text: str, name: str) -> bool:
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError:
        return False
    return any(isinstance(n, ast.Name) and n.id == name for n in ast.walk(tree))


# --------------------------------------------------------------------------
# scenarios

@dataclass(frozen=True)
class Scenario:
    physics: PhysicsConfig
    state: InitialState
    computations: tuple[str, ...]
    t0: float = 0.0
    t1: float = 0.003
    samples: int = 301
    label: str = ""
    quad_panels: int = observables.SPATIAL_QUADRATURE.panels
    traj_dt: float = bohm.DEFAULT_DT
    starts: tuple[str, ...] = ()
    force_formulation: str = observables.ForceFormulation.BOUNDARY.value
    snapshot_points: int = 2001
    oracle_points: int = 15999
    oracle_dt: float = 1e-8
    coefficient_method: str = "quadrature"
    output_dir: str = "out"

    def __post_init__(self):
        object.__setattr__(self, "state", InitialState(self.state))
        object.__setattr__(self, "computations", tuple(self.computations))
        object.__setattr__(self, "starts", tuple(str(s) for s in self.starts))
        if not self.label:
            object.__setattr__(self, "label", "dynamic" if self.physics.u != 0 else "static")
        self.validate()

    def validate(self) -> None:
        unknown = [c for c in self.computations if c not in COMPUTATIONS]
        if unknown:
            raise ConfigError(f"unknown computations {unknown}; choose from {list(COMPUTATIONS)}")
        if not self.computations:
            raise ConfigError("no computations requested")
        if int(self.samples) != self.samples or self.samples < 2:
            raise ConfigError("samples must be an integer >= 2")
        if not (0.0 <= self.t0 < self.t1):
            raise ConfigError(f"need 0 <= t0 < t1, got t0={self.t0}, t1={self.t1}")
        if not self.t1 < self.physics.t_max:
            raise ConfigError(f"t1={self.t1} lies beyond the validity window t < {self.physics.t_max}")
        QuadratureSpec(self.quad_panels)
        if not self.traj_dt > 0:
            raise ConfigError("traj_dt must be positive")
        observables.ForceFormulation(self.force_formulation)
        if self.snapshot_points < 2:
            raise ConfigError("snapshot_points must be >= 2")
        oracle.GridConfig(self.oracle_points, self.oracle_dt)
        if self.coefficient_method not in ("quadrature", "closed-form"):
            raise ConfigError(f"unknown coefficient_method {self.coefficient_method!r}")
        if "trajectories" in self.computations and not self.starts:
            raise ConfigError("trajectories requested without starts")
        names = self.names()
        for s in self.starts:
            if _uses_name(s, "xmean0"):
                continue  # needs the spectrum, checked at run time
            x0 = eval_expr(s, names)
            if not 0.0 < x0 < self.physics.ell0:
                raise ConfigError(f"start {s!r} = {x0} is not inside (0, ell0)")
        if "oracle-compare" in self.computations:
            steps = (self.t1 - self.t0) / self.oracle_dt
            if abs(steps - round(steps)) > 1e-6:
                raise ConfigError("oracle_dt must divide the time window")

    def names(self, xmean0: float | None = None) -> dict[str, float]:
        p = self.physics
        out = {"pi": PI, "xc": p.xc, "x1": p.x1, "x2": p.x2, "sigma0": p.sigma0,
               "ell0": p.ell0, "ell1": p.ell1}
        if xmean0 is not None:
            out["xmean0"] = xmean0
        return out

    def times(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.samples)

    def flat(self) -> dict[str, object]:
        """Every parameter that affects the output, as flat config keys."""
        p = self.physics
        return {"hbar": p.hbar, "mass": p.mass, "ell0": p.ell0, "ell1": p.ell1, "sigma0": p.sigma0,
                "u": p.u, "k": p.k, "n_terms": p.n_terms, "state": self.state.value,
                "t0": self.t0, "t1": self.t1, "samples": self.samples,
                "computations": list(self.computations), "quad_panels": self.quad_panels,
                "traj_dt": self.traj_dt, "starts": list(self.starts), "label": self.label,
                "force_formulation": self.force_formulation,
                "snapshot_points": self.snapshot_points, "oracle_points": self.oracle_points,
                "oracle_dt": self.oracle_dt, "coefficient_method": self.coefficient_method}


_PHYSICS_KEYS = ("hbar", "mass", "ell0", "ell1", "sigma0", "u", "k")
_FLOAT_KEYS = ("t0", "t1", "traj_dt", "oracle_dt")
_INT_KEYS = ("n_terms", "samples", "quad_panels", "snapshot_points", "oracle_points")
_STR_KEYS = ("state", "label", "force_formulation", "coefficient_method", "output_dir")
_LIST_KEYS = ("computations", "starts")
KNOWN_KEYS = _PHYSICS_KEYS + _FLOAT_KEYS + _INT_KEYS + _STR_KEYS + _LIST_KEYS


def _as_int(key: str, value: float) -> int:
    if value != int(value):
        raise ConfigError(f"{key} must be an integer, got {value}")
    return int(value)


def scenario_from_mapping(raw: Mapping[str, str]) -> Scenario:
    unknown = sorted(set(raw) - set(KNOWN_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys {unknown}")
    consts = {"pi": PI}
    phys = {}
    for key in ("hbar", "mass", "ell0", "u", "k"):
        if key in raw:
            phys[key] = eval_expr(raw[key], consts)
    # ell1 and sigma0 may be written in terms of ell0
    consts = {**consts, "ell0": phys.get("ell0", 1.0)}
    for key in ("ell1", "sigma0"):
        if key in raw:
            phys[key] = eval_expr(raw[key], {**consts, **({"ell1": phys["ell1"]} if "ell1" in phys else {})})
    if "n_terms" in raw:
        phys["n_terms"] = _as_int("n_terms", eval_expr(raw["n_terms"], consts))
    try:
        physics = PhysicsConfig(**phys)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid physics parameters: {exc}") from exc
    kw: dict[str, object] = {}
    for key in _FLOAT_KEYS:
        if key in raw:
            kw[key] = eval_expr(raw[key], consts)
    for key in _INT_KEYS:
        if key in raw and key != "n_terms":
            kw[key] = _as_int(key, eval_expr(raw[key], consts))
    for key in _STR_KEYS:
        if key in raw:
            kw[key] = raw[key].strip()
    for key in _LIST_KEYS:
        if key in raw:
            kw[key] = tuple(v.strip() for v in raw[key].split(",") if v.strip())
    if "state" not in kw:
        raise ConfigError("config must set 'state' (tbs or tgp)")
    if "computations" not in kw:
        raise ConfigError("config must set 'computations'")
    try:
        kw["state"] = InitialState(str(kw["state"]).lower())
    except ValueError as exc:
        raise ConfigError(f"unknown state {kw['state']!r}; use tbs or tgp") from exc
    try:
        return Scenario(physics=physics, **kw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str) -> Scenario:
    """Read a flat key = value file (INI syntax, the section header is optional)."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text if text.lstrip().startswith("[") else "[scenario]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    sections = parser.sections()
    if len(sections) != 1:
        raise ConfigError(f"{path}: expected a single flat section, found {sections}")
    return scenario_from_mapping(dict(parser[sections[0]]))


# --------------------------------------------------------------------------
# tables and writers

@dataclass
class Table:
    header: tuple[str, ...]
    columns: tuple[np.ndarray, ...]
    title: str = ""

    def __post_init__(self):
        cols = tuple(np.asarray(c, dtype=float) for c in self.columns)
        if len(cols) != len(self.header) or len({c.size for c in cols}) > 1:
            raise InvalidArgumentError("table header and columns do not line up")
        self.columns = cols


def format_value(v: float) -> str:
    return format(float(v), ".17g")


def write_csv(path: str, table: Table) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.header)
        for row in zip(*table.columns):
            w.writerow([format_value(v) for v in row])


_SVG_COLORS = ("#000000", "#d62728", "#2ca02c", "#1f77b4", "#ff7f0e", "#9467bd", "#8c564b")


def render_svg(table: Table, width: int = 640, height: int = 400) -> str:
    """Static line plot of every column against the first one."""
    left, right, top, bottom = 80, 20, 30, 50
    x = table.columns[0]
    ys = [c for c in table.columns[1:]]
    finite = np.concatenate([y[np.isfinite(y)] for y in ys]) if ys else np.zeros(1)
    xmin, xmax = float(np.min(x)), float(np.max(x))
    ymin, ymax = (float(np.min(finite)), float(np.max(finite))) if finite.size else (0.0, 1.0)
    if xmax == xmin:
        xmax = xmin + 1.0
    if ymax == ymin:
        ymin, ymax = ymin - 1.0, ymax + 1.0
    pw, ph = width - left - right, height - top - bottom

    def px(v):
        return left + (v - xmin) / (xmax - xmin) * pw

    def py(v):
        return top + (ymax - v) / (ymax - ymin) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="14">{table.title}</text>',
           f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
           f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>']
    for i in range(5):
        fx = xmin + (xmax - xmin) * i / 4
        fy = ymin + (ymax - ymin) * i / 4
        out.append(f'<text x="{px(fx):.1f}" y="{top + ph + 16}" text-anchor="middle" '
                   f'font-size="10">{fx:.4g}</text>')
        out.append(f'<text x="{left - 6}" y="{py(fy) + 3:.1f}" text-anchor="end" '
                   f'font-size="10">{fy:.4g}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 10}" text-anchor="middle" '
               f'font-size="12">{table.header[0]}</text>')
    for j, (name, y) in enumerate(zip(table.header[1:], ys)):
        color = _SVG_COLORS[j % len(_SVG_COLORS)]
        ok = np.isfinite(y)
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x[ok], y[ok]))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>')
        ly = top + 14 * (j + 1)
        out.append(f'<line x1="{left + pw - 110}" y1="{ly}" x2="{left + pw - 90}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw - 85}" y="{ly + 4}" font-size="11">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# execution

@dataclass
class RunResult:
    scenario: Scenario
    tables: dict[str, Table]
    control: dict[str, object]
    spectrum: dict[str, object] = field(default_factory=dict)


def _stage(where: str, source: str, fn: Callable, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except MovingWallError as exc:
        raise RunError(where, source, exc) from exc
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        raise RunError(where, source, exc) from exc


def _stem(sc: Scenario, what: str) -> str:
    return f"{what}_{sc.state.value}_{sc.label}"


def run_scenario(sc: Scenario, source: str) -> RunResult:
    q = QuadratureSpec(sc.quad_panels)
    spec: SpectralState = _stage("spectral.build_spectrum", source, build_spectrum, sc.state,
                                 sc.physics, sc.coefficient_method)
    times = sc.times()
    tables: dict[str, Table] = {}
    norm_times = list(times) if "norm" in sc.computations else [sc.t0, sc.t1]
    norms = np.array([_stage("observables.norm", source, observables.norm, spec, float(t), q)
                      for t in norm_times])
    norm0 = _stage("observables.norm", source, observables.norm, spec, 0.0, q)
    deviation = float(np.max(np.abs(norms - norm0))) / norm0
    control = {"norm0": norm0, "parseval": spec.parseval, "max_rel_norm_deviation": deviation,
               "checked_times": [float(t) for t in norm_times], "tolerance": NORM_TOLERANCE}
    if not deviation <= NORM_TOLERANCE:
        raise RunError("observables.norm (conservation check)", source,
                       ArithmeticError(f"norm drifted by {deviation:.3e} relative"))
    if "wavefield" in sc.computations:
        ell = sc.physics.ell(sc.t0)
        x = np.linspace(0.0, ell, sc.snapshot_points)
        s = _stage("spectral.evaluate", source, evaluate, spec, x, sc.t0)
        tables[_stem(sc, "wavefield")] = Table(("x", "re_psi", "im_psi", "rho"),
                                               (x, s.psi.real, s.psi.imag, np.abs(s.psi) ** 2),
                                               f"psi at t={sc.t0:g}")
    if "norm" in sc.computations:
        tables[_stem(sc, "norm")] = Table(("t", "norm"), (times, norms), "norm")
    if "x-mean" in sc.computations:
        xs = [_stage("observables.x_expectation", source, observables.x_expectation, spec,
                     float(t), q) for t in times]
        tables[_stem(sc, "xmean")] = Table(("t", "x_mean"), (times, xs), "<x>(t)")
    if "p-mean" in sc.computations:
        ps = [_stage("observables.p_expectation", source, observables.p_expectation, spec,
                     float(t), q) for t in times]
        tables[_stem(sc, "pmean")] = Table(("t", "p_mean"), (times, ps), "<p>(t)")
    if "force" in sc.computations:
        fs = _stage("observables.force_series", source, observables.force_series, spec, times,
                    sc.force_formulation)
        tables[_stem(sc, "force")] = Table(("t", "f_qm"), (times, fs.values), "f_qm(t)")
    if "trajectories" in sc.computations:
        names = sc.names()
        if any(_uses_name(s, "xmean0") for s in sc.starts):
            names["xmean0"] = _stage("observables.x_expectation", source,
                                     observables.x_expectation, spec, 0.0, q)
        starts = tuple(eval_expr(s, names) for s in sc.starts)
        trajs = _stage("bohm.ensemble", source, bohm.ensemble, spec,
                       bohm.EnsembleSpec(starts, sc.t1, sc.traj_dt))
        cols = [times] + [bohm.sample_at(tr, times) for tr in trajs]
        header = ("t",) + tuple(f"x_{i}" for i in range(len(trajs)))
        tables[_stem(sc, "trajectories")] = Table(header, cols, "Bohm trajectories")
        control["trajectories"] = [{"x0": tr.x0, "status": tr.status.value,
                                    "t_last": float(tr.times[-1])} for tr in trajs]
    if "oracle-compare" in sc.computations:
        grid = oracle.GridConfig(sc.oracle_points, sc.oracle_dt)
        g = _stage("oracle.solve", source, oracle.solve, sc.state, grid, sc.physics, sc.t1)
        l2, linf = _stage("oracle.compare", source, oracle.compare, spec, g)
        tables[_stem(sc, "oracle")] = Table(("t", "l2_error", "linf_error"),
                                            ([sc.t1], [l2], [linf]), "series vs grid")
    info = {"coefficient_method": spec.coefficient_method, "n_terms": spec.n_terms,
            "initial_norm": spec.initial_norm}
    return RunResult(sc, tables, control, info)


# --------------------------------------------------------------------------
# presets

@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    scenarios: tuple[Scenario, ...]
    combine: Callable[[dict[str, Table]], dict[str, Table]] | None = None


def _base(**changes) -> PhysicsConfig:
    return PhysicsConfig().replace(**changes)


def _pair(state: InitialState, comps: Sequence[str], u: float, k: float = 0.0, suffix: str = "",
          **kw) -> tuple[Scenario, Scenario]:
    return (Scenario(_base(u=0.0, k=k), state, tuple(comps), label=f"{suffix}static", **kw),
            Scenario(_base(u=u, k=k), state, tuple(comps), label=f"{suffix}dynamic", **kw))


def _k_tag(m: int) -> str:
    return f"k{m}pi_"


def _fig3_combine(tables: dict[str, Table]) -> dict[str, Table]:
    out = dict(tables)
    tbs = out.pop("trajectories_tbs_dynamic")
    tgp = out.pop("trajectories_tgp_dynamic")
    out["bohm_center"] = Table(("t", "x_tbs", "x_tgp"), (tbs.columns[0], tbs.columns[1],
                                                          tgp.columns[1]), "Bohm path from <x>(0)")
    return out


def _build_presets() -> dict[str, Preset]:
    u = 100 * PI
    ks = (-75, -50, -25, 25, 50, 75)
    long_win = dict(t0=0.0, t1=0.003)
    short_win = dict(t0=0.0, t1=0.0005, samples=501)
    presets = [
        Preset("fig1-initial", "initial wavefunction of both states and their norm",
               tuple(Scenario(_base(u=u), st, ("wavefield", "norm"), label="initial",
                              t0=0.0, t1=0.003, samples=7)
                     for st in InitialState)),
        Preset("fig2-trajectories", "Bohm trajectories from xc-2sigma0, xc, xc+2sigma0, k=0",
               tuple(s for st in InitialState
                     for s in _pair(st, ("trajectories",), u, samples=301,
                                    starts=("xc - 2*sigma0", "xc", "xc + 2*sigma0"),
                                    **long_win))),
        Preset("fig3-xmean", "<x>(t) static and dynamic plus the Bohm path started at <x>(0)",
               tuple(s for st in InitialState
                     for s in (Scenario(_base(u=0.0), st, ("x-mean",), label="static",
                                        samples=301, **long_win),
                               Scenario(_base(u=u), st, ("x-mean", "trajectories"),
                                        label="dynamic", samples=301, starts=("xmean0",),
                                        **long_win))),
               _fig3_combine),
        Preset("fig4-force-long", "force over the long window, static and dynamic, k=0",
               tuple(s for st in InitialState
                     for s in _pair(st, ("force",), u, samples=501, **long_win))),
        Preset("fig5-tbs-force-k", "tiny-box force for k = -75pi..75pi at u=100pi",
               tuple(s for m in ks
                     for s in _pair(InitialState.TBS, ("force",), u, m * PI, _k_tag(m),
                                    **short_win))),
        Preset("fig6-tgp-force-k", "Gaussian force for k = -75pi..75pi at u=100pi",
               tuple(s for m in ks
                     for s in _pair(InitialState.TGP, ("force",), u, m * PI, _k_tag(m),
                                    **short_win))),
        Preset("fig7-force-u", "dynamic force for u = 20pi, 100pi, 200pi at k=0",
               tuple(Scenario(_base(u=m * PI), st, ("force",), label=f"u{m}pi", **short_win)
                     for st in InitialState for m in (20, 100, 200))),
    ]
    return {p.name: p for p in presets}


PRESETS = _build_presets()


def preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; valid presets: {', '.join(PRESETS)}") from None


# --------------------------------------------------------------------------
# driver

def execute(scenarios: Sequence[Scenario], out_dir: str, source: str, svg: bool = False,
            threads: int = 1, combine=None, preset_name: str | None = None) -> list[str]:
    """Run all scenarios, then write outputs in a fixed order. Returns written paths."""
    try:
        os.makedirs(out_dir, exist_ok=True)
        probe = os.path.join(out_dir, ".write-test")
        with open(probe, "w"):
            pass
        os.remove(probe)
    except OSError as exc:
        raise OSError(f"output directory {out_dir!r} is not writable: {exc}") from exc
    workers = max(1, int(threads))
    if workers == 1 or len(scenarios) == 1:
        results = [run_scenario(sc, source) for sc in scenarios]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda sc: run_scenario(sc, source), scenarios))
    tables: dict[str, Table] = {}
    for r in results:
        for name, tab in r.tables.items():
            if name in tables:
                raise ConfigError(f"two runs produce the same output file {name}.csv")
            tables[name] = tab
    if combine is not None:
        tables = combine(tables)
    written = []
    for name in sorted(tables):
        tab = tables[name]
        if not tab.title:
            tab.title = name
        path = os.path.join(out_dir, f"{name}.csv")
        write_csv(path, tab)
        written.append(path)
        if svg:
            spath = os.path.join(out_dir, f"{name}.svg")
            with open(spath, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(render_svg(Table(tab.header, tab.columns, name)))
            written.append(spath)
    manifest = {
        "tool": "movingwall",
        "version": __version__,
        "preset": preset_name,
        "source": source,
        "runs": [{"config": r.scenario.flat(), "spectrum": r.spectrum, "control": r.control,
                  "files": sorted(f"{n}.csv" for n in r.tables)} for r in results],
        "files": sorted(os.path.basename(p) for p in written),
    }
    mpath = os.path.join(out_dir, "manifest.json")
    with open(mpath, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(mpath)
    return written


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="movingwall", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario from a config file or a preset")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", metavar="FILE")
    src.add_argument("--preset", metavar="NAME")
    run.add_argument("--svg", action="store_true", help="also write one SVG plot per CSV")
    run.add_argument("--out", metavar="DIR", default=None, help="output directory")
    run.add_argument("--threads", type=int, default=1, metavar="N",
                     help="run independent curves concurrently")
    sub.add_parser("list-presets", help="print the preset names")
    val = sub.add_parser("validate", help="parse and check a config without computing")
    val.add_argument("--config", metavar="FILE", required=True)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "list-presets":
            for p in PRESETS.values():
                print(f"{p.name}\t{p.description}")
            return EXIT_OK
        if args.command == "validate":
            sc = load_config(args.config)
            print(f"{args.config}: ok ({sc.state.value}, {', '.join(sc.computations)})")
            return EXIT_OK
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        if args.preset is not None:
            p = preset(args.preset)
            out = args.out or os.path.join("out", p.name)
            written = execute(p.scenarios, out, f"preset {p.name}", args.svg, args.threads,
                              p.combine, p.name)
        else:
            sc = load_config(args.config)
            out = args.out or sc.output_dir
            written = execute([sc], out, f"config {args.config}", args.svg, args.threads)
        for path in written:
            print(path)
        return EXIT_OK
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RunError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except InvalidArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
