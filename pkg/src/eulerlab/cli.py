"""Config-driven runs, verification suites, and the kernel benchmark.

Subcommands:

* ``run <config.toml>``: seed the configured scenario, integrate, persist
  the coefficient trace (CSV), field snapshots, diagnostics JSON, and an
  SVG trace plot; evaluate every configured tolerance as a check.
  Exit 0 when all checks pass, 2 on a check failure, 1 on a config or
  numeric error.
* ``verify <suite>``: run a named property suite (algebra, cauchy,
  dynamics, group, or all) with pinned seeds and print a check table.
  Exit 2 on any failure.
* ``kernel-bench [sizes...]``: time direct versus far-field-accelerated
  particle summation.
* ``star-check <N>``: group axioms for the truncated composition algebra
  at order N.

Everything a run persists is a deterministic function of the config: CSV
and JSON floats are written with shortest round-trip formatting, and all
ensemble reductions go through the fixed pairwise tree. Wall-clock timings
are the one exception; they live in a separate ``timing.json`` sidecar so
the contract-covered artifacts stay bit-identical across reruns.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - 3.10 fallback
    import tomli as tomllib

from . import asymptotics as asym
from . import cauchy
from . import dynamics as dyn
from . import scenarios as scen
from .complexgrid import (
    ComplexField,
    Grid,
    cutoff_chi_prime,
    wirtinger_dz,
    write_field,
)


class ConfigError(ValueError):
    """Invalid configuration or command line; maps to exit code 1."""


# --------------------------------------------------------------------------
# RunConfig
# --------------------------------------------------------------------------


@dataclass
class RunConfig:
    """Validated run description parsed from a TOML file."""

    scenario_name: str
    scenario_params: dict
    grid_L: float = 6.0
    grid_n: int = 64
    n_seed: int = 64
    box: float | None = None
    dt: float = 0.01
    T: float = 0.5
    stride: int = 1
    k_max: int = 3
    n_tail: int = 5
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    outdir: str = "runs/out"
    final_snapshot: bool = False

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))


_KNOWN_CHECKS = (
    "a00_drift",
    "a01_drift",
    "weight_sum_drift",
    "slot_max",
    "a02_law",
    "euler_residual",
)


def _get(section: dict, key: str, kind, where: str, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"{where}.{key} is required.")
        return default
    val = section[key]
    if kind is float and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    if not isinstance(val, kind) or isinstance(val, bool):
        raise ConfigError(f"{where}.{key} must be {kind.__name__}.")
    return val


def load_config(path: str | Path) -> RunConfig:
    """Parse and validate a TOML run config; raises ConfigError on any
    violation, always naming the offending field."""
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    try:
        doc = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as e:
        raise ConfigError(f"config {path} is not valid TOML: {e}") from None

    scn_sec = doc.get("scenario")
    if not isinstance(scn_sec, dict) or "name" not in scn_sec:
        raise ConfigError("scenario.name is required.")
    params = {k: v for k, v in scn_sec.items() if k != "name"}

    grid = doc.get("grid", {})
    seeding = doc.get("seeding", {})
    tsec = doc.get("time", {})
    tracking = doc.get("tracking", {})
    output = doc.get("output", {})

    cfg = RunConfig(
        scenario_name=str(scn_sec["name"]),
        scenario_params=params,
        grid_L=_get(grid, "L", float, "grid", 6.0),
        grid_n=_get(grid, "n", int, "grid", 64),
        n_seed=_get(seeding, "n_seed", int, "seeding", 64),
        box=_get(seeding, "box", float, "seeding", None),
        dt=_get(tsec, "dt", float, "time", required=True),
        T=_get(tsec, "T", float, "time", required=True),
        stride=_get(tsec, "stride", int, "time", 1),
        k_max=_get(tracking, "k_max", int, "tracking", 3),
        n_tail=_get(tracking, "n_tail", int, "tracking", 5),
        tolerances=dict(doc.get("tolerances", {})),
        seed=_get(doc, "seed", int, "config", 0),
        outdir=_get(output, "dir", str, "output", "runs/out"),
        final_snapshot=bool(output.get("final_snapshot", False)),
    )
    validate_config(cfg)
    return cfg


def validate_config(cfg: RunConfig) -> None:
    if not (cfg.dt > 0):
        raise ConfigError("time.dt must be > 0.")
    if not np.isfinite(cfg.dt):
        raise ConfigError("time.dt must be finite.")
    if not (cfg.T >= cfg.dt):
        raise ConfigError("time.T must be >= time.dt.")
    if abs(cfg.n_steps * cfg.dt - cfg.T) > 1e-9 * max(1.0, cfg.T):
        raise ConfigError("time.T must be an integer multiple of time.dt.")
    if cfg.stride < 1:
        raise ConfigError("time.stride must be >= 1.")
    if not (0 <= cfg.k_max <= 8):
        raise ConfigError("tracking.k_max must be between 0 and 8.")
    if not (1 <= cfg.n_tail <= 8):
        raise ConfigError("tracking.n_tail must be between 1 and 8.")
    if cfg.grid_L <= 0 or not np.isfinite(cfg.grid_L):
        raise ConfigError("grid.L must be positive and finite.")
    if cfg.grid_n < 16:
        raise ConfigError("grid.n must be an integer >= 16.")
    if cfg.n_seed < 2:
        raise ConfigError("seeding.n_seed must be at least 2.")
    if cfg.box is not None and cfg.box <= 0:
        raise ConfigError("seeding.box must be positive.")
    for name, bound in cfg.tolerances.items():
        if name not in _KNOWN_CHECKS:
            raise ConfigError(
                f"tolerances.{name} does not map to a check "
                f"(known: {', '.join(_KNOWN_CHECKS)})."
            )
        if isinstance(bound, bool) or not isinstance(bound, (int, float)) or not bound > 0:
            raise ConfigError(f"tolerances.{name} must be a positive number.")
    if "a02_law" in cfg.tolerances and cfg.k_max < 2:
        raise ConfigError("tolerances.a02_law needs tracking.k_max >= 2.")
    if "euler_residual" in cfg.tolerances and cfg.scenario_name not in _ANALYTIC_EULER:
        raise ConfigError(
            "tolerances.euler_residual needs a scenario whose exact evolution "
            f"is a rigid translation ({', '.join(sorted(_ANALYTIC_EULER))})."
        )


def resolve_scenario(cfg: RunConfig) -> scen.Scenario:
    """Build the Scenario named by the config."""
    name = cfg.scenario_name
    p = cfg.scenario_params
    try:
        if name == "uniform":
            c = p.get("c", [0.0, 0.0])
            return scen.composite(complex(c[0], c[1]), [], [])
        if name == "gaussian":
            return scen.radial_vortex(
                gamma=float(p.get("gamma", np.pi)), sigma=float(p.get("sigma", 0.5))
            )
        if name == "vortex_in_uniform_flow":
            return scen.vortex_in_uniform_flow()
        if name == "two_vortex":
            return scen.two_vortex()
        if name == "hamiltonian":
            return scen.hamiltonian_field(int(p.get("l", 2)), eps=float(p.get("eps", 1.0)))
        if name == "random_schwartz":
            return scen.random_schwartz(
                int(p.get("seed", cfg.seed)), int(p.get("complexity", 2))
            )
    except (scen.ScenarioError, ValueError, TypeError, IndexError) as e:
        raise ConfigError(f"scenario parameters invalid for '{name}': {e}") from None
    raise ConfigError(f"scenario.name '{name}' is not a known scenario.")


# --------------------------------------------------------------------------
# RunRecord and persistence
# --------------------------------------------------------------------------


@dataclass
class RunRecord:
    """What a run produced: artifact paths plus the evaluated checks."""

    config_echo: dict
    trace_csv: str
    snapshot_paths: list
    diagnostics_path: str
    checks: list              # [{name, measured, bound, passed}]
    failure: str | None = None

    @property
    def passed(self) -> bool:
        return self.failure is None and all(c["passed"] for c in self.checks)


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_trace_csv(path: Path, trace: dyn.TraceRecord) -> None:
    k_max = trace.a0.shape[1] - 1
    cols = ["t"]
    for k in range(k_max + 1):
        cols += [f"a0{k}_re", f"a0{k}_im"]
    if trace.slots is not None:
        for nm in ("a10", "a20", "a11"):
            cols += [f"{nm}_re", f"{nm}_im"]
    cols += ["weight_sum_re", "weight_sum_im"]
    lines = [",".join(cols)]
    for i, t in enumerate(trace.times):
        row = [_fmt(t)]
        for k in range(k_max + 1):
            row += [_fmt(trace.a0[i, k].real), _fmt(trace.a0[i, k].imag)]
        if trace.slots is not None:
            for j in range(3):
                row += [_fmt(trace.slots[i, j].real), _fmt(trace.slots[i, j].imag)]
        row += [_fmt(trace.weight_sums[i].real), _fmt(trace.weight_sums[i].imag)]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


_SVG_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
               "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22")


def _write_trace_svg(path: Path, trace: dyn.TraceRecord) -> None:
    """Self-contained line plot of |a_0k|(t). Presentation only."""
    w, h, ml, mr, mt, mb = 640, 360, 50, 110, 20, 40
    t = np.asarray(trace.times, dtype=float)
    k_max = trace.a0.shape[1] - 1
    series = [(f"|a0{k}|", np.abs(trace.a0[:, k])) for k in range(k_max + 1)]
    lo = min(float(np.min(v)) for _, v in series)
    hi = max(float(np.max(v)) for _, v in series)
    if hi <= lo:
        hi = lo + 1.0
    t0, t1 = float(t[0]), float(t[-1])
    if t1 <= t0:
        t1 = t0 + 1.0

    def sx(x):
        return ml + (x - t0) / (t1 - t0) * (w - ml - mr)

    def sy(y):
        return h - mb - (y - lo) / (hi - lo) * (h - mt - mb)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}" font-family="monospace" font-size="11">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{w - ml - mr}" height="{h - mt - mb}" '
        f'fill="none" stroke="#444"/>',
        f'<text x="{ml}" y="{h - 8}">t = {t0:.6g} .. {t1:.6g}</text>',
        f'<text x="4" y="{mt + 10}">{hi:.3g}</text>',
        f'<text x="4" y="{h - mb}">{lo:.3g}</text>',
    ]
    for i, (label, vals) in enumerate(series):
        color = _SVG_COLORS[i % len(_SVG_COLORS)]
        if t.size >= 2:
            pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(t, vals))
            parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                         f'stroke-width="1.5"/>')
        else:
            parts.append(f'<circle cx="{sx(t0):.2f}" cy="{sy(float(vals[0])):.2f}" '
                         f'r="3" fill="{color}"/>')
        parts.append(f'<text x="{w - mr + 6}" y="{mt + 14 + 14 * i}" '
                     f'fill="{color}">{label}</text>')
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n")


def _json_dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _config_echo(cfg: RunConfig) -> dict:
    return {
        "scenario": {"name": cfg.scenario_name, **cfg.scenario_params},
        "grid": {"L": cfg.grid_L, "n": cfg.grid_n},
        "seeding": {"n_seed": cfg.n_seed, "box": cfg.box},
        "time": {"dt": cfg.dt, "T": cfg.T, "stride": cfg.stride},
        "tracking": {"k_max": cfg.k_max, "n_tail": cfg.n_tail},
        "tolerances": dict(sorted(cfg.tolerances.items())),
        "seed": cfg.seed,
        "output": {"dir": cfg.outdir, "final_snapshot": cfg.final_snapshot},
    }


_ANALYTIC_EULER = ("uniform", "gaussian", "vortex_in_uniform_flow")


def _euler_check_value(cfg: RunConfig) -> float:
    """Momentum residual at t = T from three snapshots of the exact motion.

    The supported scenarios evolve by rigid translation with the background,
    so the time-t field is the t = 0 field recentered at c*t; the centered
    difference then isolates the discretization residual the run's own
    fields inherit. Scenario gating happens in validate_config."""
    g = Grid(cfg.grid_L, cfg.grid_n)
    p = cfg.scenario_params
    if cfg.scenario_name == "uniform":
        c = p.get("c", [0.0, 0.0])
        c = complex(c[0], c[1])
        parts = []
    elif cfg.scenario_name == "gaussian":
        c = 0j
        parts = [scen.radial_vortex(
            gamma=float(p.get("gamma", np.pi)), sigma=float(p.get("sigma", 0.5))
        )]
    else:
        c = 1.0 + 0.5j
        parts = [scen.radial_vortex(gamma=np.pi, sigma=0.5)]
    fields, pressures = [], []
    times = [cfg.T - cfg.dt, cfg.T, cfg.T + cfg.dt]
    for t in times:
        shifted = scen.composite(c, parts, [c * t] * len(parts))
        f = shifted.sample_velocity(g, n_tail=cfg.n_tail, div_tol=1e-3)
        fields.append(f)
        pressures.append(cauchy.pressure(f))
    return dyn.euler_residual(times, fields, pressures).ratio


def run(cfg: RunConfig, config_text: str | None = None) -> RunRecord:
    """Execute a validated config. Numeric failures still persist a partial
    record (with the failure cause in the diagnostics) and are reported via
    RunRecord.failure rather than an exception."""
    scenario = resolve_scenario(cfg)
    grid = Grid(cfg.grid_L, cfg.grid_n)
    out = Path(cfg.outdir)
    out.mkdir(parents=True, exist_ok=True)
    timing: dict[str, float] = {}
    echo = _config_echo(cfg)
    if config_text is not None:
        (out / "config.toml").write_text(config_text)

    t0 = time.perf_counter()
    if scenario.support_radius > 0.0:
        state = dyn.seed_particles(scenario, cfg.n_seed, box=cfg.box)
    else:
        # vorticity-free background: nothing to seed, the trace is exact
        state = dyn.VortexState(
            0.0, scenario.c, np.zeros(0, np.complex128), np.zeros(0, np.complex128),
            0.0, 1.0, {"scenario": scenario.name, "n_seed": 0, "box": 0.0, "dropped": 0},
        )
    timing["seed"] = time.perf_counter() - t0

    failure = None
    trace = None
    t0 = time.perf_counter()
    try:
        state_final, trace = dyn.advance(
            state, cfg.dt, cfg.n_steps,
            record_every=cfg.stride, k_max=cfg.k_max, record_slots=True,
        )
    except (RuntimeError, FloatingPointError) as e:
        failure = f"integration failed: {e}"
        state_final = None
    timing["integrate"] = time.perf_counter() - t0

    snapshot_paths: list[str] = []
    t0 = time.perf_counter()
    p_init = out / "vorticity_initial.aspd"
    write_field(scenario.sample_vorticity(grid), str(p_init))
    snapshot_paths.append(str(p_init))
    if cfg.final_snapshot and failure is None:
        p_fin = out / "vorticity_final.aspd"
        write_field(
            dyn.vorticity_snapshot(state_final, scenario, grid, n_steps=cfg.n_steps),
            str(p_fin),
        )
        snapshot_paths.append(str(p_fin))
    timing["snapshots"] = time.perf_counter() - t0

    checks: list[dict] = []
    cons: dict = {}
    a02_res = None
    euler_res = None
    t0 = time.perf_counter()
    if failure is None:
        cons = dyn.conservation_report(trace)
        if cfg.k_max >= 2:
            a02_res = dyn.a02_law_residual(trace)
        measured_by_name = {
            "a00_drift": cons["a00_drift"],
            "a01_drift": cons["a01_drift"],
            "weight_sum_drift": cons["weight_sum_drift"],
            "slot_max": cons["slot_max"],
            "a02_law": a02_res,
        }
        try:
            for name in sorted(cfg.tolerances):
                if name == "euler_residual":
                    euler_res = _euler_check_value(cfg)
                    measured = euler_res
                else:
                    measured = measured_by_name[name]
                bound = float(cfg.tolerances[name])
                checks.append({
                    "name": name,
                    "measured": float(measured),
                    "bound": bound,
                    "passed": bool(measured <= bound),
                })
        except (RuntimeError, FloatingPointError, ValueError) as e:
            failure = f"check evaluation failed: {e}"
    timing["checks"] = time.perf_counter() - t0

    trace_path = out / "trace.csv"
    if trace is not None:
        _write_trace_csv(trace_path, trace)
        _write_trace_svg(out / "trace.svg", trace)

    diagnostics = {
        "config": echo,
        "checks": checks,
        "conservation": cons,
        "a02_law_residual": a02_res,
        "euler_residual": euler_res,
        "failure": failure,
        "timing_file": "timing.json",
    }
    diag_path = out / "diagnostics.json"
    _json_dump(diag_path, diagnostics)
    _json_dump(out / "timing.json", timing)

    return RunRecord(
        config_echo=echo,
        trace_csv=str(trace_path),
        snapshot_paths=snapshot_paths,
        diagnostics_path=str(diag_path),
        checks=checks,
        failure=failure,
    )


# --------------------------------------------------------------------------
# Verification suites
# --------------------------------------------------------------------------


@dataclass
class CheckRow:
    name: str
    measured: float
    bound: str
    ok: bool


def _random_part(N: int, rng, scale: float = 1.0) -> asym.AsymptoticPart:
    tri = np.zeros((N + 1, N + 1), dtype=np.complex128)
    for k in range(N + 1):
        for l in range(N + 1 - k):
            tri[k, l] = scale * (rng.standard_normal() + 1j * rng.standard_normal())
    return asym.AsymptoticPart(N, tri, 1.0)


def _random_element(N: int, rng, scale: float = 1.0) -> asym.GroupElement:
    return asym.GroupElement(_random_part(N, rng, scale))


def _suite_algebra() -> list[CheckRow]:
    rng = np.random.default_rng(2024)
    rows = []

    worst = 0.0
    for _ in range(20):
        a, b, c = (_random_part(5, rng) for _ in range(3))
        lhs = asym.multiply(asym.multiply(a, b), c).coeffs
        rhs = asym.multiply(a, asym.multiply(b, c)).coeffs
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    rows.append(CheckRow("triangle product associativity (20 triples)", worst,
                         "<= 1e-12", worst <= 1e-12))

    worst = 0.0
    for _ in range(10):
        a = _random_part(5, rng)
        lhs = asym.differentiate_dzbar(asym.differentiate_dz(a)).coeffs
        rhs = asym.differentiate_dz(asym.differentiate_dzbar(a)).coeffs
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    rows.append(CheckRow("mixed derivatives commute (10 parts)", worst,
                         "<= 1e-15", worst <= 1e-15))

    worst = 0.0
    for _ in range(10):
        a, b = _random_part(4, rng), _random_part(4, rng)
        lhs = asym.differentiate_dz(asym.multiply(a, b))
        rhs = asym.add(
            asym.multiply(asym.differentiate_dz(a), b),
            asym.multiply(a, asym.differentiate_dz(b)),
        )
        worst = max(worst, float(np.max(np.abs(lhs.coeffs - rhs.coeffs))))
    rows.append(CheckRow("Leibniz rule for d/dz (10 pairs)", worst,
                         "<= 1e-12", worst <= 1e-12))

    # unit-circulation source: the (0,1) tail coefficient of the
    # antiderivative is its zeroth moment over pi, which must come out 1
    tail, _ = cauchy.dz_inverse(_unit_source(Grid(4.05, 64)), 1)
    mk = cauchy.moment(_unit_source(Grid(4.05, 64)), 0, 0)
    eq = abs(tail.coefficient(0, 1) - mk.value / np.pi)
    rows.append(CheckRow("tail coefficient is the moment quadrature", eq,
                         "== 0", eq == 0.0))
    dev = abs(cauchy.moment(_unit_source(Grid(4.05, 512)), 0, 0).value / np.pi - 1.0)
    rows.append(CheckRow("antiderivative tail of unit source", dev,
                         "<= 1e-6", dev <= 1e-6))

    errs = _refinement_errors((64, 128))
    slope = float(np.log2(errs[64] / errs[128]))
    rows.append(CheckRow("inverse-then-derivative refinement slope", slope,
                         ">= 2", slope >= 2.0))
    return rows


def _unit_source(g: Grid) -> ComplexField:
    """chi'(r)/(2r): radial, supported on 1 <= r <= 2, total mass pi."""
    r = g.radii()
    safe = np.where(r > 0, r, 1.0)
    return ComplexField(g, (cutoff_chi_prime(r) / (2.0 * safe)).astype(np.complex128))


def _refinement_errors(ns: Sequence[int]) -> dict[int, float]:
    """Interior max of |d/dz applied to the antiderivative minus the source|
    for a smooth rapidly decaying source, per resolution."""
    errs: dict[int, float] = {}
    for n in ns:
        gn = Grid(6.0, n)
        fn = ComplexField(gn, np.exp(-4.0 * gn.radii() ** 2).astype(np.complex128))
        tail_n, rem_n = cauchy.dz_inverse(fn, 3)
        u_rec = ComplexField(gn, rem_n.samples + asym.eval_tail(tail_n, gn.nodes()))
        back = wirtinger_dz(u_rec).samples
        zz = gn.nodes()
        inner = (np.abs(zz.real) <= 0.7 * gn.L) & (np.abs(zz.imag) <= 0.7 * gn.L)
        errs[n] = float(np.max(np.abs(back - fn.samples)[inner]))
    return errs


def _suite_cauchy() -> list[CheckRow]:
    rng = np.random.default_rng(515)
    rows = []

    n_pairs = 10_000
    z = np.exp(rng.uniform(np.log(2.0), np.log(30.0), n_pairs)) * np.exp(
        2j * np.pi * rng.random(n_pairs)
    )
    w = 0.5 * np.abs(z) * np.sqrt(rng.random(n_pairs)) * np.exp(
        2j * np.pi * rng.random(n_pairs)
    )
    for l in range(4):
        lhs, rhs = cauchy.kernel_split_check(z, w, l)
        c_l = float(np.max(lhs / rhs))
        rows.append(CheckRow(f"kernel split C({l}) over 1e4 pairs", c_l,
                             "finite", bool(np.isfinite(c_l))))

    zf = np.exp(rng.uniform(np.log(3.0), np.log(30.0), n_pairs)) * np.exp(
        2j * np.pi * rng.random(n_pairs)
    )
    wf = 0.1 * np.abs(zf) * np.exp(2j * np.pi * rng.random(n_pairs))
    errs = [cauchy.kernel_split_check(zf, wf, l)[0] for l in range(4)]
    for l in range(3):
        ratio = float(np.mean(errs[l + 1] / errs[l]))
        rows.append(CheckRow(f"consecutive error ratio l={l}->{l + 1} at |w|/|z|=0.1",
                             ratio, "0.1 +/- 0.02", 0.08 <= ratio <= 0.12))

    # just past the far-field threshold, where truncation error is largest
    # among the radii the accelerated path will ever serve
    st = dyn.seed_particles(scen.radial_vortex(gamma=np.pi, sigma=0.7), 48)
    r_far = 1.1 * dyn.FAR_FACTOR * st.extent()
    far_targets = r_far * np.exp(2j * np.pi * np.arange(200) / 200.0)
    fast = dyn.induced_velocity(st, far_targets, ideal=True, fast=True)
    direct = dyn.induced_velocity(st, far_targets, ideal=True, fast=False)
    dev = float(np.max(np.abs(fast - direct)) / np.max(np.abs(direct)))
    rows.append(CheckRow("far-field accelerated vs direct (200 targets)", dev,
                         "<= 1e-9", dev <= 1e-9))
    return rows


def _suite_dynamics() -> list[CheckRow]:
    rows = []
    preset = scen.vortex_in_uniform_flow()
    state = dyn.seed_particles(preset, 48)
    _, trace = dyn.advance(state, 0.01, 30, record_every=5, k_max=3, record_slots=True)
    rep = dyn.conservation_report(trace)
    rows.append(CheckRow("preset a00 drift (T=0.3)", rep["a00_drift"],
                         "<= 1e-12", rep["a00_drift"] <= 1e-12))
    rows.append(CheckRow("preset a01 drift (T=0.3)", rep["a01_drift"],
                         "<= 1e-12", rep["a01_drift"] <= 1e-12))
    rows.append(CheckRow("preset weight-sum drift", rep["weight_sum_drift"],
                         "<= 1e-12", rep["weight_sum_drift"] <= 1e-12))
    rows.append(CheckRow("preset structural slots", rep["slot_max"],
                         "<= 1e-10", rep["slot_max"] <= 1e-10))
    law = dyn.a02_law_residual(trace)
    rows.append(CheckRow("preset a02 evolution law", law, "<= 1e-6", law <= 1e-6))

    rate = dyn.initial_rate_check(scen.radial_vortex(gamma=np.pi, sigma=0.7), n_seed=48)
    rows.append(CheckRow("radial a03 rate vs symmetry zero", abs(rate.measured),
                         "<= 1e-8", abs(rate.measured) <= 1e-8))

    pos = np.array([0.4 + 0.1j, -0.3 + 0.5j, 0.1 - 0.6j])
    wts = 1j * np.array([0.8, 0.5, -0.4])
    st = dyn.VortexState(0.0, 0.2 - 0.1j, pos, wts, 0.05, 0.1, {})
    mid, _ = dyn.advance(st, 0.01, 30, k_max=0)
    back, _ = dyn.advance(mid, -0.01, 30, k_max=0)
    rev = float(np.max(np.abs(back.pos - st.pos)))
    rows.append(CheckRow("three-particle reversal (30 steps)", rev,
                         "<= 1e-12", rev <= 1e-12))
    return rows


def _fit_rows(N: int, n_pairs: int, rng) -> list[CheckRow]:
    worst = 0.0
    for _ in range(n_pairs):
        x, y = _random_element(N, rng), _random_element(N, rng)
        fit = asym.numeric_composition_fit(x, y)
        worst = max(worst, float(np.max(np.abs(
            fit.element.tail.coeffs - asym.star(x, y).tail.coeffs
        ))))
    return [CheckRow(f"expansion vs sampled composition ({n_pairs} pairs)", worst,
                     "<= 1e-8", worst <= 1e-8)]


def _group_rows(N: int, n_triples: int, rng) -> list[CheckRow]:
    rows = []
    a = _random_element(N, rng)
    e = asym.GroupElement.identity(a.N)
    dev = max(
        float(np.max(np.abs(asym.star(e, a).tail.coeffs - a.tail.coeffs))),
        float(np.max(np.abs(asym.star(a, e).tail.coeffs - a.tail.coeffs))),
    )
    rows.append(CheckRow("identity element is two-sided", dev, "== 0", dev == 0.0))

    # the order-0 slot of a pure translation pair must be the float sum,
    # bit for bit, with every other slot exactly zero
    ca, cb = 0.3 - 0.8j, -1.1 + 0.2j
    ta = asym.GroupElement(asym.AsymptoticPart.from_entries(N, {(0, 0): ca}))
    tb = asym.GroupElement(asym.AsymptoticPart.from_entries(N, {(0, 0): cb}))
    comp = asym.star(ta, tb).tail
    dev = abs(comp.coefficient(0, 0) - (ca + cb))
    rest = comp.coeffs.copy()
    rest[0, 0] = 0.0
    extra = float(np.max(np.abs(rest)))
    rows.append(CheckRow("translations compose by addition", dev + extra,
                         "== 0", dev == 0.0 and extra == 0.0))

    worst = 0.0
    for _ in range(n_triples):
        x, y, zx = (_random_element(N, rng) for _ in range(3))
        lhs = asym.star(asym.star(x, y), zx).tail.coeffs
        rhs = asym.star(x, asym.star(y, zx)).tail.coeffs
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    rows.append(CheckRow(f"associativity ({n_triples} random triples)", worst,
                         "<= 1e-12", worst <= 1e-12))

    worst = 0.0
    for _ in range(n_triples):
        x = _random_element(N, rng)
        xi = asym.star_inverse(x)
        worst = max(
            worst,
            float(np.max(np.abs(asym.star(x, xi).tail.coeffs))),
            float(np.max(np.abs(asym.star(xi, x).tail.coeffs))),
        )
    rows.append(CheckRow(f"two-sided inverses ({n_triples} elements)", worst,
                         "<= 1e-12", worst <= 1e-12))
    return rows


def _suite_group() -> list[CheckRow]:
    rows = _group_rows(4, 40, np.random.default_rng(99))
    rows += _fit_rows(3, 3, np.random.default_rng(100))
    return rows


_SUITES = {
    "algebra": _suite_algebra,
    "cauchy": _suite_cauchy,
    "dynamics": _suite_dynamics,
    "group": _suite_group,
}


def _print_rows(rows: Sequence[CheckRow]) -> bool:
    name_w = max(len(r.name) for r in rows) + 2
    print(f"{'check':<{name_w}}{'measured':>14}  {'bound':<14}{'pass'}")
    print("-" * (name_w + 36))
    for r in rows:
        print(f"{r.name:<{name_w}}{r.measured:>14.6e}  {r.bound:<14}"
              f"{'ok' if r.ok else 'FAIL'}")
    return all(r.ok for r in rows)


def verify(suite: str) -> int:
    if suite == "all":
        names = ("algebra", "cauchy", "dynamics", "group")
    elif suite in _SUITES:
        names = (suite,)
    else:
        raise ConfigError(
            f"unknown suite '{suite}' (choose from algebra, cauchy, dynamics, group, all)."
        )
    ok = True
    for nm in names:
        print(f"[{nm}]")
        ok = _print_rows(_SUITES[nm]()) and ok
        print()
    return 0 if ok else 2


# --------------------------------------------------------------------------
# Kernel benchmark
# --------------------------------------------------------------------------


def _bench_warmup() -> None:
    # pay one-time backend compilation before anything is timed
    rng = np.random.default_rng(7)
    st = dyn.VortexState(0.0, 0j, rng.standard_normal(8) + 0j,
                         rng.standard_normal(8) + 0j, 0.0, 1.0, {})
    tg = 40.0 * np.exp(2j * np.pi * np.arange(8) / 8)
    dyn.induced_velocity(st, tg, ideal=True, fast=False)
    dyn.induced_velocity(st, tg, ideal=True, fast=True)


def kernel_bench(sizes: Sequence[int]) -> int:
    """Direct versus far-field-accelerated summation at M = G = size."""
    print(f"{'M':>8} {'G':>8} {'direct_s':>10} {'fast_s':>10} "
          f"{'speedup':>9} {'deviation':>11}")
    if sizes:
        _bench_warmup()
    for s in sizes:
        if s < 1:
            raise ConfigError("kernel-bench sizes must be positive integers.")
        rng = np.random.default_rng(7_000 + s)
        pos = np.sqrt(rng.random(s)) * np.exp(2j * np.pi * rng.random(s))
        wts = rng.standard_normal(s) + 1j * rng.standard_normal(s)
        state = dyn.VortexState(0.0, 0j, pos, wts, 0.0, 1.0, {})
        targets = 40.0 * np.exp(2j * np.pi * np.arange(s) / s) if s > 1 else np.array([40.0 + 0j])

        t0 = time.perf_counter()
        direct = dyn.induced_velocity(state, targets, ideal=True, fast=False)
        t_direct = time.perf_counter() - t0
        t0 = time.perf_counter()
        fast = dyn.induced_velocity(state, targets, ideal=True, fast=True)
        t_fast = time.perf_counter() - t0

        dev = float(np.max(np.abs(fast - direct)) / max(float(np.max(np.abs(direct))), 1e-300))
        speedup = t_direct / max(t_fast, 1e-12)
        print(f"{s:>8} {s:>8} {t_direct:>10.4f} {t_fast:>10.4f} "
              f"{speedup:>9.1f} {dev:>11.3e}")
    return 0


# --------------------------------------------------------------------------
# star-check
# --------------------------------------------------------------------------


def star_check(N: int) -> int:
    if not (0 <= N <= 6):
        raise ConfigError("star-check order N must be between 0 and 6.")
    rows = _group_rows(N, 100, np.random.default_rng(42 + N))
    if N <= 3:
        rows += _fit_rows(N, 3, np.random.default_rng(52 + N))
    ok = _print_rows(rows)
    return 0 if ok else 2


# --------------------------------------------------------------------------
# Entry point
# --------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit(2); that code is
        raise ConfigError(message)  # reserved for check failures here


def _apply_threads(k: int | None) -> None:
    if k is None:
        return
    if k < 1:
        raise ConfigError("--threads must be >= 1.")
    try:
        import numba

        numba.set_num_threads(k)
    except Exception:
        pass  # serial fallback: the flag may never change results anyway


def main(argv: Sequence[str] | None = None) -> int:
    parser = _Parser(prog="eulerlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command")

    p_run = sub.add_parser("run", help="execute a TOML run config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="override output directory")
    p_run.add_argument("--seed", type=int, default=None, help="override rng seed")
    p_run.add_argument("--threads", type=int, default=None)

    p_ver = sub.add_parser("verify", help="run a verification suite")
    p_ver.add_argument("suite")
    p_ver.add_argument("--threads", type=int, default=None)

    p_kb = sub.add_parser("kernel-bench", help="time direct vs accelerated summation")
    p_kb.add_argument("sizes", nargs="*", type=int)
    p_kb.add_argument("--threads", type=int, default=None)

    p_sc = sub.add_parser("star-check", help="group axioms at order N")
    p_sc.add_argument("N", type=int)

    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise ConfigError("a subcommand is required (run, verify, kernel-bench, star-check).")
        _apply_threads(getattr(args, "threads", None))

        if args.command == "run":
            cfg = load_config(args.config)
            if args.out is not None:
                cfg.outdir = args.out
            if args.seed is not None:
                cfg.seed = args.seed
            validate_config(cfg)
            record = run(cfg, config_text=Path(args.config).read_text())
            for c in record.checks:
                state = "ok" if c["passed"] else "FAIL"
                print(f"{c['name']:<20} measured {c['measured']:.6e} "
                      f"bound {c['bound']:.6e}  {state}")
            if record.failure is not None:
                print(f"run failed: {record.failure}", file=sys.stderr)
                return 1
            print(f"artifacts in {cfg.outdir}")
            return 0 if record.passed else 2

        if args.command == "verify":
            return verify(args.suite)

        if args.command == "kernel-bench":
            return kernel_bench(args.sizes)

        if args.command == "star-check":
            return star_check(args.N)

        raise ConfigError(f"unknown command {args.command!r}.")
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
