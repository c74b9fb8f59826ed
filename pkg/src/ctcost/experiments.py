"""Parameter sweeps behind each figure, written as CSV plus a key=value summary.

Every experiment is a function ``params -> Result``. Sweep points are
computed on a bounded thread pool and always written in configuration order,
so identical configurations give byte-identical files.
"""
from __future__ import annotations

import json
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List

import numpy as np

from . import __version__
from .counterdiabatic import (
    adiabatic_trajectory,
    cost_transitionless,
    exigency,
    loglog_slope,
    transitionless_norms,
)
from .errors import InvalidInputError
from .models import (
    Ramp,
    exigency_ising,
    ho_exigency_analytic,
    ho_model,
    ising_momentum,
    lmg_exigency,
    lmg_ground_state,
    lmg_hp_exigency,
    lmg_model,
    lz_model,
    selected_cost_ising,
    transitionless_cost_ising,
)
from .operators import QuantumState, eigendecompose, thermal_state
from .propagation import IntegratorConfig, unitary
from .work import driving_benefit, inner_friction

INF = math.inf

# Defaults per experiment. Keys mirror the command-line flags (dashes -> underscores).
DEFAULTS: Dict[str, Dict[str, Any]] = {
    "lz-cost-scaling": {
        "steps": 2000, "duration": 1.0, "durations": [1, 2, 4, 8, 16],
        "norm_exponents": [1, 2, 3], "delta": 1.0, "g_start": -10.0, "g_end": 5.0,
    },
    "lz-exigency": {
        "steps": 1000, "duration": 1.0, "delta": 1.0, "g_start": -10.0, "g_end": 5.0,
        "norm_exponent": 1,
    },
    "ising-cost": {
        "steps": 400, "duration": 1.0, "J": 1.0, "g_start": 0.5, "g_end": 1.5,
        "sizes": [2, 8], "beta_list": [INF, 2.0, 1.0, 0.5, 0.0], "norm_exponent": 1,
    },
    "ising-ratio": {
        "steps": 400, "duration": 1.0, "J": 1.0, "g_start": 0.5, "g_end": 1.5,
        "sizes": [4, 6, 8], "beta_list": [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, INF],
        "norm_exponent": 1,
    },
    "ho-exigency": {
        "steps": 2000, "duration": 1.0, "mass": 1.0, "omega_start": 1.0, "omega_end": 2.0,
        "n_max": 60,
    },
    "lmg-exigency": {
        "steps": 400, "duration": 1.0, "delta": 1.0, "g_start": 0.75, "g_end": 1.25,
        "sizes": [100, 200, 300, 400], "gamma": 0.0,
    },
    "lz-benefit": {
        "steps": 2000, "durations": [2, 4, 6, 8, 10, 12, 14, 16, 20, 30, 40, 60, 80, 100, 120, 140, 160],
        "delta": 1.0, "g_start": -10.0, "g_end": 5.0, "beta": 1.0, "fit_min_duration": 20.0,
        "steps_per_energy_time": 20.0,
    },
}
COMMON = {"workers": 4}
EXPERIMENTS = tuple(DEFAULTS)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    params: Dict[str, Any]

    def __post_init__(self):
        if self.experiment not in DEFAULTS:
            raise InvalidInputError(
                f"unknown experiment {self.experiment!r}; choose one of {', '.join(EXPERIMENTS)}"
            )
        try:
            _validate(self.experiment, self.params)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InvalidInputError):
                raise
            raise InvalidInputError(f"malformed parameter value: {exc}") from exc


@dataclass
class Result:
    columns: List[str]
    rows: List[List[float]]
    summary: Dict[str, Any]
    extra: Dict[str, "Result"] = field(default_factory=dict)


def make_config(experiment, file_params=None, flag_params=None):
    """Merge defaults, config-file values and flags (flags win)."""
    if experiment not in DEFAULTS:
        raise InvalidInputError(
            f"unknown experiment {experiment!r}; choose one of {', '.join(EXPERIMENTS)}"
        )
    params = dict(COMMON)
    params.update(DEFAULTS[experiment])
    allowed = set(params) | {"norm_exponent", "out"}
    for source in (file_params or {}, flag_params or {}):
        for key, value in source.items():
            key = key.replace("-", "_")
            if value is None:
                continue
            if key not in allowed:
                raise InvalidInputError(f"unknown parameter {key!r} for {experiment}")
            params[key] = value
    if experiment == "lz-cost-scaling" and "norm_exponent" in params:
        params["norm_exponents"] = [params.pop("norm_exponent")]
    params.pop("out", None)
    return ExperimentConfig(experiment, params)


def _positive(params, *keys):
    for k in keys:
        v = params[k]
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0 or not math.isfinite(v):
            raise InvalidInputError(f"{k} must be a positive finite number, got {v!r}")


def _validate(experiment, p):
    if int(p["steps"]) != p["steps"] or p["steps"] < 100:
        raise InvalidInputError(f"steps must be an integer >= 100, got {p['steps']!r}")
    if int(p["workers"]) != p["workers"] or p["workers"] < 1:
        raise InvalidInputError(f"workers must be a positive integer, got {p['workers']!r}")
    for key in ("duration", "delta", "J", "mass", "fit_min_duration", "steps_per_energy_time"):
        if key in p:
            _positive(p, key)
    for key in ("durations",):
        if key in p:
            if not p[key] or any(not (isinstance(d, (int, float)) and d > 0) for d in p[key]):
                raise InvalidInputError(f"{key} must be a non-empty list of positive numbers")
    if "beta_list" in p:
        if not p["beta_list"] or any(not float(b) >= 0 for b in p["beta_list"]):
            raise InvalidInputError("beta list must be non-empty with every beta >= 0")
    if "beta" in p and not float(p["beta"]) >= 0:
        raise InvalidInputError("beta must be >= 0")
    for key in ("norm_exponent",):
        if key in p and (int(p[key]) != p[key] or p[key] < 1):
            raise InvalidInputError(f"norm exponent must be an integer >= 1, got {p[key]!r}")
    if "norm_exponents" in p and any(int(n) != n or n < 1 for n in p["norm_exponents"]):
        raise InvalidInputError("norm exponents must be integers >= 1")
    if "sizes" in p:
        sizes = p["sizes"]
        if not sizes or any(int(s) != s for s in sizes):
            raise InvalidInputError("sizes must be a non-empty list of integers")
        if experiment.startswith("ising") and any(s < 2 or s % 2 or s > 12 for s in sizes):
            raise InvalidInputError("Ising sizes must be even and between 2 and 12")
        if experiment == "lmg-exigency" and any(s < 2 for s in sizes):
            raise InvalidInputError("LMG sizes must be >= 2")
    if experiment == "ho-exigency":
        _positive(p, "omega_start", "omega_end")
        if p["n_max"] < 20:
            raise InvalidInputError("n_max must be >= 20")
    if experiment == "lmg-exigency":
        _positive(p, "g_start", "g_end")


def _pool_map(fn: Callable, items, workers):
    items = list(items)
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def _grid(p):
    return IntegratorConfig(int(p["steps"]))


# ---------------------------------------------------------------- experiments


def lz_cost_scaling(p):
    ns = [int(n) for n in p["norm_exponents"]]
    durations = [p["duration"] * d for d in p["durations"]]

    def point(T):
        s = lz_model(p["delta"], Ramp("cosine", p["g_start"], p["g_end"], 0.0, T))
        norms = transitionless_norms(s, s.grid(p["steps"]))
        return [T] + [cost_transitionless(s, n, grid=_grid(p), norms=norms).total for n in ns]

    rows = _pool_map(point, durations, p["workers"])
    arr = np.array(rows)
    summary = {}
    for i, n in enumerate(ns):
        summary[f"slope_n{n}"] = loglog_slope(arr[:, 0], arr[:, i + 1])
        summary[f"expected_slope_n{n}"] = -(n - 1)
    return Result(["duration"] + [f"C_t{n}" for n in ns], rows, summary)


def _lz_two_level_state(s, p_ground):
    dec = eigendecompose(s.H(s.t0))
    rho = p_ground * dec.projector(0) + (1 - p_ground) * dec.projector(1)
    return QuantumState.density(rho)


def lz_exigency(p):
    n = int(p["norm_exponent"])
    ramp = Ramp("cosine", p["g_start"], p["g_end"], 0.0, p["duration"])
    s = lz_model(p["delta"], ramp)
    grid = _grid(p)
    cols = {}

    def curve(key):
        if key == "ct":
            return cost_transitionless(s, n, grid=grid).values
        pg = {"pg1": 1.0, "pg075": 0.75}[key]
        tr = adiabatic_trajectory(s, _lz_two_level_state(s, pg), grid)
        return exigency(s, tr).values

    keys = ["ct", "pg1", "pg075"]
    for k, v in zip(keys, _pool_map(curve, keys, p["workers"])):
        cols[k] = v
    tau = np.linspace(0.0, 1.0, grid.steps + 1)
    rows = [list(r) for r in zip(tau, cols["ct"], cols["pg1"], cols["pg075"])]
    # g(t) = 0 where 1 - cos(pi tau) = 2 |g_start| / (g_end - g_start)
    x = 1 - 2 * (-p["g_start"]) / (p["g_end"] - p["g_start"])
    tau_c = math.acos(x) / math.pi if -1 <= x <= 1 else float("nan")
    summary = {
        "tau_crossing": tau_c,
        f"peak_tau_dCt{n}": float(tau[np.argmax(cols["ct"])]),
        "peak_tau_dC0_pg1": float(tau[np.argmax(cols["pg1"])]),
        "peak_tau_dC0_pg075": float(tau[np.argmax(cols["pg075"])]),
        "C0_pg1": float(np.trapezoid(cols["pg1"], tau * p["duration"])),
        "C0_pg075": float(np.trapezoid(cols["pg075"], tau * p["duration"])),
        f"C_t{n}": float(np.trapezoid(cols["ct"], tau * p["duration"])),
        "pg075_below_pg1": bool(np.all(cols["pg075"] <= cols["pg1"] + 1e-12)),
    }
    return Result(["tau", f"dCt{n}", "dC0_pg1", "dC0_pg075"], rows, summary)


def _beta_label(b):
    return "inf" if math.isinf(b) else f"{b:g}"


def _ising_model(p, L):
    return ising_momentum(int(L), p["J"], Ramp("cosine", p["g_start"], p["g_end"], 0.0, p["duration"]))


def ising_cost(p):
    n = int(p["norm_exponent"])
    grid = _grid(p)
    betas = [float(b) for b in p["beta_list"]]
    tasks = [(L, None) for L in p["sizes"]] + [(L, b) for L in p["sizes"] for b in betas]

    def point(task):
        L, b = task
        m = _ising_model(p, L)
        if b is None:
            return transitionless_cost_ising(m, n, grid=grid)
        return selected_cost_ising(m, b, n, grid=grid), exigency_ising(m, b, grid)

    results = dict(zip(tasks, _pool_map(point, tasks, p["workers"])))
    tau = np.linspace(0.0, 1.0, grid.steps + 1)
    columns, data, summary = ["tau"], [tau], {}
    for L in p["sizes"]:
        full = results[(L, None)]
        columns.append(f"dCt{n}_L{L}")
        data.append(full.values)
        summary[f"C_t{n}_L{L}"] = full.total
        for b in betas:
            sel, ex = results[(L, b)]
            lab = _beta_label(b)
            columns += [f"dCW{n}_L{L}_beta{lab}", f"dC0_L{L}_beta{lab}"]
            data += [sel.values, ex.values]
            summary[f"C_W{n}_L{L}_beta{lab}"] = sel.total
            summary[f"C0_L{L}_beta{lab}"] = ex.total
    rows = [list(r) for r in zip(*data)]
    return Result(columns, rows, summary)


def ising_ratio(p):
    n = int(p["norm_exponent"])
    grid = _grid(p)
    betas = [float(b) for b in p["beta_list"]]
    sizes = [int(L) for L in p["sizes"]]
    full = dict(zip(sizes, _pool_map(
        lambda L: transitionless_cost_ising(_ising_model(p, L), n, grid=grid).total,
        sizes, p["workers"])))
    tasks = [(L, b) for b in betas for L in sizes]

    def point(task):
        L, b = task
        m = _ising_model(p, L)
        return selected_cost_ising(m, b, n, grid=grid).total / full[L], exigency_ising(m, b, grid).total

    res = dict(zip(tasks, _pool_map(point, tasks, p["workers"])))
    rows = [[b] + [res[(L, b)][0] for L in sizes] for b in betas]
    ex_rows = [[b] + [res[(L, b)][1] for L in sizes] for b in betas]
    summary = {}
    for L in sizes:
        ratios = [res[(L, b)][0] for b in betas]
        for b, r in zip(betas, ratios):
            summary[f"ratio_beta{_beta_label(b)}_L{L}"] = r
        summary[f"C_t{n}_L{L}"] = full[L]
    extra = Result(["beta"] + [f"C0_L{L}" for L in sizes], ex_rows, {})
    return Result(["beta"] + [f"ratio_L{L}" for L in sizes], rows, summary, {"exigency": extra})


def ho_exigency(p):
    ramp = Ramp("cosine", p["omega_start"], p["omega_end"], 0.0, p["duration"])
    s = ho_model(p["mass"], ramp, int(p["n_max"]))
    ground = thermal_state(s.H(s.t0), INF)
    rep = exigency(s, adiabatic_trajectory(s, ground, _grid(p)))
    analytic = ho_exigency_analytic(ramp, rep.times)
    rows = [list(r) for r in zip(rep.tau, rep.values, analytic)]
    c_an = ho_exigency_analytic(ramp)
    summary = {
        "C0_numeric": rep.total,
        "C0_analytic": c_an,
        "relative_error": abs(rep.total - c_an) / c_an,
    }
    return Result(["tau", "dC0_numeric", "dC0_analytic"], rows, summary)


def lmg_exigency_sweep(p):
    ramp = Ramp("cosine", p["g_start"], p["g_end"], 0.0, p["duration"])
    times = np.linspace(0.0, p["duration"], int(p["steps"]) + 1)
    tau = times / p["duration"]
    sizes = [int(N) for N in p["sizes"]]

    def point(N):
        m = lmg_model(N, p["gamma"], p["delta"], ramp)
        return np.array([
            lmg_exigency(m, QuantumState.pure(lmg_ground_state(N, ramp.value(t), p["delta"], p["gamma"])[1]), t)
            for t in times
        ])

    curves = dict(zip(sizes, _pool_map(point, sizes, p["workers"])))
    g_tilde = ramp.value(times) / p["delta"]
    # the bosonic mapping is undefined on the critical point itself
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        hp = lmg_hp_exigency(g_tilde, ramp.rate(times), max(sizes))
    hp = np.where(np.abs(g_tilde - 1) < 1e-3, np.nan, hp)
    rows = [[tau[i]] + [curves[N][i] for N in sizes] + [hp[i]] for i in range(len(tau))]
    summary = {}
    for N in sizes:
        d2 = np.gradient(np.gradient(curves[N], times), times)
        j = int(np.argmin(d2[1:-1])) + 1
        summary[f"dip_tau_N{N}"] = float(tau[j])
        summary[f"dip_g_N{N}"] = float(g_tilde[j])
        summary[f"C0_N{N}"] = float(np.trapezoid(curves[N], times))
    return Result(["tau"] + [f"dC0_N{N}" for N in sizes] + ["dC0_hp"], rows, summary)


def lz_benefit(p):
    delta = p["delta"]
    e_max = math.hypot(max(abs(p["g_start"]), abs(p["g_end"])), delta)
    durations = [float(d) for d in p["durations"]]

    def point(T):
        s = lz_model(delta, Ramp("cosine", p["g_start"], p["g_end"], 0.0, T))
        # RK4 needs a fixed number of steps per unit of phase E * t
        steps = max(int(p["steps"]), int(math.ceil(p["steps_per_energy_time"] * e_max * T)))
        U = unitary(s, IntegratorConfig(steps))
        init = thermal_state(s.H(s.t0), float(p["beta"]))
        fric = inner_friction(s, init, U)
        norms = transitionless_norms(s, s.grid(p["steps"]))
        c1 = cost_transitionless(s, 1, grid=_grid(p), norms=norms)
        c2 = cost_transitionless(s, 2, grid=_grid(p), norms=norms).total
        return [T, fric, c1.total, c2, driving_benefit(fric, c1).value]

    rows = _pool_map(point, durations, p["workers"])
    arr = np.array(rows)
    T, fric, c1, c2, ben = arr.T
    summary = {"crossover_duration": _crossover(T, ben)}
    fit = (T >= p["fit_min_duration"]) & (fric > 1e-10)
    if fit.sum() >= 3:
        slope, icpt = np.polyfit(T[fit], np.log(fric[fit]), 1)
        resid = np.log(fric[fit]) - (slope * T[fit] + icpt)
        ss = np.sum((np.log(fric[fit]) - np.log(fric[fit]).mean()) ** 2)
        summary["friction_decay_rate"] = float(-slope)
        summary["friction_fit_r2"] = float(1 - np.sum(resid**2) / ss)
        summary["friction_fit_points"] = int(fit.sum())
    summary["C_t1_relative_spread"] = float((c1.max() - c1.min()) / c1.mean())
    summary["C_t2_slope"] = loglog_slope(T, c2)
    summary["benefit_negative_beyond_crossover"] = bool(
        np.all(ben[T > summary["crossover_duration"]] < 0)
    ) if math.isfinite(summary["crossover_duration"]) else False
    return Result(["duration", "friction", "C_t1", "C_t2", "benefit"], rows, summary)


def _crossover(T, benefit):
    """Duration of the last sign change from positive to negative benefit.

    Linear interpolation between the bracketing grid points; ``nan`` if the
    benefit never turns negative after being positive.
    """
    out = float("nan")
    for i in range(len(T) - 1):
        if benefit[i] > 0 >= benefit[i + 1]:
            a, b = benefit[i], benefit[i + 1]
            out = float(T[i] + (T[i + 1] - T[i]) * a / (a - b))
    return out


RUNNERS: Dict[str, Callable[[Dict[str, Any]], Result]] = {
    "lz-cost-scaling": lz_cost_scaling,
    "lz-exigency": lz_exigency,
    "ising-cost": ising_cost,
    "ising-ratio": ising_ratio,
    "ho-exigency": ho_exigency,
    "lmg-exigency": lmg_exigency_sweep,
    "lz-benefit": lz_benefit,
}


# ---------------------------------------------------------------- output


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.15g" % float(x)


def _header(config, columns):
    params = {k: v for k, v in sorted(config.params.items()) if k != "workers"}
    return [
        f"# ctcost {__version__}",
        f"# experiment: {config.experiment}",
        "# config: " + json.dumps(params, sort_keys=True, default=str),
        f"# grid: steps={config.params['steps']}",
        ",".join(columns),
    ]


def write_csv(path, config, result):
    lines = _header(config, result.columns)
    lines += [",".join(_fmt(v) for v in row) for row in result.rows]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_summary(path, config, summary):
    lines = [f"experiment={config.experiment}", f"version={__version__}"]
    lines += [f"{k}={_fmt(v)}" for k, v in summary.items()]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_summary(path):
    """Parse a summary file into a dict of strings."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if "=" in line:
                k, v = line.rstrip("\n").split("=", 1)
                out[k] = v
    return out


def run(config: ExperimentConfig, out_dir="."):
    """Run one experiment and write ``<experiment>.csv`` and ``<experiment>_summary.txt``.

    Returns the list of written paths.
    """
    result = RUNNERS[config.experiment](config.params)
    os.makedirs(out_dir, exist_ok=True)
    paths = [os.path.join(out_dir, f"{config.experiment}.csv")]
    write_csv(paths[0], config, result)
    for name, sub in result.extra.items():
        paths.append(os.path.join(out_dir, f"{config.experiment}_{name}.csv"))
        write_csv(paths[-1], config, sub)
    paths.append(os.path.join(out_dir, f"{config.experiment}_summary.txt"))
    write_summary(paths[-1], config, result.summary)
    return paths
