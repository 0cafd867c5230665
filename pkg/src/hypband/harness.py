"""Experiment orchestration: configs, runners, CSV/JSON persistence.

Configs are flat key = value text with optional [section] prefixes (keys
become section.key).  Grids accept "a,b,c" lists, "lo:hi:logN" geometric
grids and "lo:hi:linN" linear grids.  Every experiment emits one CSV per
documented schema plus a summary.json embedding the parsed config, the
exponent fits with their targets, and recomputable pass flags.
"""

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, cusp, dispersive, extremizers, projector, quotient, special
from .errors import ConfigError
from .geometry import HalfPlanePoint, cyclic_group, poincare_partial_sum, \
    cyclic_poincare_closed_form

EXPERIMENTS = ("kernel-scan", "spherical-scan", "knapp-scan", "cylinder-check",
               "dispersive-scan", "z-scan", "cusp-run", "strip-check")


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

def _parse_number(text, where):
    try:
        if text.lower() in ("inf", "infinity"):
            return math.inf
        return int(text) if text.lstrip("+-").isdigit() else float(text)
    except ValueError:
        raise ConfigError(f"malformed number {text!r} at {where}") from None


def parse_grid(text, where="value"):
    """Grid syntax: scalar, comma list, lo:hi:logN, lo:hi:linN."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3 or not (parts[2].startswith("log") or parts[2].startswith("lin")):
            raise ConfigError(f"bad grid spec {text!r} at {where} (want lo:hi:logN)")
        lo = float(_parse_number(parts[0], where))
        hi = float(_parse_number(parts[1], where))
        n = int(parts[2][3:])
        if n < 1 or lo <= 0 and parts[2].startswith("log"):
            raise ConfigError(f"bad grid spec {text!r} at {where}")
        if parts[2].startswith("log"):
            return [float(x) for x in np.geomspace(lo, hi, n)]
        return [float(x) for x in np.linspace(lo, hi, n)]
    if "," in text:
        return [float(_parse_number(p.strip(), where)) for p in text.split(",") if p.strip()]
    return [float(_parse_number(text, where))]


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict
    out_dir: str = "out"
    seed: int = 0
    threads: int = 1
    overwrite: bool = False

    def echo(self):
        return {"experiment": self.experiment, "out": self.out_dir, "seed": self.seed,
                "threads": self.threads, "overwrite": self.overwrite,
                **{k: v for k, v in sorted(self.params.items())}}


# per-experiment parameter schema: key -> (kind, default); kinds:
# grid (list of floats), num, int, str, bool
_SCHEMAS = {
    "spherical-scan": {"lambdas": ("grid", [50.0, 100.0, 200.0, 400.0]),
                       "etas": ("grid", [0.1]), "p": ("num", 8.0)},
    "knapp-scan": {"lambdas": ("grid", [64.0, 128.0, 256.0]),
                   "etas": ("grid", []), "p": ("num", 4.0),
                   "eta_rule": ("str", "0.1/log")},
    "kernel-scan": {"lambdas": ("grid", [8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0]),
                    "etas": ("grid", [0.1, 1.0]), "include_inv_lambda": ("bool", True),
                    "epsilon": ("num", 0.5)},
    "cylinder-check": {"ells": ("grid", [0.5, 1.0, 2.0]), "n_samples": ("int", 10)},
    "dispersive-scan": {"lambdas": ("grid", [16.0, 64.0]),
                        "t_grid": ("grid", [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0])},
    "z-scan": {"lambda": ("num", 100.0), "etas": ("grid", [0.02, 0.04, 0.08, 0.16]),
               "orders": ("grid", [1.0, 2.0, math.inf])},
    "cusp-run": {"p": ("num", 4.0), "alpha": ("num", 0.75), "eta": ("num", 0.1),
                 "u_grid": ("grid", [30.0, 40.0, 50.0, 60.0])},
    "strip-check": {"epsilons": ("grid", [0.05, 0.1, 0.25]),
                    "r_lo": ("num", 1.0), "r_hi": ("num", 30.0), "n_r": ("int", 30)},
}
_COMMON = {"experiment", "out", "seed", "threads", "overwrite"}


def parse_config(text) -> ExperimentConfig:
    """Parse the flat key/value document; unknown or duplicate keys error."""
    raw = {}
    section = ""
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected key = value, got {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        full = f"{section}.{key}" if section else key
        if full in raw:
            raise ConfigError(f"duplicate key {full!r} (line {ln})")
        raw[full] = (val, ln)
    if "experiment" not in raw:
        raise ConfigError("missing required key 'experiment'")
    experiment = raw.pop("experiment")[0]
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}; choose from {EXPERIMENTS}")
    schema = _SCHEMAS[experiment]
    params = {k: d for k, (_, d) in schema.items()}
    out_dir, seed, threads, overwrite = "out", 0, 1, False
    for full, (val, ln) in raw.items():
        key = full.split(".")[-1] if full.startswith("output.") else full
        where = f"line {ln}"
        if key == "out" or full == "output.dir":
            out_dir = val
        elif key == "seed":
            seed = int(_parse_number(val, where))
        elif key == "threads":
            threads = int(_parse_number(val, where))
        elif key == "overwrite":
            overwrite = val.lower() in ("1", "true", "yes")
        elif key in schema:
            kind = schema[key][0]
            if kind == "grid":
                params[key] = parse_grid(val, where)
            elif kind == "num":
                params[key] = float(_parse_number(val, where))
            elif kind == "int":
                params[key] = int(_parse_number(val, where))
            elif kind == "bool":
                params[key] = val.lower() in ("1", "true", "yes")
            else:
                params[key] = val
        else:
            raise ConfigError(f"unknown key {full!r} for experiment {experiment}")
    for k, v in params.items():
        if isinstance(v, list) and not v and k != "etas":
            raise ConfigError(f"empty grid for key {k!r}")
    return ExperimentConfig(experiment, params, out_dir, seed, threads, overwrite)


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------

@dataclass
class FitRecord:
    name: str
    slope: float
    intercept: float
    r_squared: float
    target: float
    tolerance: float

    @property
    def passed(self):
        return abs(self.slope - self.target) <= self.tolerance

    def as_dict(self):
        return {"name": self.name, "slope": self.slope, "intercept": self.intercept,
                "r_squared": self.r_squared, "target": self.target,
                "tolerance": self.tolerance, "passed": self.passed}


@dataclass
class RunSummary:
    experiment: str
    config_echo: dict
    cells: list = field(default_factory=list)
    fits: list = field(default_factory=list)
    flags: dict = field(default_factory=dict)
    csv_files: dict = field(default_factory=dict)  # name -> (header, rows)
    wall_time_s: float = 0.0

    @property
    def all_passed(self):
        return all(f.passed for f in self.fits) and all(self.flags.values())

    def as_dict(self):
        return {"experiment": self.experiment, "cells": self.cells,
                "fits": [f.as_dict() for f in self.fits], "flags": self.flags,
                "versions": {"hypband": __version__, "numpy": np.__version__},
                "config_echo": self.config_echo, "wall_time_s": self.wall_time_s}


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_outputs(summary: RunSummary, out_dir, overwrite=False):
    """Write each CSV plus summary.json; refuse to clobber unless overwrite."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, (header, rows) in summary.csv_files.items():
        path = out / f"{name}.csv"
        if path.exists() and not overwrite:
            raise FileExistsError(f"{path} exists (pass overwrite)")
        with open(path, "w") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        paths.append(path)
    jpath = out / "summary.json"
    if jpath.exists() and not overwrite:
        raise FileExistsError(f"{jpath} exists (pass overwrite)")
    with open(jpath, "w") as fh:
        json.dump(summary.as_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths + [jpath]


# ---------------------------------------------------------------------------
# experiment runners
# ---------------------------------------------------------------------------

def _map_cells(fn, cells, threads):
    if threads <= 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, cells))


def _run_spherical(cfg: ExperimentConfig, summary: RunSummary):
    p = cfg.params["p"]
    lams, etas = cfg.params["lambdas"], cfg.params["etas"]
    cells = [(lam, eta) for lam in lams for eta in etas]
    res = _map_cells(lambda c: extremizers.spherical_example(c[0], c[1], p), cells,
                     cfg.threads)
    rows = []
    for (lam, eta), r in zip(cells, res):
        rows.append((lam, eta, p, r["l2"], r["lp"].value, r["ratio"],
                     extremizers.gamma_exponent(p).gamma_p))
        summary.cells.append({"lambda": lam, "eta": eta, "ratio": r["ratio"]})
    summary.csv_files["spherical_scan"] = (
        ["lambda", "eta", "p", "l2", "lp", "ratio", "slope_target"], rows)
    if len(lams) > 1 and len(etas) == 1:
        fit = extremizers.fit_exponent([(c[0], r["ratio"]) for c, r in zip(cells, res)])
        summary.fits.append(FitRecord("lambda_scaling", fit.slope, fit.intercept,
                                      fit.r_squared, 0.5 - 2.0 / p, 0.05))
    if len(etas) > 1 and len(lams) == 1:
        fit = extremizers.fit_exponent([(c[1], r["ratio"]) for c, r in zip(cells, res)])
        summary.fits.append(FitRecord("eta_scaling", fit.slope, fit.intercept,
                                      fit.r_squared, 0.5, 0.05))


def _run_knapp(cfg: ExperimentConfig, summary: RunSummary):
    p = cfg.params["p"]
    lams = cfg.params["lambdas"]
    etas = cfg.params["etas"]
    rows = []
    if etas:
        lam = lams[0]
        pairs = extremizers.knapp_eta_scan(lam, etas, p)
        for eta, ratio in pairs:
            res = extremizers.knapp_norms(extremizers.KnappRegionSpec(lam, eta), p)
            rows.append((lam, eta, p, res["l2_exact"], res["lp_region"], ratio, 0.5))
            summary.cells.append({"lambda": lam, "eta": eta, "ratio": ratio})
        fit = extremizers.fit_exponent(pairs)
        summary.fits.append(FitRecord("eta_scaling", fit.slope, fit.intercept,
                                      fit.r_squared, 0.5, 0.05))
    else:
        pairs = []
        for lam in lams:
            eta = 0.1 / math.log(lam)
            res = extremizers.knapp_norms(extremizers.KnappRegionSpec(lam, eta), p)
            pairs.append((lam, res["ratio"]))
            rows.append((lam, eta, p, res["l2_exact"], res["lp_region"], res["ratio"],
                         0.25 - 0.5 / p))
            summary.cells.append({"lambda": lam, "eta": eta, "ratio": res["ratio"]})
        fit = extremizers.fit_exponent(pairs)
        summary.fits.append(FitRecord("lambda_scaling", fit.slope, fit.intercept,
                                      fit.r_squared, 0.25 - 0.5 / p, 0.06))
    summary.csv_files["knapp_scan"] = (
        ["lambda", "eta", "p", "l2", "lp", "ratio", "slope_target"], rows)


def _run_kernel(cfg: ExperimentConfig, summary: RunSummary):
    bump = projector.build_bump("plateau")
    eta_kinds = (["inv_lam"] if cfg.params["include_inv_lambda"] else []) + \
        list(cfg.params["etas"])
    rep = projector.verify_busard_bounds(lambdas=cfg.params["lambdas"],
                                         eta_kinds=tuple(eta_kinds), bump=bump,
                                         epsilon=cfg.params["epsilon"])
    sig = projector.verify_sigma_bounds(bump=bump)
    low_rows = []
    for lam, eta in [(0.0, 0.5), (0.5, 0.1), (1.0, 0.9), (0.2, 0.3)]:
        sup, arg = projector.low_frequency_check(lam, eta, bump=bump)
        low_rows.append(projector.BoundRow(lam, eta, "p_low_freq", sup, arg))
    rows = [(r.lam, r.eta, r.regime, r.normalized_sup, r.r_argmax)
            for r in rep.rows + sig.rows + low_rows]
    summary.csv_files["kernel_scan"] = (
        ["lambda", "eta", "regime", "normalized_sup", "r_argmax"], rows)
    for regime in ("p_small_r", "p_large_r", "q_decay"):
        summary.flags[f"octave_stability_{regime}"] = rep.octave_stability(regime) <= 5.0
    lows = [r.normalized_sup for r in low_rows]
    summary.flags["low_freq_stability"] = max(lows) / min(lows) <= 5.0
    sig_sups = [r.normalized_sup for r in sig.rows]
    summary.flags["sigma_band"] = max(sig_sups) / min(sig_sups) <= 10.0
    summary.cells.extend({"lambda": r.lam, "eta": r.eta, "regime": r.regime,
                          "normalized_sup": r.normalized_sup} for r in rep.rows)


def _run_cylinder(cfg: ExperimentConfig, summary: RunSummary):
    rng = np.random.default_rng(cfg.seed)
    rows = []
    worst = 0.0
    for ell in cfg.params["ells"]:
        K = quotient.suggest_truncation(ell)
        for _ in range(int(cfg.params["n_samples"] / len(cfg.params["ells"])) + 1):
            lam = float(rng.uniform(0.3, 8.0))
            z = complex(rng.uniform(-1, 1), rng.uniform(0.5, 2.0))
            z0 = complex(rng.uniform(-1, 1), rng.uniform(0.5, 2.0))
            res = quotient.spectral_measure_identity_check(ell, lam, z, z0, K=K)
            rows.append((ell, lam, res, K, 0))
            worst = max(worst, res)
            summary.cells.append({"ell": ell, "lambda": lam, "residual": res})
    summary.csv_files["cylinder_check"] = (
        ["ell", "lambda", "residual", "K", "quad_nodes"], rows)
    summary.flags["identity_residual"] = worst <= 1e-4
    qp = max(quotient.quasi_periodicity_defect(ell, 3.0, 1.5, 0.2 + 1.1j)
             for ell in cfg.params["ells"])
    summary.flags["quasi_periodicity"] = qp <= 1e-8


def _run_dispersive(cfg: ExperimentConfig, summary: RunSummary):
    rows = []
    for lam in cfg.params["lambdas"]:
        rep = dispersive.verify_dispersive_decay(lam, t_grid=tuple(cfg.params["t_grid"]))
        for t, sup, arg in zip(rep.t_grid, rep.sup_abs, rep.r_argmax):
            rows.append((lam, t, sup, arg, "large_t"))
        for t, band in rep.small_t_band:
            rows.append((lam, t, band, 0.0, "small_t_band"))
        summary.fits.append(FitRecord(f"decay_lambda_{lam:g}", rep.fit.slope,
                                      rep.fit.intercept, rep.fit.r_squared, -1.5, 0.15))
        summary.cells.append({"lambda": lam, "slope": rep.fit.slope,
                              "small_t_band_max": max(b for _, b in rep.small_t_band)})
    summary.csv_files["dispersive_scan"] = (
        ["lambda", "t", "sup_abs_K", "r_argmax", "branch"], rows)


def _run_z(cfg: ExperimentConfig, summary: RunSummary):
    lam = cfg.params["lambda"]
    etas = cfg.params["etas"]
    orders = [math.inf if (isinstance(o, float) and math.isinf(o)) else float(o)
              for o in cfg.params["orders"]]
    rows = []
    fits = dispersive.z_eta_scan(lam, etas, orders=tuple(orders))
    for order in orders:
        for eta in etas:
            prof = dispersive.z_weight(lam, eta)
            rows.append((lam, eta, "inf" if math.isinf(order) else order,
                         dispersive.z_norm(prof, order)))
    for order, fit in fits.items():
        rprime = 1.0 if math.isinf(order) else 1.0 - 1.0 / order
        name = "inf" if math.isinf(order) else f"{order:g}"
        summary.fits.append(FitRecord(f"z_norm_r_{name}", fit.slope, fit.intercept,
                                      fit.r_squared, rprime, 0.05))
    summary.csv_files["z_scan"] = (["lambda", "eta", "order", "z_norm"], rows)


def _run_cusp(cfg: ExperimentConfig, summary: RunSummary):
    prof = cusp.CuspProfile(100.0, cfg.params["eta"], cfg.params["alpha"])
    p = cfg.params["p"]
    rows = cusp.divergence_rows(prof, p, tuple(cfg.params["u_grid"]))
    out_rows = [(r[0], r[1], r[2], r[3], r[4], r[5] if r[5] is not None else "")
                for r in rows]
    summary.csv_files["cusp_divergence"] = (
        ["p", "alpha", "eta", "U", "lp_truncated", "slope_estimate"], out_rows)
    slope = cusp.divergence_slope(prof, p, tuple(cfg.params["u_grid"]))
    summary.fits.append(FitRecord("divergence_slope", slope, 0.0, 1.0,
                                  0.5 - 1.0 / p, 0.02))
    l2q, l2c = cusp.cusp_l2(prof), cusp.cusp_l2_closed(prof)
    summary.flags["l2_closed_form"] = abs(l2q - l2c) / l2c <= 1e-8
    summary.cells.append({"l2": l2q, "l2_closed": l2c})


def _run_strip(cfg: ExperimentConfig, summary: RunSummary):
    r_grid = np.linspace(cfg.params["r_lo"], cfg.params["r_hi"], cfg.params["n_r"])
    rows = []
    tops = {}
    for eps in cfg.params["epsilons"]:
        rep = special.strip_decay_check(eps, r_grid)
        for r, ratio in zip(rep.r_grid, rep.ratios):
            rows.append((eps, r, ratio))
        summary.flags[f"band_eps_{eps:g}"] = rep.band_ratio <= 100.0
        summary.flags[f"lower_bound_eps_{eps:g}"] = rep.band[0] >= 1.0 - 1e-12
        tops[eps] = rep.band[1]
        summary.cells.append({"epsilon": eps, "band_lo": rep.band[0],
                              "band_hi": rep.band[1]})
    eps_sorted = sorted(tops)
    if len(eps_sorted) >= 2:
        growth_ok = all(tops[a] <= (b / a) * tops[b] * 1.5
                        for a, b in zip(eps_sorted[:-1], eps_sorted[1:]))
        summary.flags["band_growth_1_over_eps"] = growth_ok
    summary.csv_files["strip_check"] = (["epsilon", "r", "ratio"], rows)


_RUNNERS = {
    "spherical-scan": _run_spherical,
    "knapp-scan": _run_knapp,
    "kernel-scan": _run_kernel,
    "cylinder-check": _run_cylinder,
    "dispersive-scan": _run_dispersive,
    "z-scan": _run_z,
    "cusp-run": _run_cusp,
    "strip-check": _run_strip,
}


def run_experiment(cfg: ExperimentConfig) -> RunSummary:
    """Dispatch to the experiment runner; cell failures flag, not abort."""
    summary = RunSummary(cfg.experiment, cfg.echo())
    t0 = time.time()
    try:
        _RUNNERS[cfg.experiment](cfg, summary)
    except Exception as exc:  # noqa: BLE001 - cell failures become flags
        summary.flags["execution_error"] = False
        summary.cells.append({"error": f"{type(exc).__name__}: {exc}"})
    summary.wall_time_s = time.time() - t0
    return summary


def refit_csv(path, scale_col, value_col):
    """Re-run the log-log fit from a persisted CSV."""
    import csv as _csv
    with open(path) as fh:
        reader = _csv.DictReader(fh)
        pairs = [(float(row[scale_col]), float(row[value_col])) for row in reader]
    fit = extremizers.fit_exponent(pairs)
    return fit
