"""Command-line front end: parameter sweeps and single-point diagnostics as data files.

Every subcommand reads an optional flat ``key = value`` config file, applies
command-line overrides, evaluates its sweep points (optionally in a process
pool, results collected in sweep order) and writes CSV/JSON data plus a
``*.meta.json`` sidecar carrying run metadata.

Exit codes: 0 success, 2 configuration error, 3 solver failure,
4 truncation failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from . import analytic as an
from . import fockspace as fs
from . import liouville as lv
from . import model as md
from . import ratemodel as rm
from . import tomography as tm
from .errors import (CatDimerError, ConfigError, DegenerateInput, DivergentSeries,
                     ManifoldLeakage, NonUniqueSteadyState, SolverFailure, TruncationError)
from .model import ABParams, MismatchParams

log = logging.getLogger("catdimer")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_TRUNCATION = 0, 2, 3, 4

SWEEP_AXES = ("delta", "lambda", "u", "gamma", "kappa", "d_delta", "d_lambda", "d_u")
MISMATCH_KINDS = ("d_delta", "d_lambda", "d_u")
EXTRA_KEYS = ("sweep", "sweep_min", "sweep_max", "sweep_count", "sweep_scale", "kinds",
              "mode", "grid_points", "grid_max", "t_max", "t_count", "truncation_tol",
              "method", "workers", "seed")
DEFAULT_DIMS = {"cd": (8, 20), "ab": (12, 12)}

STEADY_COLUMNS = ["delta_over_u", "F_cat", "F_squeezed", "n_d_mean", "parity"]
LOSS_COLUMNS = ["kappa_over_u", "F_vs_exact", "F_vs_ideal_cat", "purity"]
MISMATCH_COLUMNS = ["mismatch_kind", "mismatch_value", "F_vs_exact"]
EVOLVE_COLUMNS = ["t", "F_vs_exact", "purity", "n_c", "n_d", "joint_parity", "trace"]

SUBCOMMAND_AXIS = {
    "steady-sweep": ("delta", 1e-2, 1e2, 41, "log"),
    "loss-sweep": ("kappa", 1e-5, 1e-2, 13, "log"),
    "mismatch-sweep": ("d_lambda", -0.05, 0.05, 11, "linear"),
}


# ------------------------------------------------------------ configuration

@dataclass(frozen=True)
class SweepAxis:
    name: str
    start: float
    stop: float
    count: int
    scale: str = "linear"

    def __post_init__(self):
        if self.name not in SWEEP_AXES:
            raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}, got {self.name!r}")
        if self.count < 2:
            raise ConfigError(f"sweep_count must be >= 2, got {self.count}")
        if self.scale not in ("linear", "log"):
            raise ConfigError(f"sweep_scale must be linear or log, got {self.scale!r}")
        if self.scale == "log" and (self.start <= 0 or self.stop <= 0):
            raise ConfigError("log sweeps need positive bounds")

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass
class SweepConfig:
    model: md.ModelConfig
    axis: SweepAxis | None
    nmax: tuple[int, int]
    out: Path
    workers: int
    numeric: bool = False
    seed: int = 1234
    explicit: frozenset = frozenset()
    raw: dict = field(default_factory=dict)
    with_wigner: bool = False

    @property
    def params(self) -> ABParams:
        return self.model.params


def _num(raw: dict, key: str, default, cast=float):
    if key not in raw:
        return default
    try:
        return cast(raw[key])
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: cannot parse {raw[key]!r}") from None


def build_config(args, command: str) -> SweepConfig:
    raw: dict[str, str] = {}
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        raw.update(md.parse_config(text))
    for key in md.CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = str(value)
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = (s.strip() for s in item.split("=", 1))
        raw[k.lower()] = v
    for key, attr in (("sweep_min", "sweep_min"), ("sweep_max", "sweep_max"),
                      ("sweep_count", "sweep_count"), ("sweep_scale", "sweep_scale"),
                      ("workers", "workers"), ("seed", "seed")):
        value = getattr(args, attr, None)
        if value is not None:
            raw[key] = str(value)
    if args.nmax_a is not None:
        raw["nmax_a"] = str(args.nmax_a)
    if args.nmax_b is not None:
        raw["nmax_b"] = str(args.nmax_b)

    unknown = set(raw) - set(md.CONFIG_KEYS) - set(EXTRA_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    explicit = frozenset(raw)
    if "nmax_a" in raw and "nmax_b" not in raw:
        raw["nmax_b"] = str(_default_dims(command, raw)[1])
    if "nmax_b" in raw and "nmax_a" not in raw:
        raw["nmax_a"] = str(_default_dims(command, raw)[0])
    mcfg = md.model_from_mapping(raw)
    nmax = mcfg.nmax or _default_dims(command, raw)

    axis = None
    if command in SUBCOMMAND_AXIS or "sweep" in raw:
        name, lo, hi, count, scale = SUBCOMMAND_AXIS.get(command, ("gamma", 0.1, 10.0, 41, "log"))
        name = raw.get("sweep", name)
        if command == "steady-sweep" and name != "delta":
            raise ConfigError("steady-sweep sweeps delta only")
        if command == "loss-sweep" and name != "kappa":
            raise ConfigError("loss-sweep sweeps kappa only")
        if command == "mismatch-sweep" and name not in MISMATCH_KINDS:
            raise ConfigError(f"mismatch-sweep sweeps one of {MISMATCH_KINDS}")
        axis = SweepAxis(name, _num(raw, "sweep_min", lo), _num(raw, "sweep_max", hi),
                         _num(raw, "sweep_count", count, int), raw.get("sweep_scale", scale))

    workers = _num(raw, "workers", os.cpu_count() or 1, int)
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    out = Path(args.out) if args.out else Path(f"{command.replace('-', '_')}")
    return SweepConfig(mcfg, axis, nmax, out, workers, bool(args.numeric),
                       _num(raw, "seed", 1234, int), explicit, raw,
                       bool(getattr(args, "wigner", False)))


def _default_dims(command: str, raw: dict) -> tuple[int, int]:
    basis = "ab" if command == "wigner" and raw.get("mode", "d") in ("a", "b") else "cd"
    return DEFAULT_DIMS[basis]


def _with_default_gamma(cfg: SweepConfig) -> ABParams:
    """gamma = sqrt2 Delta unless the user set gamma explicitly."""
    p = cfg.params
    if "gamma" in cfg.explicit:
        return p
    return p.replace(gamma=math.sqrt(2) * p.Delta)


# ---------------------------------------------------------------- numerics

def numeric_steady_state(p: ABParams, m: MismatchParams, dims, basis: str = "cd",
                         seed: int = 1234, check_unique: bool = True) -> np.ndarray:
    H = md.hamiltonian_mismatch(p, m, dims, basis)
    L = lv.build_liouvillian(H, md.collapse_ops(p, basis, dims), dims)
    return lv.steady_state_numeric(L, check_unique=check_unique, seed=seed)


def exact_state(p: ABParams, dims, basis: str = "cd") -> np.ndarray:
    if basis == "cd":
        return an.steady_state_cd(p.to_cd(), dims, check=False)
    return an.steady_state_ab(p, dims, check=False)


def ideal_cat_state(p: ABParams, dims, basis: str = "cd") -> np.ndarray:
    """Entangled-cat target written in ``basis``, restricted to ``dims``.

    In the delocalized basis the target is built on a larger square space,
    rotated, and cut down to ``dims``; the cut is exact for fidelities with
    states supported inside ``dims``.
    """
    alpha = an.cat_amplitude(p)
    dims = fs.two_mode(dims)
    if basis == "ab":
        return an.ideal_entangled_cat(alpha, dims, check=False)
    n = max(max(dims.modes), fs.default_nmax(alpha) + 8)
    big = an.ideal_entangled_cat(alpha, (n, n))
    cd = fs.beamsplitter_map(big, (n, n), "ab->cd", check=False).reshape(n, n)
    return cd[:dims.modes[0], :dims.modes[1]].ravel()


def expect_pure(psi: np.ndarray, rho: np.ndarray) -> float:
    return float(np.real(np.vdot(psi, rho @ psi)))


def _wrap(point_desc: str, exc: CatDimerError) -> CatDimerError:
    return type(exc)(f"{point_desc}: {exc}")


def _steady_point(task):
    delta, base, nmax, numeric, seed = task
    p = base.replace(Delta=float(delta))
    try:
        cd = p.to_cd()
        alpha = an.cat_amplitude(p)
        dim = max(an.required_dim(cd, 1e-14), fs.default_nmax(math.sqrt(2) * alpha) + 10)
        t = 2 * p.lam / p.Delta if p.Delta else math.inf
        sq_dim = None
        if abs(t) < 1:
            need = 4 if t == 0 else 2 * math.ceil(math.log(1e-16) / (2 * math.log(abs(t)))) + 8
            if need <= 6000:
                sq_dim = need
                dim = max(dim, need)
        psi_d = an.d_mode_state(cd, dim, check=False)
        f_cat = tm.fidelity_pure(psi_d, fs.cat(math.sqrt(2) * alpha, 1, dim, check=False))
        f_sq = math.nan
        if sq_dim is not None:
            f_sq = tm.fidelity_pure(psi_d, an.squeezed_limit_state(p.Delta, p.lam, dim, check=False))
        probs = np.abs(psi_d) ** 2
        levels = np.arange(dim)
        row = [p.Delta / p.U, f_cat, f_sq, float(probs @ levels),
               float(probs @ (-1.0) ** levels)]
        if numeric:
            rho = numeric_steady_state(p.replace(gamma=p.gamma, kappa=0.0), MismatchParams(),
                                       nmax, "cd", seed)
            row.append(expect_pure(exact_state(p, nmax), rho))
        return row
    except CatDimerError as exc:
        raise _wrap(f"delta={delta:.6g}", exc) from None


def _loss_point(task):
    kappa, base, nmax, with_wigner, points, seed = task
    p = base.replace(kappa=float(kappa))
    try:
        rho = numeric_steady_state(p, MismatchParams(), nmax, "cd", seed)
        row = [p.kappa / p.U, expect_pure(exact_state(p, nmax), rho),
               expect_pure(ideal_cat_state(p, nmax), rho), float(np.real(np.vdot(rho, rho)))]
        if with_wigner:
            rd = tm.reduced_density(rho, nmax, keep=1)
            wmap = tm.wigner(rd, tm.default_grid(an.cat_amplitude(p), points))
            row.append(float(wmap.values.min()))
        return row
    except CatDimerError as exc:
        raise _wrap(f"kappa={kappa:.6g}", exc) from None


def _mismatch_point(task):
    kind, value, base, nmax, seed = task
    m = MismatchParams(**{kind: float(value)})
    try:
        rho = numeric_steady_state(base, m, nmax, "cd", seed)
        return [kind, float(value), expect_pure(exact_state(base, nmax), rho)]
    except CatDimerError as exc:
        raise _wrap(f"{kind}={value:.6g}", exc) from None


def run_points(fn, tasks, workers: int) -> list:
    """Evaluate ``fn`` over ``tasks`` preserving order."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(fn, tasks))


# ------------------------------------------------------------------ output

def format_value(v) -> str:
    if isinstance(v, str):
        return v
    return f"{float(v):.12e}"


def write_csv(path: Path, columns: list[str], rows: list[list]) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(format_value(v) for v in row) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return None if not math.isfinite(float(obj)) else float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path: Path, doc) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")


def meta_path(out: Path) -> Path:
    return out.with_name(out.stem + ".meta.json") if out.suffix else Path(str(out) + ".meta.json")


def write_meta(cfg: SweepConfig, command: str, started: float, extra: dict | None = None):
    doc = {"command": command, "config": md.model_to_mapping(cfg.model),
           "raw_config": cfg.raw, "nmax": list(cfg.nmax), "numeric": cfg.numeric,
           "seed": cfg.seed, "workers": cfg.workers,
           "axis": None if cfg.axis is None else vars(cfg.axis),
           "versions": {"catdimer": __version__, "numpy": np.__version__,
                        "scipy": scipy.__version__, "python": platform.python_version()},
           "started": time.strftime("%Y-%m-%dT%H:%M:%S", time.localtime(started)),
           "elapsed_s": time.time() - started}
    if extra:
        doc.update(extra)
    write_json(meta_path(cfg.out), doc)


def _csv_out(cfg: SweepConfig) -> Path:
    return cfg.out if cfg.out.suffix else cfg.out.with_suffix(".csv")


# ------------------------------------------------------------- subcommands

def cmd_steady_sweep(cfg: SweepConfig) -> int:
    started = time.time()
    base = cfg.params
    tasks = [(v, base, cfg.nmax, cfg.numeric, cfg.seed) for v in cfg.axis.values()]
    rows = run_points(_steady_point, tasks, cfg.workers)
    cols = STEADY_COLUMNS + (["F_numeric_vs_analytic"] if cfg.numeric else [])
    cfg.out = _csv_out(cfg)
    write_csv(cfg.out, cols, rows)
    write_meta(cfg, "steady-sweep", started)
    return EXIT_OK


def cmd_loss_sweep(cfg: SweepConfig) -> int:
    started = time.time()
    base = _with_default_gamma(cfg)
    with_w = cfg.with_wigner
    points = _num(cfg.raw, "grid_points", 161, int)
    tasks = [(v, base, cfg.nmax, with_w, points, cfg.seed) for v in cfg.axis.values()]
    rows = run_points(_loss_point, tasks, cfg.workers)
    cols = LOSS_COLUMNS + (["min_wigner"] if with_w else [])
    cfg.out = _csv_out(cfg)
    write_csv(cfg.out, cols, rows)
    write_meta(cfg, "loss-sweep", started, {"gamma_used": base.gamma})
    return EXIT_OK


def cmd_mismatch_sweep(cfg: SweepConfig) -> int:
    started = time.time()
    kinds = [k.strip() for k in cfg.raw.get("kinds", ",".join(MISMATCH_KINDS)).split(",") if k.strip()]
    bad = [k for k in kinds if k not in MISMATCH_KINDS]
    if bad or not kinds:
        raise ConfigError(f"kinds must be drawn from {MISMATCH_KINDS}, got {kinds}")
    if "sweep" in cfg.raw and "kinds" not in cfg.raw:
        kinds = [cfg.axis.name]
    tasks = [(k, v, cfg.params, cfg.nmax, cfg.seed) for k in kinds for v in cfg.axis.values()]
    rows = run_points(_mismatch_point, tasks, cfg.workers)
    cfg.out = _csv_out(cfg)
    write_csv(cfg.out, MISMATCH_COLUMNS, rows)
    write_meta(cfg, "mismatch-sweep", started, {"kinds": kinds})
    return EXIT_OK


def cmd_wigner(cfg: SweepConfig) -> int:
    started = time.time()
    p = cfg.params
    mode = cfg.raw.get("mode", "d")
    if mode not in ("a", "b", "c", "d"):
        raise ConfigError(f"mode must be one of a, b, c, d, got {mode!r}")
    basis = "cd" if mode in ("c", "d") else "ab"
    dims = fs.two_mode(cfg.nmax)
    if basis == "ab" and dims.modes[0] != dims.modes[1]:
        raise ConfigError("the local basis needs nmax_a == nmax_b")
    m = cfg.model.mismatch
    lossless = p.kappa == 0 and m == MismatchParams()
    exact = exact_state(p, dims, basis)
    if lossless and not cfg.numeric:
        rho = np.outer(exact, exact.conj())
        source = "analytic"
    else:
        rho = numeric_steady_state(p, m, dims, basis, cfg.seed)
        source = "numeric"
    keep = 0 if mode in ("a", "c") else 1
    rd = tm.reduced_density(rho, dims, keep)
    alpha = an.cat_amplitude(p)
    # mode d carries the cat sqrt2 alpha_bar; local modes carry alpha_bar
    mode_alpha = alpha if mode == "d" else alpha / math.sqrt(2)
    points = _num(cfg.raw, "grid_points", 161, int)
    if "grid_max" in cfg.raw:
        half = _num(cfg.raw, "grid_max", 0.0)
        grid = np.linspace(-half, half, points)
    else:
        grid = tm.default_grid(mode_alpha, points)
    wmap = tm.wigner(rd, grid)
    neg = tm.wigner_negativity(wmap)
    prefix = cfg.out.with_suffix("") if cfg.out.suffix else cfg.out
    wmap.to_csv(Path(str(prefix) + ".csv"))
    wmap.to_json(Path(str(prefix) + ".json"))
    summary = {"min_w": neg.min_value, "negative_volume": neg.negative_volume,
               "integral": wmap.integral(), "purity": float(np.real(np.vdot(rho, rho))),
               "mode": mode, "source": source,
               "fidelities": {"F_vs_exact": expect_pure(exact, rho),
                              "F_vs_ideal_cat": expect_pure(ideal_cat_state(p, dims, basis), rho)},
               "top_populations": list(fs.top_level_population(rho, dims))}
    write_json(Path(str(prefix) + ".summary.json"), summary)
    cfg.out = Path(str(prefix) + ".csv")
    write_meta(cfg, "wigner", started)
    return EXIT_OK


def cmd_rates(cfg: SweepConfig) -> int:
    started = time.time()
    p = _with_default_gamma(cfg)
    alpha = an.cat_amplitude(p)
    asym = rm.asymptotic_rates(alpha, p.Delta, p.gamma)
    doc = {"alpha_bar": [alpha.real, alpha.imag], "Delta": p.Delta, "gamma": p.gamma,
           "asymptotic": asym.to_dict(), "warnings": []}
    n = fs.default_nmax(alpha)
    try:
        proj = rm.projected_rates(p, (n, n), raise_on_leakage=False)
        doc["projected"] = proj.summary()
        doc["warnings"].extend(proj.warnings)
        doc["ratios"] = {
            "Delta_tilde": proj.rates.Delta_tilde / asym.Delta_tilde if asym.Delta_tilde else None,
            "Gamma_23": proj.rates.Gamma_23 / asym.Gamma_23,
            "Gamma_43": proj.rates.Gamma_43 / asym.Gamma_43,
            "Gamma_rel": proj.rates.Gamma_rel / asym.Gamma_rel if asym.Gamma_rel else None,
        }
    except ManifoldLeakage as exc:
        doc["warnings"].append(str(exc))
    H = md.hamiltonian_h2_ab(p, cfg.nmax, "cd")
    L = lv.build_liouvillian(H, md.collapse_ops(p, "cd", cfg.nmax), cfg.nmax)
    gap = lv.spectral_gap(L)
    doc["spectral_gap"] = {"gap": gap.gap, "n_zero": gap.n_zero,
                           "eigenvalues": [[z.real, z.imag] for z in gap.eigenvalues],
                           "gap_over_Gamma_rel": gap.gap / asym.Gamma_rel if asym.Gamma_rel else None}
    if p.Delta > 0:
        doc["optimal_gamma"] = {"closed_form": rm.optimal_gamma(alpha, p.Delta),
                                "numeric": rm.numeric_optimal_gamma(alpha, p.Delta)}
    if cfg.axis is not None:
        if cfg.axis.name != "gamma":
            raise ConfigError("rates sweeps gamma only")
        gs = cfg.axis.values()
        rel = [rm.asymptotic_rates(alpha, p.Delta, g).Gamma_rel for g in gs]
        doc["gamma_sweep"] = {"gamma": list(gs), "Gamma_rel": rel,
                              "argmax": float(gs[int(np.argmax(rel))])}
    out = cfg.out if cfg.out.suffix else cfg.out.with_suffix(".json")
    cfg.out = out
    write_json(out, doc)
    write_meta(cfg, "rates", started)
    return EXIT_OK


def cmd_evolve(cfg: SweepConfig) -> int:
    started = time.time()
    p = _with_default_gamma(cfg)
    dims = fs.two_mode(cfg.nmax)
    alpha = an.cat_amplitude(p)
    t_max = _num(cfg.raw, "t_max", None)
    if t_max is None:
        rel = rm.asymptotic_rates(alpha, p.Delta, p.gamma).Gamma_rel
        if rel <= 0:
            raise ConfigError("set t_max: the relaxation rate vanishes for these parameters")
        t_max = 20 / rel
    count = _num(cfg.raw, "t_count", 21, int)
    tt = cfg.raw.get("truncation_tol", "1e-6")
    trunc = None if tt.lower() == "none" else _num(cfg.raw, "truncation_tol", 1e-6)
    method = cfg.raw.get("method", "bdf")
    H = md.hamiltonian_mismatch(p, cfg.model.mismatch, dims, "cd")
    L = lv.build_liouvillian(H, md.collapse_ops(p, "cd", dims), dims)
    rho0 = np.zeros((dims.total, dims.total), dtype=complex)
    rho0[0, 0] = 1.0
    times = np.linspace(0.0, t_max, count)
    try:
        states = lv.evolve(rho0, L, times, method=method, truncation_tol=trunc)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    exact = exact_state(p, dims)
    rows = []
    for t, rho in zip(times, states):
        obs = tm.observables(rho, dims)
        rows.append([t, expect_pure(exact, rho), obs.purity, obs.n_a, obs.n_b,
                     obs.joint_parity, float(np.trace(rho).real)])
    cfg.out = _csv_out(cfg)
    write_csv(cfg.out, EVOLVE_COLUMNS, rows)
    write_meta(cfg, "evolve", started, {"t_max": t_max, "method": method})
    return EXIT_OK


COMMANDS = {
    "steady-sweep": cmd_steady_sweep,
    "loss-sweep": cmd_loss_sweep,
    "mismatch-sweep": cmd_mismatch_sweep,
    "wigner": cmd_wigner,
    "rates": cmd_rates,
    "evolve": cmd_evolve,
}


# -------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--out", help="output path (CSV/JSON, or file prefix for wigner)")
    common.add_argument("--nmax-a", type=int, help="levels of the first mode (a or c)")
    common.add_argument("--nmax-b", type=int, help="levels of the second mode (b or d)")
    common.add_argument("--workers", type=int, help="worker processes (default: CPU count)")
    common.add_argument("--numeric", action="store_true",
                        help="use the numerical Lindblad steady state where optional")
    common.add_argument("--seed", type=int, help="seed for randomized checks")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override any config key (repeatable)")
    for key in md.CONFIG_KEYS:
        if key.startswith("nmax"):
            continue
        common.add_argument(f"--{key.replace('_', '-')}", dest=key, type=float,
                            help=f"override {key}")
    common.add_argument("--sweep-min", type=float)
    common.add_argument("--sweep-max", type=float)
    common.add_argument("--sweep-count", type=int)
    common.add_argument("--sweep-scale", choices=("linear", "log"))

    parser = argparse.ArgumentParser(prog="catdimer", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"catdimer {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "steady-sweep": "analytic steady-state fidelities versus Delta/U",
        "loss-sweep": "lossy steady-state fidelities versus kappa/U",
        "mismatch-sweep": "fidelity versus cavity parameter mismatch",
        "wigner": "single-mode Wigner function of the steady state",
        "rates": "cat-manifold rates, spectral gap and optimal damping",
        "evolve": "time evolution from the two-mode vacuum",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, parents=[common], help=text)
        if name == "loss-sweep":
            sp.add_argument("--wigner", action="store_true",
                            help="append the minimum of the mode-d Wigner function")
    return parser


def _configure_logging():
    level = os.environ.get("CATDIMER_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args, args.command)
        return COMMANDS[args.command](cfg)
    except (ConfigError, DegenerateInput, DivergentSeries) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except TruncationError as exc:
        log.error("truncation failure: %s", exc)
        return EXIT_TRUNCATION
    except (SolverFailure, NonUniqueSteadyState, CatDimerError) as exc:
        log.error("solver failure: %s", exc)
        return EXIT_SOLVER
    except ValueError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
