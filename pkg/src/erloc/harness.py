"""Experiment configuration, orchestration and deterministic persistence."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError
from .exponents import B_STAR, r_star as r_star_of, rho_b, xi as xi_of
from .forks import find_forks, fork_census_rows, fork_eigenpairs
from .graph import build_scaled_matrix, components_census, generate_er, normalized_degrees
from .local_law import green_function, instability_probe, local_law_report
from .localization import (default_delta, overlap_report, resonant_set, rigidity_pairing,
                           scatter_data)
from .measures import density_rows, m_alpha, mu_alpha, stieltjes_quadrature
from .profiles import approximation_report, build_profile, build_pruned_operators
from .pruning import export_removed, prune, verify_pruning
from .spectra import DENSE_CUTOFF, eig_sym
from .errors import DegenerateSupportError

__all__ = [
    "KINDS",
    "KIND_HELP",
    "ExperimentConfig",
    "RunRecord",
    "parse_config",
    "run_experiment",
    "emit",
    "run_id",
]

KIND_HELP = {
    "scatter": "Eigenvalue versus eigenvector sup-norm scatter of A/sqrt(d) on the giant "
               "component: delocalized bulk, semilocalized edge |lambda| > 2, Perron outlier.",
    "rigidity": "Eigenvalue rigidity: each vertex with Lambda(alpha_x) >= 2 + xi^(1/2) pairs "
                "with one nontrivial eigenvalue near +-Lambda(alpha_x); all others stay below "
                "2 + xi^(1/2).",
    "localize": "Semilocalization: eigenvectors with |lambda| > 2 concentrate on localization "
                "profiles around resonant vertices; reports gamma, overlap and center mass "
                "against sqrt(lambda^2-4)/(lambda+sqrt(lambda^2-4)).",
    "prune-verify": "Pruned graph around vertices with alpha_x >= tau: separation, tree balls, "
                    "incidence of removed edges and sphere nesting, checked exactly.",
    "local-law": "Local law: diagonal Green function entries G_xx(z) track m_{beta_x}(z), "
                 "with error compared against (log N / d^2)^(1/3).",
    "forks": "Star tuning forks rooted in the giant component: exact eigenvalues +-sqrt(D/d) "
             "and counts against N d^2 e^{-2d} / (2 D!^2) (d e^{-d+1})^{2D}.",
    "measures": "Limiting measures mu_alpha: density g_alpha on (-2,2), atoms at +-Lambda(alpha) "
                "for alpha > 2, Stieltjes transform m_alpha = -1/(z + alpha m).",
    "phase": "Phase diagram exponent rho_b(lambda) = theta_b(Lambda^{-1}(lambda)), zero beyond "
             "lambda_max(b) and identically zero in |lambda| > 2 once b >= b_*.",
    "instability": "Instability of the naive self-consistent equation: sup-norm of (alpha - S)^{-1} "
                   "on a d-regular tree grows like r / log r.",
    "blocknorms": "Block-diagonal approximation of the pruned matrix: norms of H - H^tau, "
                  "H^tau - H_hat and of the complement block against 2 tau.",
}
KINDS = tuple(KIND_HELP)

GRAPH_KINDS = {"scatter", "rigidity", "localize", "prune-verify", "local-law", "forks", "blocknorms"}

DEFAULTS = {
    "n": None, "b": None, "d": None, "seeds": [0],
    "tau": 1.5, "delta": None, "r_star_c": 0.25, "kappa": 0.1,
    "eta_grid": None, "z_grid": None, "d_grid": None,
    "alpha_grid": [0.0, 0.5, 1.0, 2.0, 3.0, 5.0], "u_points": 401,
    "b_grid": None, "lambda_grid": None,
    "r_grid": [6, 12, 24], "branching": 32, "phase_angle": math.pi / 3,
    "max_D": 3, "k_edge": 20, "window": [0.5, 1.5], "giant_only": True,
    "export_removed": False, "out": "results",
}

_TYPES = {
    "kind": str, "n": int, "b": (int, float), "d": (int, float), "seeds": list,
    "tau": (int, float), "delta": (int, float, type(None)), "r_star_c": (int, float),
    "kappa": (int, float), "eta_grid": (list, type(None)), "z_grid": (list, type(None)),
    "d_grid": (list, type(None)), "alpha_grid": list, "u_points": int,
    "b_grid": (list, type(None)), "lambda_grid": (list, type(None)), "r_grid": list,
    "branching": int, "phase_angle": (int, float), "max_D": int, "k_edge": int,
    "window": list, "giant_only": bool, "export_removed": bool, "out": str,
}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    n: int | None = None
    b: float | None = None
    d: float | None = None
    seeds: tuple = (0,)
    tau: float = 1.5
    delta: float | None = None
    r_star_c: float = 0.25
    kappa: float = 0.1
    eta_grid: tuple | None = None
    z_grid: tuple | None = None
    d_grid: tuple | None = None
    alpha_grid: tuple = (0.0, 0.5, 1.0, 2.0, 3.0, 5.0)
    u_points: int = 401
    b_grid: tuple | None = None
    lambda_grid: tuple | None = None
    r_grid: tuple = (6, 12, 24)
    branching: int = 32
    phase_angle: float = math.pi / 3
    max_D: int = 3
    k_edge: int = 20
    window: tuple = (0.5, 1.5)
    giant_only: bool = True
    export_removed: bool = False
    out: str = "results"

    @property
    def degree(self) -> float:
        """Expected degree d (from b·log N when b is given)."""
        return float(self.d) if self.d is not None else float(self.b) * math.log(self.n)

    def echo(self) -> dict:
        """Config as plain JSON data, excluding the output location."""
        out = asdict(self)
        out.pop("out")
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in out.items()}


@dataclass
class RunRecord:
    run_id: str
    kind: str
    seed: int | None
    config: dict
    columns: list
    rows: list
    summary: dict
    wall_time: float = 0.0
    version: str = __version__
    extra_files: dict = field(default_factory=dict)


def _err(path: str, msg: str) -> ConfigError:
    return ConfigError(f"config field '{path}': {msg}")


def _tuplify(v):
    if isinstance(v, list):
        return tuple(_tuplify(x) for x in v)
    return v


def parse_config(source) -> ExperimentConfig:
    """Validate a JSON config given as a path, a JSON string or a dict."""
    if isinstance(source, dict):
        raw = dict(source)
    else:
        text = str(source)
        p = Path(text)
        if not text.lstrip().startswith("{") and p.exists():
            text = p.read_text()
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    # explicit nulls mean "unset" for fields that default to unset
    raw = {k: v for k, v in raw.items() if not (v is None and DEFAULTS.get(k, 0) is None)}
    kind = raw.get("kind")
    if kind is None:
        raise _err("kind", f"missing; valid kinds: {', '.join(KINDS)}")
    if kind not in KINDS:
        raise _err("kind", f"unknown kind {kind!r}; valid kinds: {', '.join(KINDS)}")
    for key, val in raw.items():
        if key not in _TYPES:
            raise _err(key, "unknown field")
        if isinstance(val, bool) and _TYPES[key] is not bool and bool not in (
                _TYPES[key] if isinstance(_TYPES[key], tuple) else (_TYPES[key],)):
            raise _err(key, "must not be a boolean")
        if not isinstance(val, _TYPES[key]):
            raise _err(key, f"wrong type {type(val).__name__}")
    if raw.get("b") is not None and raw.get("d") is not None:
        raise _err("b", "give exactly one of 'b' and 'd'")
    cfg = {**DEFAULTS, **raw}
    if "seeds" in raw:
        if not raw["seeds"]:
            raise _err("seeds", "must be nonempty")
        for i, s in enumerate(raw["seeds"]):
            if not isinstance(s, int) or isinstance(s, bool) or s < 0:
                raise _err(f"seeds[{i}]", "must be a nonnegative integer")
    needs_graph = kind in GRAPH_KINDS and not (kind == "local-law" and cfg["d_grid"])
    if kind in GRAPH_KINDS:
        if cfg["n"] is None:
            raise _err("n", f"required for kind {kind!r}")
        if cfg["n"] < 2:
            raise _err("n", "must be >= 2")
    if needs_graph and cfg["b"] is None and cfg["d"] is None:
        raise _err("b", f"kind {kind!r} needs exactly one of 'b' and 'd'")
    for key in ("b", "d"):
        if cfg[key] is not None and cfg[key] <= 0:
            raise _err(key, "must be positive")
    if cfg["d"] is not None and cfg["n"] is not None and cfg["d"] > cfg["n"]:
        raise _err("d", "must not exceed n")
    if cfg["tau"] <= 1:
        raise _err("tau", "must be > 1")
    for key in ("eta_grid", "z_grid", "d_grid", "b_grid", "lambda_grid"):
        if cfg[key] is not None and len(cfg[key]) == 0:
            raise _err(key, "must be nonempty")
    for key in ("alpha_grid", "r_grid", "window"):
        if len(cfg[key]) == 0:
            raise _err(key, "must be nonempty")
    if cfg["z_grid"] is not None:
        for i, z in enumerate(cfg["z_grid"]):
            if not (isinstance(z, list) and len(z) == 2) or z[1] <= 0:
                raise _err(f"z_grid[{i}]", "must be [re, im] with im > 0")
    if len(cfg["window"]) != 2 or cfg["window"][0] >= cfg["window"][1]:
        raise _err("window", "must be [lo, hi] with lo < hi")
    if any(a < 0 for a in cfg["alpha_grid"]):
        raise _err("alpha_grid", "entries must be nonnegative")
    if any(int(r) < 2 for r in cfg["r_grid"]):
        raise _err("r_grid", "entries must be >= 2")
    return ExperimentConfig(**{k: _tuplify(v) for k, v in cfg.items()})


def run_id(cfg: ExperimentConfig, seed) -> str:
    payload = json.dumps({"config": cfg.echo(), "seed": seed}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:12]


def _num(x):
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


# --- pipelines (each returns columns, rows, summary) -----------------------

def _graph(cfg: ExperimentConfig, seed: int):
    return generate_er(cfg.n, cfg.degree, seed)


def _run_scatter(cfg, seed):
    g = _graph(cfg, seed)
    data = scatter_data(g, giant_only=cfg.giant_only, k_edge=cfg.k_edge, window=cfg.window)
    lam, inf = data["eigenvalue"], data["inf_norm"]
    lo, hi = cfg.window
    bulk = inf[(lam >= lo) & (lam <= hi)]
    edge = inf[np.abs(lam) > 2.05]
    # the Perron eigenvalue is the largest one; exclude it from the edge statistic
    edge_np = inf[1:][np.abs(lam[1:]) > 2.05]
    summary = {
        "perron": float(lam[0]),
        "bulk_median_inf_norm": float(np.median(bulk)) if bulk.size else None,
        "edge_max_inf_norm": float(edge.max()) if edge.size else None,
        "edge_max_inf_norm_nontrivial": float(edge_np.max()) if edge_np.size else None,
        "n_pairs": int(lam.size), "n_component": data["n"], "method": data["method"],
    }
    rows = [(float(a), float(b)) for a, b in zip(lam, inf)]
    return ["eigenvalue", "inf_norm"], rows, summary


def _run_rigidity(cfg, seed):
    g = _graph(cfg, seed)
    m = build_scaled_matrix(g).entries
    if g.n <= DENSE_CUTOFF:
        eigs = eig_sym(m, "dense", vectors=False)
    else:
        eigs = eig_sym(m, "extremal", k=cfg.k_edge)
    rep = rigidity_pairing(eigs, normalized_degrees(g), xi_of(g.n, g.d))
    rows = [(r["rank"], r["eigenvalue"], r["predicted"], r["abs_gap"]) for r in rep["pairs"]]
    summary = {k: v for k, v in rep.items() if k != "pairs"}
    summary["xi"] = xi_of(g.n, g.d)
    summary["lambda_2"] = float(eigs.values[1])
    return ["rank", "eigenvalue", "predicted", "abs_gap"], rows, summary


def _run_localize(cfg, seed):
    g = _graph(cfg, seed)
    if g.n > DENSE_CUTOFF:
        raise ConfigError(f"config field 'n': localize needs n <= {DENSE_CUTOFF}")
    p = prune(g, cfg.tau, r_star_of(g.n, cfg.r_star_c))
    prof = normalized_degrees(g)
    eigs = eig_sym(build_scaled_matrix(g).entries, "dense")
    in_v = set(p.v_tau.tolist())
    rows = []
    for i in range(1, g.n):
        lam = float(eigs.values[i])
        if abs(lam) <= 2.0:
            continue
        delta = cfg.delta if cfg.delta is not None else default_delta(lam)
        delta = min(delta, abs(lam) - 2.0)
        W = resonant_set(prof, abs(lam), delta)
        sigma = 1 if lam > 0 else -1
        profiles = []
        for x in W.vertices.tolist():
            if x in in_v:
                try:
                    profiles.append(build_profile(p, x, sigma))
                except DegenerateSupportError:
                    pass
        rep = overlap_report(eigs.vectors[:, i], lam, profiles, W)
        rows.append(rep.row())
    summary = {"n_semilocalized": len(rows), "r_star": p.r_star, "v_tau": int(p.v_tau.size)}
    return ["eigenvalue", "gamma", "overlap", "center_mass", "predicted_center_mass"], rows, summary


def _run_prune(cfg, seed, out_dir=None, rid=None):
    g = _graph(cfg, seed)
    rs = r_star_of(g.n, cfg.r_star_c)
    p = prune(g, cfg.tau, rs)
    rep = verify_pruning(p)
    cols = ["seed", "n", "d", "tau", "r_star", "v_tau", "removed", "separated", "trees",
            "incident", "spheres_nested", "max_removed_degree", "sphere_loss"]
    row = (seed, g.n, g.d, p.tau, rs, int(p.v_tau.size), int(p.removed_edges.shape[0]),
           rep.separated, rep.trees, rep.incident, rep.spheres_nested,
           rep.max_removed_degree, rep.sphere_loss)
    extra = {}
    if cfg.export_removed and out_dir is not None:
        extra["removed_edges"] = str(export_removed(p, Path(out_dir) / f"pruned_{rid}.edges"))
    return cols, [row], {"all_exact": rep.all_exact, **extra}


def _z_grid(cfg):
    if cfg.z_grid:
        return [complex(a, b) for a, b in cfg.z_grid]
    etas = cfg.eta_grid or (0.05,)
    return [complex(1.0, e) for e in etas]


def _run_local_law(cfg, seed):
    ds = list(cfg.d_grid) if cfg.d_grid else [cfg.degree]
    rows = []
    for d in ds:
        g = generate_er(cfg.n, float(d), seed)
        m = build_scaled_matrix(g)
        for z in _z_grid(cfg):
            rep = local_law_report(green_function(m, z, want_full=False))
            rows.append((z.real, z.imag, rep["max_diag_err"], rep["avg_err"], rep["rate_ref"],
                         float(d), cfg.n, seed))
    return ["re_z", "im_z", "max_diag_err", "avg_err", "rate_ref", "d", "N", "seed"], rows, {}


def _run_forks(cfg, seed):
    g = _graph(cfg, seed)
    forks = find_forks(g, components_census(g))
    worst = 0.0
    a = build_scaled_matrix(g).entries
    for f in forks:
        for lam, w in fork_eigenpairs(f, g):
            worst = max(worst, float(np.linalg.norm(a @ w - lam * w)))
    rows = fork_census_rows(seed, g, forks, max_D=cfg.max_D)
    return ["seed", "N", "d", "D", "count", "expected"], rows, {
        "n_forks": len(forks), "max_residual": worst}


def _run_measures(cfg, alpha):
    grid = np.linspace(-2.0, 2.0, cfg.u_points)
    rows, atoms = density_rows(alpha, grid)
    mu = mu_alpha(alpha)
    zs = _z_grid(cfg) if (cfg.z_grid or cfg.eta_grid) else [complex(1.0, 0.1)]
    worst = max(abs(stieltjes_quadrature(mu, z) - m_alpha(alpha, z)) for z in zs)
    return ["u", "g_alpha"], rows, {**atoms, "max_quadrature_gap": float(worst)}


def _run_phase(cfg, _seed):
    bs = cfg.b_grid or tuple(np.round(np.linspace(0.3, 3.0, 10), 10).tolist())
    lams = cfg.lambda_grid or tuple(np.round(np.linspace(0.0, 3.0, 31), 10).tolist())
    rows = [(float(b), float(l), rho_b(float(b), float(l))) for b in bs for l in lams]
    return ["b", "lambda", "rho_b"], rows, {"b_star": B_STAR}


def _run_instability(cfg, _seed):
    phase = complex(math.cos(cfg.phase_angle), math.sin(cfg.phase_angle))
    rows, xs, ys = [], [], []
    for r in cfg.r_grid:
        o = instability_probe(cfg.branching, int(r), phase)
        rows.append((int(r), cfg.branching, o["lower_bound"], o["residual_inf"], o["u_inf"],
                     o["mu"], o["C1"]))
        xs.append(r / math.log(r))
        ys.append(o["lower_bound"])
    xs, ys = np.array(xs), np.array(ys)
    c_fit = float(xs @ ys / (xs @ xs))
    return ["r", "d", "lower_bound", "residual_inf", "u_inf", "mu", "C1"], rows, {
        "fitted_c": c_fit, "increasing": bool(np.all(np.diff(ys) > 0))}


def _run_blocknorms(cfg, seed):
    g = _graph(cfg, seed)
    p = prune(g, cfg.tau, r_star_of(g.n, cfg.r_star_c))
    ops = build_pruned_operators(g, p, xi_of(g.n, g.d))
    rep = approximation_report(ops)
    cols = ["norm_h_htau", "norm_htau_hhat", "norm_complement_block", "tau", "r_star", "seed"]
    return cols, [tuple(rep[c] for c in cols)], {"n_profiles": len(ops.profiles),
                                                 "two_tau": rep["two_tau"]}


_PIPELINES = {
    "scatter": _run_scatter, "rigidity": _run_rigidity, "localize": _run_localize,
    "prune-verify": _run_prune, "local-law": _run_local_law, "forks": _run_forks,
    "measures": _run_measures, "phase": _run_phase, "instability": _run_instability,
    "blocknorms": _run_blocknorms,
}


def _units(cfg: ExperimentConfig) -> list:
    if cfg.kind == "measures":
        return list(cfg.alpha_grid)
    if cfg.kind in ("phase", "instability"):
        return [None]
    return list(cfg.seeds)


def _run_one(cfg: ExperimentConfig, unit) -> RunRecord:
    rid = run_id(cfg, unit)
    t0 = time.perf_counter()
    try:
        if cfg.kind == "prune-verify":
            cols, rows, summary = _run_prune(cfg, unit, cfg.out, rid)
        else:
            cols, rows, summary = _PIPELINES[cfg.kind](cfg, unit)
    except Exception as exc:
        exc.args = (f"[{cfg.kind} run {rid}, unit {unit}] {exc.args[0] if exc.args else ''}",
                    *exc.args[1:])
        raise
    seed = unit if cfg.kind in GRAPH_KINDS else None
    rec = RunRecord(rid, cfg.kind, seed, cfg.echo(), cols,
                    [tuple(_num(v) for v in r) for r in rows],
                    {k: _num(v) for k, v in summary.items()}, time.perf_counter() - t0)
    if cfg.kind == "measures":
        rec.summary["alpha"] = float(unit)
    return rec


def run_experiment(cfg: ExperimentConfig, threads: int = 1, write: bool = True) -> list[RunRecord]:
    """Run every seed (or grid unit) of ``cfg`` and persist CSV + JSONL per run."""
    units = _units(cfg)
    if threads > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(_run_one, [cfg] * len(units), units))
    else:
        records = [_run_one(cfg, u) for u in units]
    if write:
        for rec in records:
            emit(rec, cfg.out)
    return records


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit(record: RunRecord, out_dir, formats=("csv", "jsonl")) -> dict:
    """Write ``<kind>_<runid>.csv`` and ``.jsonl``; contents are deterministic."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    paths = {}
    stem = f"{record.kind}_{record.run_id}"
    if "csv" in formats:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(record.columns)
        for row in record.rows:
            w.writerow([_fmt(v) for v in row])
        paths["csv"] = out / f"{stem}.csv"
        _write(paths["csv"], buf.getvalue())
    if "jsonl" in formats:
        doc = {"run_id": record.run_id, "kind": record.kind, "seed": record.seed,
               "config": record.config, "summary": record.summary, "version": record.version}
        paths["jsonl"] = out / f"{stem}.jsonl"
        _write(paths["jsonl"], json.dumps(doc, sort_keys=True) + "\n")
    return paths


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
