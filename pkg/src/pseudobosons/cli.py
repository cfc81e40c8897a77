"""Config-driven command-line front end.

Subcommands: ``check`` (verification suite), ``states`` (CSV tables of
the two families), ``bicoherent`` (weak-pairing tables, eigen-relation
residuals, resolution-of-identity comparison), ``hamiltonian``
(coefficient tables plus printed-formula cross-checks).

Configs are INI files; see the schema in the package README.  Exit
status: 0 all checks pass, 1 check failures (report still written),
2 config errors.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import configparser
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import bicoherent as bc
from . import expressions as ex
from . import model as model_mod
from . import quad, spectral, states

ENV_PREFIX = "PSEUDOBOSONS_"

CHECK_ORDER = (
    "conditions",
    "commutator",
    "normalization",
    "biorthonormality",
    "ladder",
    "eigen",
    "hsusy",
    "hamiltonian_crosscheck",
)

DEFAULT_TOLERANCES = {
    "conditions": 1e-10,
    "commutator": 1e-8,
    "normalization": 1e-9,
    "biorthonormality": 1e-8,
    "ladder": 1e-8,
    "eigen": 1e-6,
    "hsusy": 1e-6,
    "hamiltonian_crosscheck": 1e-12,
}

# checks that cannot run once an upstream one has failed
BLOCKED_BY = {
    "commutator": "conditions",
    "normalization": "conditions",
    "biorthonormality": "normalization",
    "ladder": "conditions",
    "eigen": "conditions",
    "hsusy": "conditions",
}


class ConfigError(Exception):
    """Malformed or inconsistent run configuration."""


@dataclass
class RunConfig:
    model_spec: dict
    n_max: int
    grid_lo: float
    grid_hi: float
    grid_points: int
    checks: list
    tolerances: dict
    seed: int
    out_dir: Path
    jobs: int
    bicoherent: dict

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.grid_lo, self.grid_hi, self.grid_points)


@dataclass
class CheckRecord:
    name: str
    inputs_digest: str
    metric: Optional[float]
    tolerance: Optional[float]
    verdict: str  # pass | fail | blocked | skipped | error
    detail: dict = field(default_factory=dict)


@dataclass
class VerificationReport:
    model: dict
    records: list
    overall: str
    timing_seconds: float

    def to_json(self, *, include_timing: bool = True) -> str:
        doc = {
            "model": self.model,
            "checks": [
                {
                    "name": r.name,
                    "inputs": r.inputs_digest,
                    "metric": r.metric,
                    "tolerance": r.tolerance,
                    "verdict": r.verdict,
                    "detail": r.detail,
                }
                for r in self.records
            ],
            "overall": self.overall,
        }
        if include_timing:
            doc["timing_seconds"] = self.timing_seconds
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"


# ----------------------------------------------------------------------
# Config parsing
# ----------------------------------------------------------------------

def _parse_scalar(text: str) -> complex:
    """Parse a numeric parameter using the expression grammar; the result
    must be a constant (no x)."""
    tree = ex.parse_expr(text)
    if _mentions_var(tree):
        raise ConfigError(f"parameter {text!r} must be a constant")
    return complex(tree.eval_values(np.array([0.0]))[0])


def _mentions_var(tree) -> bool:
    if isinstance(tree, ex.Var):
        return True
    for attr in ("left", "right", "arg", "base_expr"):
        child = getattr(tree, attr, None)
        if child is not None and _mentions_var(child):
            return True
    return False


def _real(value: complex, what: str) -> float:
    if value.imag != 0:
        raise ConfigError(f"{what} must be real, got {value}")
    return value.real


def load_config(path: Path, *, out_override=None, tol_scale: float = 1.0,
                jobs_override=None) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    if "model" not in cp:
        raise ConfigError("config needs a [model] section")
    model_spec = dict(cp["model"])

    grid = cp["grid"] if "grid" in cp else {}
    lo = float(grid.get("lo", -4.0))
    hi = float(grid.get("hi", 4.0))
    points = int(grid.get("points", 201))
    if points < 2:
        raise ConfigError("grid points must be >= 2")
    if not lo < hi:
        raise ConfigError("grid lo must be < hi")

    run = cp["run"] if "run" in cp else {}
    n_max = int(run.get("n_max", 10))
    seed = int(run.get("seed", 20240901))
    jobs = int(run.get("jobs", 1))
    raw_checks = run.get("checks", " ".join(CHECK_ORDER))
    checks = [c for c in raw_checks.replace(",", " ").split() if c]
    unknown = [c for c in checks if c not in CHECK_ORDER]
    if unknown:
        raise ConfigError(f"unknown checks {unknown}; known: {CHECK_ORDER}")

    tolerances = dict(DEFAULT_TOLERANCES)
    if "tolerances" in cp:
        for key, val in cp["tolerances"].items():
            if key not in DEFAULT_TOLERANCES:
                raise ConfigError(f"unknown tolerance key {key!r}")
            tolerances[key] = float(val)
    if tol_scale != 1.0:
        tolerances = {k: v * tol_scale for k, v in tolerances.items()}
    if any(v <= 0 for v in tolerances.values()):
        raise ConfigError("tolerances must be positive")

    out_dir = Path(out_override) if out_override else \
        Path(cp["output"].get("dir", "out")) if "output" in cp else Path("out")

    bico = dict(cp["bicoherent"]) if "bicoherent" in cp else {}

    if jobs_override is not None:
        jobs = int(jobs_override)
    if jobs < 1:
        raise ConfigError("jobs must be >= 1")

    return RunConfig(
        model_spec=model_spec, n_max=n_max, grid_lo=lo, grid_hi=hi,
        grid_points=points, checks=checks, tolerances=tolerances, seed=seed,
        out_dir=out_dir, jobs=jobs, bicoherent=bico,
    )


def build_model(spec: dict) -> model_mod.PBModel:
    spec = dict(spec)
    if "builtin" in spec:
        name = spec.pop("builtin").strip()
        params = {}
        for key, val in spec.items():
            value = _parse_scalar(val)
            if key == "theta":
                params[key] = _real(value, "theta")
            elif key == "k" and name == "constant_alpha":
                params[key] = value
            else:
                params[key] = value
        try:
            return model_mod.build_builtin(name, **params)
        except (model_mod.ModelError, TypeError) as exc:
            raise ConfigError(f"cannot build builtin {name!r}: {exc}") from exc
    required = ("alpha_a", "beta_a", "alpha_b", "beta_b")
    missing = [k for k in required if k not in spec]
    if missing:
        raise ConfigError(
            f"[model] needs either 'builtin' or all of {required}; "
            f"missing {missing}"
        )
    try:
        return model_mod.from_expressions(
            spec["alpha_a"], spec["beta_a"], spec["alpha_b"], spec["beta_b"],
            name=spec.get("name", "custom"),
        )
    except ex.ExpressionError as exc:
        raise ConfigError(f"bad coefficient expression: {exc}") from exc


def _model_echo(m: model_mod.PBModel) -> dict:
    return {
        "name": m.name,
        "flavor": m.flavor.kind,
        "alpha_a": ex.to_source(m.alpha_a),
        "beta_a": ex.to_source(m.beta_a),
        "alpha_b": ex.to_source(m.alpha_b),
        "beta_b": ex.to_source(m.beta_b),
    }


def _digest(payload) -> str:
    canon = json.dumps(payload, sort_keys=True, default=str)
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


# ----------------------------------------------------------------------
# Checks
# ----------------------------------------------------------------------

def _random_bumps(cfg: RunConfig, count: int = 5) -> list:
    rng = np.random.default_rng(cfg.seed)
    lo, hi = cfg.grid_lo, cfg.grid_hi
    mid, span = 0.5 * (lo + hi), 0.5 * (hi - lo)
    bumps = []
    for _ in range(count):
        center = mid + 0.5 * span * rng.uniform(-1.0, 1.0)
        width = rng.uniform(0.5, 1.0) * min(1.5, 0.4 * span)
        bumps.append(quad.TestFunction(center=center, width=width))
    return bumps


def _check_conditions(m, cfg):
    rep = model_mod.check_pb_conditions(
        m, cfg.grid, tol=cfg.tolerances["conditions"])
    return rep.max_abs, {"residual1_max": rep.max_abs1,
                         "residual2_max": rep.max_abs2}


def _check_commutator(m, cfg):
    worst = 0.0
    for bump in _random_bumps(cfg):
        stats = model_mod.commutator_residual(m, bump.jet, cfg.grid)
        worst = max(worst, stats.sup_abs)
    return worst, {"bumps": 5}


def _check_normalization(m, cfg):
    value = states.fix_normalization(m)
    res = quad.compatibility_form(
        m, lambda xs: np.conj(value) * m.psi_vacuum_values(xs),
        m.phi_vacuum_values, envelope=states.pair_envelope(m, 0))
    metric = abs(res.value - 1.0)
    return metric, {"norm_product_re": value.real,
                    "norm_product_im": value.imag}


def _check_biorthonormality(m, cfg):
    if m.norm_product is None:
        states.fix_normalization(m)
    _, dev = quad.biorthonormality_matrix(m, cfg.n_max)
    return dev, {"matrix_size": cfg.n_max + 1}


def _check_ladder(m, cfg):
    phi = states.StateFamily(m, "phi", max_n=cfg.n_max)
    psi = states.StateFamily(m, "psi", max_n=cfg.n_max)
    worst = 0.0
    for n in range(cfg.n_max):
        worst = max(worst, states.verify_ladder(phi, psi, n, cfg.grid).max)
    return worst, {"levels": cfg.n_max}


def _check_eigen(m, cfg):
    worst = 0.0
    for n in range(cfg.n_max + 1):
        worst = max(worst, spectral.eigen_residual(m, "H", n, cfg.grid))
        worst = max(worst, spectral.eigen_residual(m, "H_dag", n, cfg.grid))
    return worst, {"levels": cfg.n_max + 1}


def _check_hsusy(m, cfg):
    worst = 0.0
    for n in range(cfg.n_max + 1):
        worst = max(worst, spectral.hsusy_shift_check(m, n, cfg.grid))
    return worst, {"levels": cfg.n_max + 1}


def _check_hamiltonian_crosscheck(m, cfg):
    grid = cfg.grid
    if m.name in ("example1", "example2"):
        dev = spectral.builtin_hamiltonian_crosscheck(m.name, grid=grid)
    elif (m.flavor.kind == "constant_alpha"
          and m.flavor.alpha_a == 1.0 and m.flavor.alpha_b == 1.0
          and m.flavor.k.imag == 0.0):
        dev = spectral.builtin_hamiltonian_crosscheck(
            "constant_k", k=m.flavor.k.real, grid=grid)
    else:
        return None, {"note": "no printed coefficients for this model"}
    return dev, {}


CHECK_FUNCS: dict[str, Callable] = {
    "conditions": _check_conditions,
    "commutator": _check_commutator,
    "normalization": _check_normalization,
    "biorthonormality": _check_biorthonormality,
    "ladder": _check_ladder,
    "eigen": _check_eigen,
    "hsusy": _check_hsusy,
    "hamiltonian_crosscheck": _check_hamiltonian_crosscheck,
}


def cmd_check(cfg: RunConfig) -> VerificationReport:
    """Run the selected checks in dependency order; a failed prerequisite
    marks its dependents blocked rather than running them."""
    start = time.perf_counter()
    m = build_model(cfg.model_spec)
    echo = _model_echo(m)
    selected = [c for c in CHECK_ORDER if c in cfg.checks]
    outcome: dict[str, str] = {}
    records: dict[str, CheckRecord] = {}

    def digest_for(name):
        return _digest({
            "check": name, "model": echo, "n_max": cfg.n_max, "seed": cfg.seed,
            "grid": [cfg.grid_lo, cfg.grid_hi, cfg.grid_points],
            "tolerance": cfg.tolerances[name],
        })

    def run_one(name):
        tol = cfg.tolerances[name]
        try:
            metric, detail = CHECK_FUNCS[name](m, cfg)
        except Exception as exc:  # report the failure, keep going
            return CheckRecord(name, digest_for(name), None, tol, "error",
                               {"error": f"{type(exc).__name__}: {exc}"})
        if metric is None:
            return CheckRecord(name, digest_for(name), None, tol, "skipped",
                               detail)
        verdict = "pass" if metric <= tol else "fail"
        return CheckRecord(name, digest_for(name), float(metric), tol,
                           verdict, detail)

    pending = list(selected)
    while pending:
        ready = [
            name for name in pending
            if BLOCKED_BY.get(name) not in pending  # prerequisite resolved
        ]
        runnable, blocked = [], []
        for name in ready:
            pre = BLOCKED_BY.get(name)
            if pre is not None and outcome.get(pre) in ("fail", "blocked",
                                                        "error"):
                blocked.append(name)
            else:
                runnable.append(name)
        for name in blocked:
            records[name] = CheckRecord(
                name, digest_for(name), None, cfg.tolerances[name], "blocked",
                {"blocked_by": BLOCKED_BY[name]})
            outcome[name] = "blocked"
        if runnable:
            if cfg.jobs > 1 and len(runnable) > 1:
                with concurrent.futures.ThreadPoolExecutor(cfg.jobs) as pool:
                    for name, rec in zip(runnable,
                                         pool.map(run_one, runnable)):
                        records[name] = rec
                        outcome[name] = rec.verdict
            else:
                for name in runnable:
                    rec = run_one(name)
                    records[name] = rec
                    outcome[name] = rec.verdict
        pending = [n for n in pending if n not in records]

    ordered = [records[name] for name in selected]
    bad = any(r.verdict in ("fail", "blocked", "error") for r in ordered)
    return VerificationReport(
        model=echo,
        records=ordered,
        overall="fail" if bad else "pass",
        timing_seconds=time.perf_counter() - start,
    )


# ----------------------------------------------------------------------
# CSV emission
# ----------------------------------------------------------------------

def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _write_csv(path: Path, header: list, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def cmd_states(cfg: RunConfig) -> list[Path]:
    """Tabulate both families on the grid, one CSV per side."""
    m = build_model(cfg.model_spec)
    states.fix_normalization(m)
    xs = cfg.grid
    paths = []
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    for side in ("phi", "psi"):
        fam = states.StateFamily(m, side, max_n=cfg.n_max)
        cols = [xs.astype(float)]
        header = ["x"]
        for n in range(cfg.n_max + 1):
            vals = fam.values(n, xs)
            cols.extend([vals.real, vals.imag])
            header.extend([f"{side}{n}_re", f"{side}{n}_im"])
        path = cfg.out_dir / f"states_{side}.csv"
        _write_csv(path, header, zip(*cols))
        paths.append(path)
    return paths


def _bicoherent_params(cfg: RunConfig) -> dict:
    bico = cfg.bicoherent
    def triple(key, default):
        raw = bico.get(key, default).split()
        if len(raw) != 3:
            raise ConfigError(f"bicoherent {key} needs 'lo hi count'")
        return float(raw[0]), float(raw[1]), int(raw[2])
    return {
        "z_re": triple("z_re", "-1.4 1.4 3"),
        "z_im": triple("z_im", "-1.4 1.4 3"),
        "bump_center": float(bico.get("bump_center", 0.0)),
        "bump_width": float(bico.get("bump_width", 1.0)),
        "bump2_center": float(bico.get("bump2_center", 0.2)),
        "bump2_width": float(bico.get("bump2_width", 0.8)),
        "resolution_radius": float(bico.get("resolution_radius", 6.0)),
        "radial_nodes": int(bico.get("radial_nodes", 96)),
        "angular_nodes": int(bico.get("angular_nodes", 0)) or None,
        "max_terms": int(bico.get("max_terms", 60)),
        "tolerance_eigen": float(bico.get("tolerance_eigen", 1e-8)),
        "tolerance_resolution": float(bico.get("tolerance_resolution", 1e-3)),
    }


def cmd_bicoherent(cfg: RunConfig) -> tuple[VerificationReport, list[Path]]:
    """Weak-pairing tables over a z-grid, eigen-relation residuals, and
    the resolution-of-identity comparison with its radius trace."""
    start = time.perf_counter()
    m = build_model(cfg.model_spec)
    states.fix_normalization(m)
    echo = _model_echo(m)
    p = _bicoherent_params(cfg)
    g = quad.TestFunction(center=p["bump_center"], width=p["bump_width"])
    f = quad.TestFunction(center=p["bump2_center"], width=p["bump2_width"])
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    paths = []

    re_lo, re_hi, re_n = p["z_re"]
    im_lo, im_hi, im_n = p["z_im"]
    z_grid = [complex(a, b)
              for a in np.linspace(re_lo, re_hi, re_n)
              for b in np.linspace(im_lo, im_hi, im_n)]

    phi_series = bc.PairingSeries(m, g, "phi", state_in_bra=True,
                                  max_terms=p["max_terms"])
    psi_series = bc.PairingSeries(m, g, "psi", state_in_bra=True,
                                  max_terms=p["max_terms"])
    rows = []
    for z in z_grid:
        vp = phi_series.eval(z, conjugate_z=True)
        vs = psi_series.eval(z, conjugate_z=True)
        rows.append((z.real, z.imag, vp.real, vp.imag, vs.real, vs.imag))
    path = cfg.out_dir / "pairings.csv"
    _write_csv(path, ["z_re", "z_im", "phi_re", "phi_im", "psi_re", "psi_im"],
               rows)
    paths.append(path)

    worst_eigen = 0.0
    rows = []
    for z in z_grid:
        res = bc.eigen_relation_residual(m, z, g, max_terms=p["max_terms"])
        if abs(z) > 0:
            worst_eigen = max(worst_eigen, res.relative_phi, res.relative_psi)
        rows.append((z.real, z.imag, abs(res.residual_phi),
                     abs(res.residual_psi), res.relative_phi,
                     res.relative_psi))
    path = cfg.out_dir / "eigen_relations.csv"
    _write_csv(path, ["z_re", "z_im", "abs_phi", "abs_psi",
                      "rel_phi", "rel_psi"], rows)
    paths.append(path)

    resolution = bc.resolution_of_identity(
        m, f, g, R=p["resolution_radius"], n_r=p["radial_nodes"],
        n_theta=p["angular_nodes"], max_terms=p["max_terms"])
    ref = resolution.reference
    rows = [
        (rr, vpp.real, vpp.imag, vpf.real, vpf.imag, ref.real, ref.imag,
         abs(vpp - ref), abs(vpf - ref))
        for rr, vpp, vpf in resolution.trace
    ]
    path = cfg.out_dir / "resolution.csv"
    _write_csv(path, ["radius", "phi_psi_re", "phi_psi_im", "psi_phi_re",
                      "psi_phi_im", "reference_re", "reference_im",
                      "deviation_phi_psi", "deviation_psi_phi"], rows)
    paths.append(path)

    records = [
        CheckRecord(
            "bicoherent_eigen_relations",
            _digest({"model": echo, "z": [[z.real, z.imag] for z in z_grid]}),
            worst_eigen, p["tolerance_eigen"],
            "pass" if worst_eigen <= p["tolerance_eigen"] else "fail",
            {"z_points": len(z_grid)},
        ),
        CheckRecord(
            "bicoherent_resolution",
            _digest({"model": echo, "R": p["resolution_radius"]}),
            max(resolution.deviation_phi_psi, resolution.deviation_psi_phi),
            p["tolerance_resolution"],
            "pass" if max(resolution.deviation_phi_psi,
                          resolution.deviation_psi_phi)
            <= p["tolerance_resolution"] else "fail",
            {"radius": p["resolution_radius"],
             "reference_re": ref.real, "reference_im": ref.imag},
        ),
    ]
    bad = any(r.verdict != "pass" for r in records)
    report = VerificationReport(
        model=echo, records=records,
        overall="fail" if bad else "pass",
        timing_seconds=time.perf_counter() - start,
    )
    return report, paths


def cmd_hamiltonian(cfg: RunConfig) -> tuple[VerificationReport, list[Path]]:
    """Coefficient tables of H and H^dag plus the printed-formula
    cross-check when one exists for the model."""
    start = time.perf_counter()
    m = build_model(cfg.model_spec)
    echo = _model_echo(m)
    xs = cfg.grid
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    header = ["x"]
    cols = [xs.astype(float)]
    for side, tags in (("H", ("k2", "k1", "k0")),
                       ("H_dag", ("q2", "q1", "q0"))):
        vals = spectral.hamiltonian_coeffs(m, side).values(xs)
        for tag, arr in zip(tags, vals):
            cols.extend([arr.real, arr.imag])
            header.extend([f"{tag}_re", f"{tag}_im"])
    path = cfg.out_dir / "hamiltonian.csv"
    _write_csv(path, header, zip(*cols))

    metric, detail = _check_hamiltonian_crosscheck(m, cfg)
    tol = cfg.tolerances["hamiltonian_crosscheck"]
    if metric is None:
        rec = CheckRecord("hamiltonian_crosscheck", _digest(echo), None, tol,
                          "skipped", detail)
        overall = "pass"
    else:
        verdict = "pass" if metric <= tol else "fail"
        rec = CheckRecord("hamiltonian_crosscheck", _digest(echo),
                          float(metric), tol, verdict, detail)
        overall = verdict
    report = VerificationReport(
        model=echo, records=[rec], overall=overall,
        timing_seconds=time.perf_counter() - start,
    )
    return report, [path]


# ----------------------------------------------------------------------
# Entry point
# ----------------------------------------------------------------------

def _env(name: str) -> Optional[str]:
    return os.environ.get(ENV_PREFIX + name)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pseudobosons",
        description="Build pseudo-bosonic ladder models and verify their "
                    "algebraic and integral identities.",
    )
    parser.add_argument("command",
                        choices=["check", "states", "bicoherent",
                                 "hamiltonian"])
    parser.add_argument("--config", default=_env("CONFIG"),
                        help="path to the INI run configuration")
    parser.add_argument("--out", default=_env("OUT"),
                        help="output directory (overrides config)")
    parser.add_argument("--tol-scale", type=float,
                        default=float(_env("TOL_SCALE") or 1.0),
                        help="multiply every tolerance by this factor")
    parser.add_argument("--jobs", type=int,
                        default=int(_env("JOBS") or 0) or None,
                        help="parallel workers for independent checks")
    args = parser.parse_args(argv)

    if not args.config:
        print("error: --config is required (or set "
              f"{ENV_PREFIX}CONFIG)", file=sys.stderr)
        return 2
    try:
        cfg = load_config(Path(args.config), out_override=args.out,
                          tol_scale=args.tol_scale,
                          jobs_override=args.jobs)
        if args.command == "check":
            report = cmd_check(cfg)
            cfg.out_dir.mkdir(parents=True, exist_ok=True)
            out = cfg.out_dir / "report.json"
            out.write_text(report.to_json(), encoding="utf-8")
            print(f"wrote {out}")
            for r in report.records:
                metric = "-" if r.metric is None else f"{r.metric:.3e}"
                print(f"  {r.name:<24} {r.verdict:<8} metric={metric}")
            return 0 if report.overall == "pass" else 1
        if args.command == "states":
            for path in cmd_states(cfg):
                print(f"wrote {path}")
            return 0
        if args.command == "bicoherent":
            report, paths = cmd_bicoherent(cfg)
            out = cfg.out_dir / "bicoherent_report.json"
            out.write_text(report.to_json(), encoding="utf-8")
            for path in paths + [out]:
                print(f"wrote {path}")
            return 0 if report.overall == "pass" else 1
        report, paths = cmd_hamiltonian(cfg)
        out = cfg.out_dir / "hamiltonian_report.json"
        out.write_text(report.to_json(), encoding="utf-8")
        for path in paths + [out]:
            print(f"wrote {path}")
        return 0 if report.overall == "pass" else 1
    except (ConfigError, configparser.Error) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
