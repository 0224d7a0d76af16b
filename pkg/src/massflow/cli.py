"""Command-line front end.

Every command builds one JSON document ``{command, config, report, checks,
exit_status}``.  With ``--out DIR`` it is written to ``DIR/report.json``
together with a CSV table and (unless ``--no-figures``) a PNG figure;
otherwise it goes to stdout.

Exit status: 0 when every check passes, 2 when a hypothesis check fails,
1 when any other check fails or the run raises.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

CONFIG_VERSION = 1
COMMANDS = ("mass", "half-mass", "conformal-check", "solve-harmonic", "check-inequality",
            "appendix-check")
DEFAULT_LAMBDAS = {"conformal-check": [0.0, 0.25, 0.5, 0.75, 1.0]}
DEFAULT_RESOLUTION = {"solve-harmonic": [32, 24, 48], "check-inequality": [40, 24, 48]}


class ConfigError(ValueError):
    """Invalid run configuration."""


@dataclass
class RunConfig:
    command: str
    chart: str = "euclidean"
    M: float | None = None
    Q: float | None = None
    kind: str = "full"
    factor: str = "one"
    lambdas: list = field(default_factory=lambda: [0.0])
    radii: list | None = None
    resolution: list | None = None
    outer_radius: float | None = None
    inner_condition: str = "auto"
    tol: float = 1e-4
    seed: int = 0
    out: str | None = None
    figures: bool = True
    version: int = CONFIG_VERSION

    def validate(self) -> "RunConfig":
        if self.version != CONFIG_VERSION:
            raise ConfigError(f"unsupported config version {self.version}")
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.kind not in ("full", "half"):
            raise ConfigError("kind must be 'full' or 'half'")
        if self.inner_condition not in ("auto", "neumann", "dirichlet"):
            raise ConfigError("inner_condition must be auto, neumann or dirichlet")
        if not self.lambdas or any(not 0.0 <= float(v) <= 1.0 for v in self.lambdas):
            raise ConfigError("lambda values must lie in [0, 1]")
        self.lambdas = [float(v) for v in self.lambdas]
        if self.radii is not None:
            self.radii = [float(r) for r in self.radii]
            if len(self.radii) < 3 or any(b <= a for a, b in zip(self.radii, self.radii[1:])):
                raise ConfigError("radii must be at least 3 strictly increasing values")
        if self.resolution is not None:
            self.resolution = [int(n) for n in self.resolution]
            if len(self.resolution) != 3:
                raise ConfigError("resolution needs three integers n_r,n_theta,n_phi")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        return self

    def report_dict(self) -> dict:
        d = asdict(self)
        d.pop("out")
        d.pop("figures")
        return d


def _floats(text):
    return [float(x) for x in str(text).split(",") if x.strip()]


def _ints(text):
    return [int(x) for x in str(text).split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    common.add_argument("--out", help="output directory for report.json, CSV and figures")
    common.add_argument("--no-figures", dest="figures", action="store_const", const=False,
                        default=None, help="skip PNG figures")
    common.add_argument("--chart", help="chart spec, e.g. schwarzschild_isotropic(1)")
    common.add_argument("--M", type=float, help="mass parameter for bare chart names")
    common.add_argument("--Q", type=float, help="charge parameter for bare chart names")
    common.add_argument("--kind", choices=("full", "half"))
    common.add_argument("--factor", help="conformal factor spec, e.g. half_over_r(1)")
    common.add_argument("--lambda", dest="lambdas", type=_floats,
                        help="comma separated lambda values")
    common.add_argument("--radii", type=_floats, help="comma separated sphere radii")
    common.add_argument("--resolution", type=_ints, help="n_r,n_theta,n_phi")
    common.add_argument("--outer-radius", dest="outer_radius", type=float)
    common.add_argument("--inner-condition", dest="inner_condition",
                        choices=("auto", "neumann", "dirichlet"))
    common.add_argument("--tol", type=float, help="tolerance for mass and slack checks")
    common.add_argument("--seed", type=int, help="seed for sampled test points")
    parser = argparse.ArgumentParser(prog="massflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {"mass": "ADM mass by sphere quadrature and extrapolation",
             "half-mass": "half-space mass (hemisphere plus circle terms)",
             "conformal-check": "curvature laws and mass linearity along g_lambda",
             "solve-harmonic": "solve for the harmonic function asymptotic to a coordinate",
             "check-inequality": "both sides of the mass inequality and their slack",
             "appendix-check": "static charged dilaton black hole residual suites"}
    for c in COMMANDS:
        sub.add_parser(c, parents=[common], help=helps[c])
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    data = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        if "lambda" in data:
            data["lambdas"] = data.pop("lambda")
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    data["command"] = args.command
    for k in known - {"command", "version"}:
        v = getattr(args, k, None)
        if v is not None:
            data[k] = v
    if "lambdas" not in data and args.command in DEFAULT_LAMBDAS:
        data["lambdas"] = DEFAULT_LAMBDAS[args.command]
    if "resolution" not in data and args.command in DEFAULT_RESOLUTION:
        data["resolution"] = DEFAULT_RESOLUTION[args.command]
    return RunConfig(**data).validate()


# ---------------------------------------------------------------------------
# results


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to ``None``."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


class Result:
    def __init__(self):
        self.report = {}
        self.checks = {}
        self.rows = []
        self.columns = []
        self.figure = None      # callable(path) or None
        self.extra_files = {}   # name -> text

    def check(self, name, value, tolerance, passed, hypothesis=False):
        self.checks[name] = {"value": value, "tolerance": tolerance, "passed": bool(passed),
                             "kind": "hypothesis" if hypothesis else "check"}

    def exit_status(self) -> int:
        if any(not c["passed"] and c["kind"] == "hypothesis" for c in self.checks.values()):
            return 2
        if any(not c["passed"] for c in self.checks.values()):
            return 1
        return 0


def _csv_text(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow(["" if r[c] is None else (repr(float(r[c])) if isinstance(r[c], float) else r[c])
                    for c in columns])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands


def _chart(cfg, kind=None):
    from .registry import parse_chart
    return parse_chart(cfg.chart, cfg.M, cfg.Q, _kind(kind or cfg.kind))


def _kind(k):
    from .geometry import FULL, HALF
    return HALF if k == "half" else FULL


def _mass_result(cfg, half):
    from .mass import MASS_COLUMNS, half_space_mass, adm_mass, NOT_ASYMPTOTIC
    from .plotting import plot_mass
    chart = _chart(cfg, "half" if half else "full")
    rep = (half_space_mass if half else adm_mass)(chart, cfg.radii)
    res = Result()
    res.report = dict(rep.to_dict(), flags=list(rep.flags), chart=chart.name)
    res.columns = list(MASS_COLUMNS)
    res.rows = [{c: getattr(s, c) for c in MASS_COLUMNS} for s in rep.samples]
    res.check("error_estimate", rep.error_estimate, cfg.tol, rep.error_estimate <= cfg.tol)
    res.check("asymptotic_regime", float(NOT_ASYMPTOTIC in rep.flags), 0.0,
              NOT_ASYMPTOTIC not in rep.flags)
    res.figure = lambda p: plot_mass(rep, p, title=chart.name)
    return res


def cmd_mass(cfg):
    return _mass_result(cfg, half=False)


def cmd_half_mass(cfg):
    return _mass_result(cfg, half=True)


def _shell_points(chart, n, rng):
    d = rng.normal(size=(n, 3))
    d /= np.linalg.norm(d, axis=1)[:, None]
    if chart.is_half:
        d[:, 2] = np.abs(d[:, 2])
    return d * rng.uniform(1.5, 10.0, size=(n, 1)) * chart.inner_radius


def cmd_conformal_check(cfg):
    from .conformal import (ConformalFamily, conformal_mass_delta, mean_curvature_lambda,
                            scalar_curvature_lambda, validate_conformal_hypotheses)
    from .geometry import CoordinatePlane, CoordinateSphere, mean_curvature, scalar_curvature
    from .mass import adm_mass, half_space_mass
    from .plotting import plot_lambda
    from .registry import parse_factor
    full = _chart(cfg, "full")
    half = full.with_kind(_kind("half"))
    factor = parse_factor(cfg.factor, full.inner_radius)
    rng = np.random.default_rng(cfg.seed)
    p_full = _shell_points(full, 100, rng)
    phi = rng.uniform(0, 2 * np.pi, 40)
    rho = full.inner_radius * rng.uniform(1.5, 10.0, 40)
    p_plane = np.stack([rho * np.cos(phi), rho * np.sin(phi), np.zeros_like(rho)], axis=-1)
    d = _shell_points(half, 40, rng)
    p_inner = full.inner_radius * d / np.linalg.norm(d, axis=1)[:, None]
    sphere = CoordinateSphere(full.inner_radius)

    res = Result()
    rows = []
    worst_R = worst_H = 0.0
    for lam in cfg.lambdas:
        fam = ConformalFamily(full, factor, lam)
        famh = ConformalFamily(half, factor, lam)
        a = scalar_curvature_lambda(fam, p_full)
        b = scalar_curvature(fam.at_lambda, p_full)
        errR = float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1.0)))
        hs = mean_curvature_lambda(famh, CoordinatePlane(), p_plane)
        hd = mean_curvature(famh.at_lambda, CoordinatePlane(), p_plane)
        hi = mean_curvature_lambda(fam, sphere, p_inner)
        hid = mean_curvature(fam.at_lambda, sphere, p_inner)
        errH = float(max(np.max(np.abs(hs - hd)), np.max(np.abs(hi - hid))))
        worst_R, worst_H = max(worst_R, errR), max(worst_H, errH)
        mf = adm_mass(fam.at_lambda, cfg.radii)
        mh = half_space_mass(famh.at_lambda, cfg.radii)
        rows.append({"lambda": lam, "mass": mf.extrapolated, "mass_error": mf.error_estimate,
                     "half_mass": mh.extrapolated, "half_mass_error": mh.error_estimate,
                     "scalar_law_error": errR, "mean_law_error": errH,
                     "max_abs_H_lambda_inner": float(np.max(np.abs(hid)))})
    m0 = adm_mass(full, cfg.radii).extrapolated
    m1 = adm_mass(ConformalFamily(full, factor, 1.0).prime, cfg.radii).extrapolated
    h0 = half_space_mass(half, cfg.radii).extrapolated
    h1 = half_space_mass(ConformalFamily(half, factor, 1.0).prime, cfg.radii).extrapolated
    lin = max(max(abs(r["mass"] - (1 - r["lambda"]) * m0 - r["lambda"] * m1),
                  abs(r["half_mass"] - (1 - r["lambda"]) * h0 - r["lambda"] * h1)) for r in rows)
    delta_full = conformal_mass_delta(factor, cfg.radii, "full", inner_radius=full.inner_radius)
    delta_half = conformal_mass_delta(factor, cfg.radii, "half", inner_radius=full.inner_radius)
    val = validate_conformal_hypotheses(factor, full)
    valh = validate_conformal_hypotheses(factor, half)
    res.report = {"chart": full.name, "factor": factor.name, "factor_params": factor.params,
                  "rows": rows, "mass_base": m0, "mass_prime": m1, "half_mass_base": h0,
                  "half_mass_prime": h1, "mass_delta_full": delta_full.to_dict(),
                  "mass_delta_half": delta_half.to_dict(),
                  "hypotheses_full": val.to_dict(), "hypotheses_half": valh.to_dict(),
                  "mean_curvature_convention": "H = div(nu), nu pointing out of the exterior region"}
    res.check("scalar_law", worst_R, 1e-6, worst_R < 1e-6)
    res.check("mean_curvature_law", worst_H, 1e-6, worst_H < 1e-6)
    res.check("mass_linearity", lin, cfg.tol, lin < cfg.tol)
    dfull = abs(delta_full.extrapolated - (m1 - m0))
    res.check("mass_delta_matches", dfull, cfg.tol, dfull < cfg.tol)
    for c in val.checks:
        res.check(f"hypothesis_{c.name}", c.value, c.threshold, c.passed, hypothesis=True)
    res.rows, res.columns = rows, list(rows[0])
    res.figure = lambda p: plot_lambda(rows, p, ("mass", "half_mass"), f"{full.name}, {factor.name}")
    return res


def _inner_condition(cfg, fam, kind):
    if cfg.inner_condition != "auto":
        return cfg.inner_condition
    from .geometry import CoordinateSphere, mean_curvature
    from .quadrature import sphere_rule
    chart = fam.at_lambda.with_kind(kind)
    nodes = chart.inner_radius * sphere_rule(8, 16, hemisphere=chart.is_half).nodes
    H = mean_curvature(chart, CoordinateSphere(chart.inner_radius), nodes)
    # a non-minimal inner sphere cannot carry the Neumann problem; use the test mode
    return "neumann" if float(np.max(np.abs(H))) < 1e-8 else "dirichlet"


def cmd_solve_harmonic(cfg):
    from .conformal import ConformalFamily
    from .harmonic import DomainSpec, assemble_operator, build_grid, residual_report, solve
    from .plotting import plot_field
    from .registry import parse_factor
    kind = _kind(cfg.kind)
    base = _chart(cfg)
    lam = cfg.lambdas[0]
    fam = ConformalFamily(base, parse_factor(cfg.factor, base.inner_radius), lam)
    chart = fam.at_lambda.with_kind(kind)
    ic = _inner_condition(cfg, fam, kind)
    outer = cfg.outer_radius or 64.0 * chart.inner_radius
    spec = DomainSpec(kind, chart.inner_radius, outer)
    grid = build_grid(spec, cfg.resolution)
    system = assemble_operator(grid, chart, ic)
    w = solve(system)
    rr = residual_report(w, chart, system)
    res = Result()
    res.report = {"chart": chart.name, "lambda": lam, "inner_condition": ic,
                  "grid": grid.metadata(), "counts": grid.counts(),
                  "solver": {"iterations": w.info.iterations, "method": w.info.method,
                             "relative_residual": w.info.relative_residual},
                  "residuals": rr, "field_file": "field.txt"}
    res.check("solver_residual", w.info.relative_residual, 1e-10, w.info.relative_residual < 1e-10)
    if grid.is_half:
        res.check("sigma_gradient_nonzero", rr["min_sigma_gradient"], 0.0,
                  rr["min_sigma_gradient"] > 0)
    n_r, n_t, n_p = grid.shape
    res.columns = ["r", "theta", "w", "deviation"]
    res.rows = [{"r": float(grid.r[i]), "theta": float(grid.theta[j]),
                 "w": float(w.values[i, j, 0]), "deviation": float(w.v[i, j, 0])}
                for i in range(n_r) for j in range(n_t)]
    res.extra_files["field.txt"] = w.to_text()
    res.figure = lambda p: plot_field(w, p)
    return res


def cmd_check_inequality(cfg):
    from .conformal import ConformalFamily
    from .inequality import solve_and_report
    from .plotting import plot_lambda
    from .registry import parse_factor
    kind = _kind(cfg.kind)
    base = _chart(cfg)
    factor = parse_factor(cfg.factor, base.inner_radius)
    res = Result()
    rows, reports = [], []
    for lam in cfg.lambdas:
        fam = ConformalFamily(base, factor, lam)
        ic = _inner_condition(cfg, fam, kind)
        rep, _, _ = solve_and_report(fam, kind, cfg.resolution, cfg.outer_radius, ic, cfg.radii)
        d = rep.to_dict()
        reports.append(dict(d, **{"lambda": lam, "inner_condition": ic,
                                  "rhs_drift": rep.details.get("rhs_drift")}))
        rows.append({"lambda": lam, **{k: d[k] for k in ("lhs_mass", "lhs_error", "rhs_bulk",
                                                          "rhs_boundary", "slack")}})
        tag = f"[lambda={lam:g}]"
        res.check(f"slack{tag}", rep.slack, -cfg.tol, rep.slack >= -cfg.tol)
        res.check(f"truncation{tag}", rep.details.get("rhs_drift"), 0.01, not rep.truncation_flag)
        res.check(f"hypothesis_scalar{tag}", rep.hypothesis_min_scalar, -1e-9,
                  rep.hypothesis_min_scalar >= -1e-9, hypothesis=True)
        if cfg.kind == "half":
            res.check(f"hypothesis_mean{tag}", rep.hypothesis_min_mean, -1e-9,
                      rep.hypothesis_min_mean >= -1e-9, hypothesis=True)
    res.report = {"chart": base.name, "factor": factor.name, "kind": kind,
                  "mean_curvature_convention": "H = div(nu), nu pointing out of the exterior region",
                  "reports": reports}
    res.rows, res.columns = rows, list(rows[0])
    res.figure = lambda p: plot_lambda(rows, p, ("lhs_mass", "rhs_bulk", "slack"),
                                       f"{base.name}, {factor.name}, {cfg.kind}")
    return res


def cmd_appendix_check(cfg):
    from .plotting import plot_residuals
    from .staticfields import appendix_check
    M = 1.0 if cfg.M is None else cfg.M
    Q = 0.5 if cfg.Q is None else cfg.Q
    out = appendix_check(M, Q)
    res = Result()
    res.report = out
    for k, c in out["checks"].items():
        res.check(k, c["value"], c["tolerance"], c["passed"])
    res.check("positivity", min(out["positivity"].values()), 0.0, out["positivity_passed"])
    res.columns = ["check", "value", "tolerance", "passed"]
    res.rows = [{"check": k, "value": c["value"], "tolerance": c["tolerance"],
                 "passed": c["passed"]} for k, c in out["checks"].items()]
    res.figure = lambda p: plot_residuals(out["checks"], p, f"appendix M={M:g} Q={Q:g}")
    return res


HANDLERS = {"mass": cmd_mass, "half-mass": cmd_half_mass,
            "conformal-check": cmd_conformal_check, "solve-harmonic": cmd_solve_harmonic,
            "check-inequality": cmd_check_inequality, "appendix-check": cmd_appendix_check}


# ---------------------------------------------------------------------------
# driver


def _threads():
    n = os.environ.get("MASSFLOW_THREADS")
    if not n:
        return None
    try:
        n = int(n)
    except ValueError as exc:
        raise ConfigError("MASSFLOW_THREADS must be an integer") from exc
    if n < 1:
        raise ConfigError("MASSFLOW_THREADS must be positive")
    return n


def run(cfg: RunConfig) -> tuple[int, dict]:
    """Execute one command; returns ``(exit_status, document)`` and writes files."""
    from threadpoolctl import threadpool_limits
    n = _threads()
    if n is None:
        res = HANDLERS[cfg.command](cfg)
    else:
        with threadpool_limits(limits=n):
            res = HANDLERS[cfg.command](cfg)
    status = res.exit_status()
    doc = _clean({"command": cfg.command, "config": cfg.report_dict(), "report": res.report,
                  "checks": res.checks, "exit_status": status})
    text = json.dumps(doc, indent=2) + "\n"
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(text, encoding="utf-8")
        stem = cfg.command.replace("-", "_")
        if res.rows:
            (out / f"{stem}.csv").write_text(_csv_text(res.columns, _clean(res.rows)),
                                             encoding="utf-8")
        for name, body in res.extra_files.items():
            (out / name).write_text(body, encoding="utf-8")
        if cfg.figures and res.figure is not None:
            res.figure(out / f"{stem}.png")
    else:
        sys.stdout.write(text)
    return status, doc


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        status, _ = run(cfg)
    except Exception as exc:  # every failure maps to exit status 1
        print(f"massflow {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return status


if __name__ == "__main__":
    sys.exit(main())
