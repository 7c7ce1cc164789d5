"""Command-line front end: ``ilc {eval,series,connect,verify,table}``.

Numbers are written as decimal strings at the working precision.  Precision is
taken from --precision, then the ILC_PRECISION environment variable, then 50.
Exit status is 0 when everything requested succeeded, 1 when a computation or
verification failed and 2 for usage errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field

from mpmath import mp, mpf

from . import connection as cx
from . import correlators as cr
from . import numerics
from . import painleve as pv
from . import verify as vf
from .errors import DomainError, ILCError

MIN_PRECISION = 30
CSV_HEADER = ["N", "t", "lambda", "method", "value", "est_error", "error"]


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    N: int | None = None
    t: str | None = None
    t_grid: list = field(default_factory=list)
    lam: str | None = None
    u: str | None = None
    method: str = "auto"
    precision: int = numerics.DEFAULT_DPS
    mcap: int = numerics.M_CAP
    nmax: int = 12
    radius: str | None = None
    mode: str = "logdet"
    basis: str = "laurent"
    fmt: str = "json"
    output: str | None = None
    suite: str | None = None
    order: int | None = None
    t0: str = "0.05"
    x_end: str = "1e-5"
    tol: str | None = None

    def __post_init__(self):
        if self.precision < MIN_PRECISION:
            raise UsageError(f"precision must be at least {MIN_PRECISION}, got {self.precision}")
        for t in self.t_grid:
            if not 0 < mpf(t) < 1:
                raise UsageError(f"t-grid point {t} must lie in (0, 1)")

    def lambda_value(self) -> mpf:
        if self.u is not None:
            return mp.cos(mpf(self.u))
        if self.lam is None:
            raise UsageError("one of --lambda or --u is required")
        return mpf(self.lam)

    def fredholm(self) -> cr.FredholmConfig:
        basis = "nystrom" if self.radius is not None else self.basis
        radius = None if self.radius is None else mpf(self.radius)
        return cr.FredholmConfig(radius=radius, mode=self.mode, n_max=self.nmax, basis=basis,
                                 M_cap=self.mcap)


# ---------------------------------------------------------------------------
# Rendering

def fmt_num(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, int):
        return str(x)
    x = mpf(x)
    if x == 0:
        return "0"
    return mp.nstr(x, mp.dps, strip_zeros=False)


def _plain(obj):
    """Turn nested results into JSON-ready values with numbers as decimal strings."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, cr.Method):
        return obj.value
    if isinstance(obj, (str, bool)) or obj is None:
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, (float, mpf)) or hasattr(obj, "_mpf_"):
        return fmt_num(obj)
    return str(obj)


def render_json(inputs: dict, results, diagnostics: dict) -> str:
    doc = {"inputs": _plain(inputs), "results": _plain(results), "diagnostics": _plain(diagnostics)}
    return json.dumps(doc, indent=2) + "\n"


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def emit(text: str, output: str | None):
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Commands

def _request(cfg: RunConfig, t) -> cr.CorrelatorRequest:
    if cfg.N is None:
        raise UsageError("--N is required")
    req = cr.CorrelatorRequest(cfg.N, mpf(t), cfg.lambda_value(), cr.Method(cfg.method), cfg.precision)
    try:
        cr.check_request(req)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    return req


def run_eval(cfg: RunConfig) -> int:
    if cfg.t is None:
        raise UsageError("--t is required")
    req = _request(cfg, cfg.t)
    val = cr.evaluate(req, cfg.fredholm())
    inputs = {"N": req.N, "t": req.t, "lambda": req.lam, "method": cfg.method, "precision": cfg.precision}
    if cfg.fmt == "csv":
        emit(render_csv(CSV_HEADER, [[req.N, fmt_num(req.t), fmt_num(req.lam), val.method.value,
                                      fmt_num(val.value), fmt_num(val.est_error), ""]]), cfg.output)
    else:
        emit(render_json(inputs, {"value": val.value, "est_error": val.est_error, "method": val.method},
                         val.diagnostics), cfg.output)
    return 0


def run_series(cfg: RunConfig) -> int:
    if cfg.N is None:
        raise UsageError("--N is required")
    lam = cfg.lambda_value()
    order = cfg.order if cfg.order is not None else cfg.N + 2
    if order < cfg.N + 1:
        raise UsageError("--order must be at least N + 1")
    coeffs = cr.small_t_expansion(cfg.N, lam, order, cfg.fredholm())
    lead = cr.bcm_coefficient(cfg.N)
    inputs = {"N": cfg.N, "lambda": lam, "order": order, "precision": cfg.precision}
    diag = {"leading_power": cfg.N + 1,
            "leading_expected": lam**2 * mpf(lead.numerator) / lead.denominator,
            "expansion_of": "C^-/(1-t)^(1/4)"}
    if cfg.fmt == "csv":
        emit(render_csv(["power", "coefficient"], [[i, fmt_num(c)] for i, c in enumerate(coeffs)]), cfg.output)
    else:
        emit(render_json(inputs, {"coefficients": coeffs}, diag), cfg.output)
    return 0


def run_connect(cfg: RunConfig) -> int:
    if cfg.N is None:
        raise UsageError("--N is required")
    lam = cfg.lambda_value()
    if not 0 < lam < 1:
        raise UsageError("connect requires lambda in (0, 1)")
    tol = None if cfg.tol is None else mpf(cfg.tol)
    traj, fit = pv.connect(cfg.N, lam, t0=mpf(cfg.t0), x_end=mpf(cfg.x_end), tol=tol)
    exact = cx.ConnectionConstants.from_lambda(cfg.N, lam)
    pairs = {"sigma": (fit.sigma_est, exact.sigma), "s": (fit.s_est, exact.s),
             "shat": (fit.shat_est, exact.shat), "K": (fit.K_est, exact.bigK)}
    results = {
        "fit": {k: v[0] for k, v in pairs.items()},
        "closed_form": {k: v[1] for k, v in pairs.items()},
        "abs_deviation": {k: abs(v[0] - v[1]) for k, v in pairs.items()},
        "rel_deviation": {k: abs(v[0] / v[1] - 1) for k, v in pairs.items()},
    }
    last = traj.states[-1]
    diag = {"steps": traj.diagnostics["steps"], "rejected": traj.diagnostics["rejected"],
            "max_sigma_residual": traj.diagnostics["max_residual"],
            "branch_flips": traj.diagnostics["branch_flips"], "t_end": last.t, "h_end": last.h,
            "fit_window": list(fit.fit_window), "fit_residual": fit.residual_norm,
            "fit_points": fit.diagnostics.get("points"), "K_source": fit.diagnostics.get("K_source")}
    inputs = {"N": cfg.N, "lambda": lam, "t0": mpf(cfg.t0), "x_end": mpf(cfg.x_end),
              "precision": cfg.precision}
    emit(render_json(inputs, results, diag), cfg.output)
    return 0


def run_verify(cfg: RunConfig) -> int:
    rep = vf.run_suite(cfg.suite)
    if cfg.fmt == "csv":
        rows = [[c.name, json.dumps(_plain(c.inputs), sort_keys=True), fmt_num(c.expected),
                 fmt_num(c.got), fmt_num(c.tolerance), "pass" if c.passed else "fail", c.note]
                for c in rep.cases]
        emit(render_csv(["case", "inputs", "expected", "got", "tolerance", "status", "note"], rows), cfg.output)
    else:
        cases = [{"name": c.name, "inputs": c.inputs, "expected": c.expected, "got": c.got,
                  "tolerance": c.tolerance, "pass": c.passed, **({"note": c.note} if c.note else {})}
                 for c in rep.cases]
        emit(render_json({"suite": cfg.suite, "precision": cfg.precision},
                         {"cases": cases, "summary": rep.summary()}, {}), cfg.output)
    return 0 if rep.ok else 1


def run_table(cfg: RunConfig) -> int:
    if not cfg.t_grid:
        raise UsageError("--t-grid is required")
    lam = cfg.lambda_value()
    fcfg = cfg.fredholm()
    rows, failures = [], 0
    for t in cfg.t_grid:
        req = _request(cfg, t)
        try:
            val = cr.evaluate(req, fcfg)
            rows.append([cfg.N, fmt_num(req.t), fmt_num(lam), val.method.value, fmt_num(val.value),
                         fmt_num(val.est_error), ""])
        except ILCError as exc:
            failures += 1
            rows.append([cfg.N, fmt_num(req.t), fmt_num(lam), cfg.method, "", "", f"{type(exc).__name__}: {exc}"])
    if cfg.fmt == "json":
        keys = CSV_HEADER
        emit(render_json({"N": cfg.N, "lambda": lam, "method": cfg.method, "precision": cfg.precision},
                         {"rows": [dict(zip(keys, r)) for r in rows]}, {"failures": failures}), cfg.output)
    else:
        emit(render_csv(CSV_HEADER, rows), cfg.output)
    return 1 if failures else 0


COMMANDS = {"eval": run_eval, "series": run_series, "connect": run_connect,
            "verify": run_verify, "table": run_table}


# ---------------------------------------------------------------------------
# Argument parsing

def parse_t_grid(spec: str) -> list:
    """'a:b:n' (n equally spaced points, inclusive) or a comma-separated list."""
    spec = spec.strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise UsageError(f"bad --t-grid {spec!r}; expected lo:hi:n")
        lo, hi, n = mpf(parts[0]), mpf(parts[1]), int(parts[2])
        if n < 1:
            raise UsageError("--t-grid needs at least one point")
        if n == 1:
            return [parts[0]]
        return [fmt_num(lo + (hi - lo) * i / (n - 1)) for i in range(n)]
    return [p.strip() for p in spec.split(",") if p.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, default=None, help="working precision in decimal digits")
    common.add_argument("--format", dest="fmt", choices=["json", "csv"], default=None)
    common.add_argument("--output", default=None, help="write to this file instead of stdout")

    point = argparse.ArgumentParser(add_help=False)
    point.add_argument("--N", type=int, default=None)
    lam = point.add_mutually_exclusive_group()
    lam.add_argument("--lambda", dest="lam", default=None)
    lam.add_argument("--u", default=None, help="lambda = cos(u)")

    method = argparse.ArgumentParser(add_help=False)
    method.add_argument("--method", choices=[m.value for m in cr.Method], default="auto")
    method.add_argument("--mcap", type=int, default=numerics.M_CAP, help="cap on quadrature/Nystrom points")
    method.add_argument("--nmax", type=int, default=12, help="terms kept in trace mode")
    method.add_argument("--radius", default=None, help="Nystrom contour radius (selects the Nystrom basis)")
    method.add_argument("--mode", choices=["logdet", "trace"], default="logdet")
    method.add_argument("--basis", choices=["laurent", "nystrom"], default="laurent")

    p = argparse.ArgumentParser(prog="ilc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    e = sub.add_parser("eval", parents=[common, point, method], help="evaluate C^-(N, t; lambda)")
    e.add_argument("--t", default=None)
    s = sub.add_parser("series", parents=[common, point, method], help="small-t Taylor coefficients")
    s.add_argument("--order", type=int, default=None)
    c = sub.add_parser("connect", parents=[common, point], help="integrate Painleve VI and fit sigma, shat, K")
    c.add_argument("--t0", default="0.05")
    c.add_argument("--x-end", dest="x_end", default="1e-5")
    c.add_argument("--tol", default=None)
    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite", choices=sorted(vf.SUITES))
    tb = sub.add_parser("table", parents=[common, point, method], help="tabulate C^- on a t grid")
    tb.add_argument("--t-grid", dest="t_grid", default=None, help="lo:hi:n or comma list")
    return p


def _precision(arg) -> int:
    if arg is not None:
        return arg
    env = os.environ.get("ILC_PRECISION")
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError(f"ILC_PRECISION must be an integer, got {env!r}") from exc
    return numerics.DEFAULT_DPS


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    prec = _precision(ns.precision)
    fmt = ns.fmt or ("csv" if ns.command == "table" else "json")
    kw = {k: v for k, v in vars(ns).items()
          if k in RunConfig.__dataclass_fields__ and k not in ("precision", "fmt", "t_grid")}
    with mp.workdps(max(prec, MIN_PRECISION)):
        grid = parse_t_grid(ns.t_grid) if getattr(ns, "t_grid", None) else []
    return RunConfig(precision=prec, fmt=fmt, t_grid=grid, **kw)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        with numerics.precision(cfg.precision):
            return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        parser.error(str(exc))
    except (ILCError, ValueError, ZeroDivisionError) as exc:
        print(f"ilc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
