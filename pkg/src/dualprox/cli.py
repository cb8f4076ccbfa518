"""Command-line front end.

Subcommands: ``run`` a solver and emit the per-iteration CSV trace,
``verify`` the full certificate suite against a reference optimum,
``compare`` several configurations on one problem (long-format CSV plus an
optional log-log figure), and ``rates`` to fit empirical decay exponents
from trace CSVs.

Exit codes: 0 success / all certificates pass, 1 certificate failure,
2 usage or configuration error, 3 runtime abort (partial trace flushed).
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .core import DualProxError
from .diagnostics import (ABS_SLACK, REL_SLACK, BoundCertificate,
                          certificate_suite, fit_rate)
from .problems import (BUILTIN_NAMES, builtin_problem, load_problem_file,
                       parse_vector, reference_solve)
from .schedules import make_schedule
from .solvers import (SolverAbort, SolverReport, backtracking_step,
                      fixed_step, run_solver)

__all__ = ["RunConfig", "main"]

TRACE_COLUMNS = ("k", "L", "t", "T", "dual_val", "primal_val", "pg_norm",
                 "step_norm", "pd_gap", "infeas")


def _fmt(x) -> str:
    """Full round-trip decimal formatting (17 significant digits)."""
    return format(float(x), ".17g")


class ConfigError(DualProxError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """One solver invocation, normalizable to a plain key = value file."""

    problem: str = "tv1d-toy"
    method: str = "dpg"
    schedule: str = "fista"
    a: float = 3.0
    N: int = 100
    step: str = "fixed"          # fixed | backtrack
    fixed_L: float | None = None
    L0: float | None = None
    eta: float = 2.0
    iters: int = 100
    tol: float = 0.0
    y0: str = "zero"
    seed: int = 0
    certs: bool = False
    ref: str = "enumerate"

    def normalized(self) -> "RunConfig":
        cfg = replace(
            self, problem=self.problem.strip(), method=self.method.lower(),
            schedule=self.schedule.replace("-", "_").lower(),
            step=self.step.lower(), y0=self.y0.strip(),
            ref=self.ref.lower(), a=float(self.a), N=int(self.N),
            eta=float(self.eta), iters=int(self.iters), tol=float(self.tol),
            seed=int(self.seed), certs=bool(self.certs),
            fixed_L=None if self.fixed_L is None else float(self.fixed_L),
            L0=None if self.L0 is None else float(self.L0))
        if cfg.method not in ("dpg", "fdpg", "gfdpg"):
            raise ConfigError(f"unknown method '{cfg.method}'")
        if cfg.step not in ("fixed", "backtrack"):
            raise ConfigError(f"unknown step rule '{cfg.step}'")
        if cfg.ref not in ("enumerate", "longrun"):
            raise ConfigError(f"unknown reference mode '{cfg.ref}'")
        if cfg.iters < 0:
            raise ConfigError("iters must be >= 0")
        return cfg

    def to_lines(self) -> list[str]:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                text = "none"
            elif isinstance(v, bool):
                text = "true" if v else "false"
            elif isinstance(v, float):
                text = _fmt(v)
            else:
                text = str(v)
            out.append(f"{f.name} = {text}")
        return out

    @classmethod
    def from_mapping(cls, kv: dict) -> "RunConfig":
        kwargs = {}
        casts = {f.name: f for f in fields(cls)}
        for key, raw in kv.items():
            if key not in casts:
                raise ConfigError(f"unknown config key '{key}'")
            if raw == "none":
                kwargs[key] = None
            elif key in ("a", "eta", "tol", "fixed_L", "L0"):
                kwargs[key] = float(raw)
            elif key in ("N", "iters", "seed"):
                kwargs[key] = int(raw)
            elif key == "certs":
                kwargs[key] = raw.strip().lower() in ("true", "1", "yes")
            else:
                kwargs[key] = raw
        return cls(**kwargs).normalized()

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        kv = {}
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            kv[key.strip()] = value.strip()
        return cls.from_mapping(kv)


def _build_problem(cfg: RunConfig):
    if cfg.problem.lower() in BUILTIN_NAMES:
        return builtin_problem(cfg.problem, seed=cfg.seed)
    if os.path.exists(cfg.problem):
        return load_problem_file(cfg.problem)
    raise ConfigError(f"problem '{cfg.problem}' is neither a builtin "
                      f"({', '.join(BUILTIN_NAMES)}) nor a spec file")


def _solve(cfg: RunConfig, problem, cert_mode=None) -> SolverReport:
    schedule = None
    if cfg.method == "gfdpg":
        schedule = make_schedule(cfg.schedule, a=cfg.a, N=cfg.N)
    if cfg.step == "fixed":
        rule = fixed_step(cfg.fixed_L)
    else:
        rule = backtracking_step(cfg.L0, cfg.eta)
    if cfg.y0 == "zero":
        y0 = None
    else:
        y0 = parse_vector(Path(cfg.y0).read_text().strip())
    return run_solver(problem, cfg.method, schedule=schedule, step_rule=rule,
                      y0=y0, max_iters=cfg.iters, pg_tol=cfg.tol,
                      cert_mode=cfg.certs if cert_mode is None else cert_mode)


def write_trace_csv(report: SolverReport, path):
    lines = [",".join(TRACE_COLUMNS)]
    for r in report.records:
        lines.append(",".join([
            str(r.k), _fmt(r.L), _fmt(r.t), _fmt(r.T), _fmt(r.dual_val),
            _fmt(r.primal_val), _fmt(r.pg_norm), _fmt(r.step_norm),
            _fmt(r.pd_gap), _fmt(r.infeas)]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_trace_csv(path) -> list[dict]:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ConfigError(f"{path}: empty trace")
    header = lines[0].split(",")
    rows = []
    for line in lines[1:]:
        if not line.strip():
            continue
        rows.append(dict(zip(header, line.split(","))))
    return rows


def _schedule_label(cfg: RunConfig) -> str:
    if cfg.method == "dpg":
        return "-"
    if cfg.method == "fdpg":
        return "fista"
    if cfg.schedule == "poly":
        return f"poly(a={cfg.a:g})"
    if cfg.schedule == "fixed_horizon":
        return f"fixed_horizon(N={cfg.N})"
    return cfg.schedule


def cmd_run(cfg: RunConfig, out, svg=None) -> int:
    problem = _build_problem(cfg)
    try:
        report = _solve(cfg, problem)
    except SolverAbort as exc:
        if out:
            write_trace_csv(exc.report, out)
        print(f"error: {exc}", file=sys.stderr)
        return 3
    if out:
        write_trace_csv(report, out)
    print(f"{cfg.method} on {problem.name or cfg.problem}: "
          f"{report.iterations} iterations, termination {report.termination}")
    if svg:
        from .plotting import save_loglog
        ks = [r.k for r in report.records]
        series = [("step_norm", ks, [r.step_norm for r in report.records])]
        if report.cert_mode:
            series.append(("pg_norm", ks, [r.pg_norm for r in report.records]))
        save_loglog(series, svg, title=f"{cfg.method} on {cfg.problem}")
    return 0


def _rescale_bound(cert: BoundCertificate, factor: float,
                   extra_abs: float) -> BoundCertificate:
    if cert.passed is None:
        return cert
    bound = cert.bound * factor
    passed = (cert.measured <= bound * (1.0 + REL_SLACK) + ABS_SLACK
              + extra_abs)
    return BoundCertificate(cert.bound_id, cert.k, bound, cert.measured,
                            bound - cert.measured, passed, cert.note,
                            cert.snapshot)


def cmd_verify(cfg: RunConfig, out, scale_bounds: float = 1.0) -> int:
    problem = _build_problem(cfg)
    ref = reference_solve(problem, mode=cfg.ref)
    try:
        report = _solve(cfg, problem, cert_mode=True)
    except SolverAbort as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    certs = certificate_suite(report, ref)
    if scale_bounds != 1.0:
        certs = [_rescale_bound(c, scale_bounds, ref.extra_slack())
                 for c in certs]
    notice = "slack-widened-to-10x-residual" if ref.low_precision else ""
    header = "bound_id,k,bound,measured,margin,pass"
    if notice:
        header += ",notice"
    lines = [header]
    for c in certs:
        if c.passed is None:
            row = f"{c.bound_id},{c.k},NA,NA,NA,NA"
        else:
            row = (f"{c.bound_id},{c.k},{_fmt(c.bound)},{_fmt(c.measured)},"
                   f"{_fmt(c.margin)},{1 if c.passed else 0}")
        if notice:
            row += f",{notice}"
        lines.append(row)
    if out:
        Path(out).write_text("\n".join(lines) + "\n")
    failures = sum(1 for c in certs if c.passed is False)
    passes = sum(1 for c in certs if c.passed is True)
    nas = sum(1 for c in certs if c.passed is None)
    print(f"reference: {ref.provenance}, residual {ref.residual:.3e}, "
          f"optimal dual value {_fmt(-ref.q_tilde_star)} "
          f"(negated form {_fmt(ref.q_tilde_star)})")
    if notice:
        print(f"notice: low-precision reference, {notice}")
    print(f"certificates: {passes} pass, {failures} fail, {nas} NA")
    return 1 if failures else 0


def cmd_compare(config_paths, out, svg=None) -> int:
    if len(config_paths) < 2:
        print("error: compare needs at least two config files", file=sys.stderr)
        return 2
    cfgs = [RunConfig.from_file(p) for p in config_paths]
    key = {(c.problem, c.seed) for c in cfgs}
    if len(key) != 1:
        print("error: compare configs must share one problem (and seed)",
              file=sys.stderr)
        return 2
    problem = _build_problem(cfgs[0])
    lines = ["method,schedule,k,metric,value"]
    curves = []
    for cfg in cfgs:
        report = _solve(cfg, problem)
        label = _schedule_label(cfg)
        for r in report.records:
            for metric in ("dual_val", "primal_val", "pg_norm", "step_norm",
                           "pd_gap", "infeas"):
                lines.append(f"{cfg.method},{label},{r.k},{metric},"
                             f"{_fmt(getattr(r, metric))}")
        ks = [r.k for r in report.records]
        if report.cert_mode:
            vals = np.minimum.accumulate([r.pg_norm for r in report.records])
            curves.append((f"{cfg.method} {label} min pg_norm", ks, vals))
        else:
            curves.append((f"{cfg.method} {label} step_norm", ks,
                           [r.step_norm for r in report.records]))
    if out:
        Path(out).write_text("\n".join(lines) + "\n")
    if svg:
        from .plotting import save_loglog
        save_loglog(curves, svg, title=f"comparison on {cfgs[0].problem}")
    print(f"compared {len(cfgs)} configurations on {cfgs[0].problem}")
    return 0


def cmd_rates(paths, metric, window, qstar=None, out=None) -> int:
    base = metric[4:] if metric.startswith("min:") else metric
    lines = ["file,metric,slope,residual"]
    for path in paths:
        rows = read_trace_csv(path)
        if base == "dual_gap":
            if qstar is None:
                print("error: metric dual_gap needs --qstar (the optimal "
                      "negated dual value)", file=sys.stderr)
                return 2
            for row in rows:
                row["dual_gap"] = str(float(row["dual_val"]) - qstar)
        elif rows and base not in rows[0]:
            print(f"error: {path}: no column '{base}'", file=sys.stderr)
            return 2
        try:
            fit = fit_rate(rows, metric, window)
        except ValueError as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            return 2
        lines.append(f"{path},{metric},{fit.slope:.4f},{fit.residual:.4f}")
        if fit.note:
            print(f"note: {path}: {fit.note}")
    text = "\n".join(lines)
    print(text)
    if out:
        Path(out).write_text(text + "\n")
    return 0


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key = value config file; flags override")
    p.add_argument("--problem", help="builtin name or problem spec file")
    p.add_argument("--method", choices=("dpg", "fdpg", "gfdpg"))
    p.add_argument("--schedule",
                   choices=("fista", "poly", "fixed_horizon", "fixed-horizon"))
    p.add_argument("--a", type=float, help="polynomial schedule parameter")
    p.add_argument("--N", type=int, help="fixed-horizon schedule budget")
    p.add_argument("--step", choices=("fixed", "backtrack"))
    p.add_argument("--fixed-L", dest="fixed_L", type=float,
                   help="fixed step constant (default: derived Lipschitz)")
    p.add_argument("--L0", type=float, help="backtracking start constant")
    p.add_argument("--eta", type=float, help="backtracking growth factor")
    p.add_argument("--iters", type=int)
    p.add_argument("--tol", type=float, help="prox-gradient stopping tolerance")
    p.add_argument("--y0", help="'zero' or a file with one comma-separated vector")
    p.add_argument("--seed", type=int,
                   help="instance seed; falls back to DUALPROX_SEED")
    p.add_argument("--certs", action="store_true", default=None,
                   help="log certificate quantities each iteration")
    p.add_argument("--ref", choices=("enumerate", "longrun"),
                   help="reference-solution mode for verify")
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--svg", help="render a log-log figure to this path")


def _config_from_args(args) -> RunConfig:
    if args.config:
        cfg = RunConfig.from_file(args.config)
    else:
        cfg = RunConfig()
    overrides = {}
    for f in fields(RunConfig):
        val = getattr(args, f.name, None)
        if val is not None:
            overrides[f.name] = val
    if "seed" not in overrides and not args.config:
        env = os.environ.get("DUALPROX_SEED")
        if env is not None:
            overrides["seed"] = int(env)
    return replace(cfg, **overrides).normalized()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dualprox",
        description="Dual proximal gradient solvers with convergence "
                    "certificates")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one solver, write the trace CSV")
    _add_run_flags(p_run)

    p_verify = sub.add_parser("verify",
                              help="run and check every applicable bound")
    _add_run_flags(p_verify)
    p_verify.add_argument("--scale-bounds", type=float, default=1.0,
                          help=argparse.SUPPRESS)  # fault-injection hook

    p_cmp = sub.add_parser("compare",
                           help="run several configs on one problem")
    p_cmp.add_argument("configs", nargs="*", help="config files (>= 2)")
    p_cmp.add_argument("--out", help="long-format CSV path")
    p_cmp.add_argument("--svg", help="render a log-log figure to this path")

    p_rates = sub.add_parser("rates", help="fit log-log slopes from traces")
    p_rates.add_argument("traces", nargs="+", help="trace CSV files")
    p_rates.add_argument("--metric", default="pg_norm",
                         help="column name; 'min:' prefix fits the running-"
                              "min envelope; 'dual_gap' derives from "
                              "dual_val and --qstar")
    p_rates.add_argument("--window", default="20:2000",
                         help="iteration window lo:hi")
    p_rates.add_argument("--qstar", type=float,
                         help="optimal negated dual value for dual_gap")
    p_rates.add_argument("--out", help="also write the table here")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(_config_from_args(args), args.out, args.svg)
        if args.command == "verify":
            return cmd_verify(_config_from_args(args), args.out,
                              scale_bounds=args.scale_bounds)
        if args.command == "compare":
            return cmd_compare(args.configs, args.out, args.svg)
        if args.command == "rates":
            lo, _, hi = args.window.partition(":")
            return cmd_rates(args.traces, args.metric,
                             (int(lo), int(hi)), qstar=args.qstar,
                             out=args.out)
    except (ConfigError, DualProxError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
