"""Machine-checkable certificates for the solver convergence guarantees.

Each certificate compares a measured per-iteration quantity against the
matching closed-form bound, given a reference dual solution computed
independently of the solver under test.  A certificate passes when
measured <= bound * (1 + 1e-9) + 1e-12; the slack absorbs roundoff in what
are exact-arithmetic inequalities.  Certificates whose hypotheses a problem
does not satisfy (unbounded subgradients, schedule shape) are reported as
not-applicable rather than failed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field
from typing import Optional

import numpy as np

from .core import INF, Array, ext_add, is_finite, primal_from_dual
from .solvers import SolverReport

__all__ = [
    "BoundCertificate",
    "RateFit",
    "ReferenceSolution",
    "certificate_suite",
    "certify_dual_decay_fdpg",
    "certify_dual_decay_gfdpg",
    "certify_energy_telescope",
    "certify_iterate_radius",
    "certify_pg_decay_basic",
    "certify_pg_decay_gfdpg",
    "certify_pg_decay_poly",
    "certify_primal_gap",
    "certify_primal_subopt",
    "certify_split_gap",
    "fit_rate",
]

REL_SLACK = 1e-9
ABS_SLACK = 1e-12


@dataclass(frozen=True)
class ReferenceSolution:
    """Dual/primal optimum produced independently of the solvers under test."""

    y_star: Array
    x_star: Array
    q_tilde_star: float   # negated dual objective at y_star
    primal_star: float    # composite objective at x_star
    provenance: str       # "closed-form" | "active-set enumeration" | "long-run"
    residual: float       # prox-gradient norm achieved at y_star
    gap: float            # primal_star minus dual value at y_star
    low_precision: bool = False

    def extra_slack(self) -> float:
        # widened absolute slack when the reference missed its tolerance
        return 10.0 * self.residual if self.low_precision else 0.0


@dataclass(frozen=True)
class BoundCertificate:
    """One bound evaluated at one iteration; passed=None means not applicable."""

    bound_id: str
    k: int
    bound: float
    measured: float
    margin: float
    passed: Optional[bool]
    note: str = ""
    snapshot: dict = dataclass_field(default_factory=dict)


def _passes(measured, bound, extra_abs=0.0, rel=REL_SLACK) -> bool:
    if measured == INF:
        return False
    return measured <= bound * (1.0 + rel) + ABS_SLACK + extra_abs


def _cert(bound_id, k, bound, measured, extra_abs=0.0, rel=REL_SLACK,
          snapshot=None) -> BoundCertificate:
    return BoundCertificate(
        bound_id=bound_id, k=k, bound=float(bound), measured=float(measured),
        margin=float(bound) - float(measured),
        passed=_passes(measured, bound, extra_abs=extra_abs, rel=rel),
        snapshot=snapshot or {})


def _na(bound_id, note) -> BoundCertificate:
    return BoundCertificate(bound_id=bound_id, k=0, bound=math.nan,
                            measured=math.nan, margin=math.nan,
                            passed=None, note=note)


def _dist0(report: SolverReport, ref: ReferenceSolution) -> float:
    return float(np.linalg.norm(report.y0 - ref.y_star))


def _require_cert_trace(report: SolverReport):
    if not report.cert_mode:
        raise ValueError("trace was logged without certificate evaluations; "
                         "rerun the solver with cert_mode=True")


def _t_T_before(report, idx):
    """(t_{k-1}, T_{k-1}) for the record at position idx (k = idx + 1)."""
    if idx == 0:
        return report.t0, report.T0
    prev = report.records[idx - 1]
    return prev.t, prev.T


def certify_dual_decay_fdpg(report: SolverReport,
                            ref: ReferenceSolution) -> list[BoundCertificate]:
    """Dual suboptimality against both classic-momentum decay bounds.

    ``fdpg-dual-t`` uses 2 L_k d0^2 / t_{k-1}^2 and ``fdpg-dual-k2`` the
    schedule-free 2 L_k d0^2 / (k+1)^2, with d0 = ||y_0 - y*||.
    """
    extra = ref.extra_slack()
    d0sq = _dist0(report, ref) ** 2
    certs = []
    for i, r in enumerate(report.records):
        m = r.dual_val - ref.q_tilde_star
        t_prev, _ = _t_T_before(report, i)
        snap = {"L": r.L, "t_prev": t_prev}
        certs.append(_cert("fdpg-dual-t", r.k,
                           2.0 * r.L * d0sq / (t_prev * t_prev), m,
                           extra_abs=extra, snapshot=snap))
        certs.append(_cert("fdpg-dual-k2", r.k,
                           2.0 * r.L * d0sq / ((r.k + 1) ** 2), m,
                           extra_abs=extra, snapshot=snap))
    return certs


def certify_dual_decay_gfdpg(report: SolverReport,
                             ref: ReferenceSolution) -> list[BoundCertificate]:
    """Dual suboptimality against the running-sum bound L_k d0^2 / (2 T_{k-1})."""
    extra = ref.extra_slack()
    d0sq = _dist0(report, ref) ** 2
    certs = []
    for i, r in enumerate(report.records):
        _, T_prev = _t_T_before(report, i)
        certs.append(_cert("gfdpg-dual", r.k,
                           r.L * d0sq / (2.0 * T_prev),
                           r.dual_val - ref.q_tilde_star,
                           extra_abs=extra,
                           snapshot={"L": r.L, "T_prev": T_prev}))
    return certs


def certify_pg_decay_gfdpg(report: SolverReport,
                           ref: ReferenceSolution) -> list[BoundCertificate]:
    """Minimum prox-gradient/step norm against the schedule-slack bound.

    ``gfdpg-pg`` measures min over {||y_i - w_{i-1}||, i <= k} joined with
    ||p_{L'}(y_k) - y_k||; its bound is d0 / sqrt(sum_i (T_i - t_i^2) +
    T_{k-1}).  ``gfdpg-pg-lfree`` drops the p-term and keeps only the slack
    sum, which vanishes for the classic schedule and is then not applicable.
    """
    _require_cert_trace(report)
    extra = ref.extra_slack()
    d0 = _dist0(report, ref)
    certs = []
    run_min = INF
    slack_sum = 0.0
    for i, r in enumerate(report.records):
        t_prev, T_prev = _t_T_before(report, i)
        slack_sum += T_prev - t_prev * t_prev
        run_min = min(run_min, r.step_norm)
        m = min(run_min, r.pg_norm)
        snap = {"L_prime": r.L_prime, "T_prev": T_prev, "slack_sum": slack_sum}
        certs.append(_cert("gfdpg-pg", r.k,
                           d0 / math.sqrt(max(slack_sum, 0.0) + T_prev), m,
                           extra_abs=extra, snapshot=snap))
        if slack_sum <= 1e-8 * max(T_prev, 1.0):
            certs.append(BoundCertificate(
                "gfdpg-pg-lfree", r.k, math.nan, math.nan, math.nan, None,
                note="schedule slack sum is zero"))
        else:
            certs.append(_cert("gfdpg-pg-lfree", r.k,
                               d0 / math.sqrt(slack_sum), run_min,
                               extra_abs=extra, snapshot=snap))
    return certs


def _poly_constant(a: float) -> float:
    return a * math.sqrt(6.0) / math.sqrt(a - 2.0)


def certify_pg_decay_poly(report: SolverReport, ref: ReferenceSolution,
                          a: float | None = None) -> list[BoundCertificate]:
    """Minimum prox-gradient norm against the k^{-1.5} polynomial bound.

    Requires the (k+a)/a schedule with a > 2; the constant is
    a sqrt(6) / sqrt(a-2).
    """
    sched = report.schedule
    if a is None:
        a = sched.a if (sched is not None and sched.kind == "poly") else None
    if a is None:
        return [_na("pg-min-k15", "schedule is not polynomial")]
    if not a > 2:
        return [_na("pg-min-k15", f"polynomial parameter a = {a:g} is not > 2")]
    _require_cert_trace(report)
    extra = ref.extra_slack()
    d0 = _dist0(report, ref)
    const = _poly_constant(a)
    certs = []
    run_min = INF
    for r in report.records:
        run_min = min(run_min, r.step_norm)
        certs.append(_cert("pg-min-k15", r.k,
                           const * d0 / r.k ** 1.5, min(run_min, r.pg_norm),
                           extra_abs=extra,
                           snapshot={"a": a, "L_prime": r.L_prime}))
    return certs


def certify_pg_decay_basic(report: SolverReport,
                           ref: ReferenceSolution) -> list[BoundCertificate]:
    """Prox-gradient norm at y_k against the 2 d0 / k decay (no momentum
    schedule needed; valid for the plain and classic accelerated methods)."""
    _require_cert_trace(report)
    extra = ref.extra_slack()
    d0 = _dist0(report, ref)
    return [_cert("pg-k1", r.k, 2.0 * d0 / r.k, r.pg_norm, extra_abs=extra,
                  snapshot={"L_prime": r.L_prime})
            for r in report.records]


def _at_p(problem, r):
    """Recover primal quantities at the certified point p of a record."""
    x_p = primal_from_dual(problem, r.p)
    ax_p = problem.op(x_p)
    return x_p, ax_p


def certify_split_gap(report: SolverReport) -> list[BoundCertificate]:
    """Split-objective gap at p_{L'}(y_k) against the pointwise bound.

    Measures f(x(p)) + g(z(p)) - q(p) and bounds it by
    (L' + L_F) ||p|| ||p - y_k||.  Needs no reference solution.
    """
    _require_cert_trace(report)
    problem = report.problem
    L_F = problem.grad_lipschitz
    certs = []
    for r in report.records:
        x_p, _ = _at_p(problem, r)
        m = ext_add(problem.f.value(x_p), problem.g.value(r.p_v)) + r.dual_val_at_p
        p_norm = float(np.linalg.norm(r.p))
        move = float(np.linalg.norm(r.p - r.y))
        certs.append(_cert("split-gap-pointwise", r.k,
                           (r.L_prime + L_F) * p_norm * move, m,
                           snapshot={"L_prime": r.L_prime, "p_norm": p_norm}))
    return certs


def certify_primal_gap(report: SolverReport,
                       ref: ReferenceSolution) -> list[BoundCertificate]:
    """Primal-dual gap certificates built on the prox-gradient decay.

    Emits, as applicable to the method and schedule:

    - ``primal-gap-pointwise``: H(x(p)) - q(p) against
      (L' + L_F)(||p|| + gamma_g)||p - y_k||; needs finite gamma_g.
    - ``primal-gap-k1``: the same gap against the 2 d0 / k decay times
      (L' + L_F)(d0 + ||y*|| + gamma_g); plain/classic methods only.
    - ``split-gap-k15`` / ``primal-gap-k15``: running-min gaps against the
      k^{-1.5} decay for the polynomial schedule with a > 2; the split form
      needs no subgradient bound, the primal form does.
    """
    _require_cert_trace(report)
    problem = report.problem
    ref_extra = ref.extra_slack()
    gamma = problem.g.gamma
    L_F = problem.grad_lipschitz
    d0 = _dist0(report, ref)
    ystar_norm = float(np.linalg.norm(ref.y_star))
    sched = report.schedule
    fista_like = report.method == "fdpg" or (sched is not None
                                             and sched.kind == "fista")
    basic_decay = report.method == "dpg" or fista_like
    a = sched.a if (report.method == "gfdpg" and sched is not None
                    and sched.kind == "poly") else None
    poly_ok = a is not None and a > 2

    certs: list[BoundCertificate] = []
    if not is_finite(gamma):
        certs.append(_na("primal-gap-pointwise",
                         "subgradient bound of g is not finite"))
        if basic_decay:
            certs.append(_na("primal-gap-k1",
                             "subgradient bound of g is not finite"))
    if report.method == "gfdpg" and not poly_ok:
        certs.append(_na("split-gap-k15",
                         "needs the polynomial schedule with a > 2"))
    if report.method == "gfdpg" and (not poly_ok or not is_finite(gamma)):
        note = ("needs the polynomial schedule with a > 2" if not poly_ok
                else "subgradient bound of g is not finite")
        certs.append(_na("primal-gap-k15", note))

    run_min_split = INF
    run_min_primal = INF
    const = _poly_constant(a) if poly_ok else math.nan
    for r in report.records:
        x_p, ax_p = _at_p(problem, r)
        split_at_p = (ext_add(problem.f.value(x_p), problem.g.value(r.p_v))
                      + r.dual_val_at_p)
        primal_at_p = (ext_add(problem.f.value(x_p), problem.g.value(ax_p))
                       + r.dual_val_at_p)
        move = float(np.linalg.norm(r.p - r.y))
        p_norm = float(np.linalg.norm(r.p))
        snap = {"L_prime": r.L_prime}
        if is_finite(gamma):
            certs.append(_cert("primal-gap-pointwise", r.k,
                               (r.L_prime + L_F) * (p_norm + gamma) * move,
                               primal_at_p, extra_abs=ref_extra, snapshot=snap))
            if basic_decay:
                certs.append(_cert(
                    "primal-gap-k1", r.k,
                    (r.L_prime + L_F) * (d0 + ystar_norm + gamma)
                    * 2.0 * d0 / r.k,
                    primal_at_p, extra_abs=ref_extra, snapshot=snap))
        if poly_ok:
            x_i = primal_from_dual(problem, r.y)
            split_i = (ext_add(problem.f.value(x_i), problem.g.value(r.v))
                       + r.dual_val)
            run_min_split = min(run_min_split, split_i)
            run_min_primal = min(run_min_primal, r.pd_gap)
            decay = const * (r.L_prime + L_F) * d0 / r.k ** 1.5
            certs.append(_cert("split-gap-k15", r.k,
                               decay * (d0 + ystar_norm),
                               min(run_min_split, split_at_p),
                               extra_abs=ref_extra, snapshot=snap))
            if is_finite(gamma):
                certs.append(_cert("primal-gap-k15", r.k,
                                   decay * (d0 + ystar_norm + gamma),
                                   min(run_min_primal, primal_at_p),
                                   extra_abs=ref_extra, snapshot=snap))
    return certs


def certify_iterate_radius(report: SolverReport,
                           ref: ReferenceSolution) -> list[BoundCertificate]:
    """Iterate boundedness: max{||p||, ||y_k||, ||w_k||} <= d0 + ||y*||."""
    extra = ref.extra_slack()
    bound = _dist0(report, ref) + float(np.linalg.norm(ref.y_star))
    certs = []
    for r in report.records:
        m = max(float(np.linalg.norm(r.y)), float(np.linalg.norm(r.w)))
        if r.p is not None:
            m = max(m, float(np.linalg.norm(r.p)))
        certs.append(_cert("iterate-radius", r.k, bound, m, extra_abs=extra))
    return certs


def certify_primal_subopt(report: SolverReport,
                          ref: ReferenceSolution) -> list[BoundCertificate]:
    """Primal suboptimality H(x(y_k)) - H(x*) under a declared finite
    bound gamma_H on the objective subgradients over the feasible domain.

    The decay is gamma_H sqrt(L_k / sigma) d0 / sqrt(k) without momentum and
    2 gamma_H sqrt(L_k / sigma) d0 / (k+1) with the classic momentum.
    Iterates outside the restricted domain (infinite objective) yield
    not-applicable rows.
    """
    problem = report.problem
    gamma_h = problem.gamma_H
    sched = report.schedule
    fista_like = report.method == "fdpg" or (sched is not None
                                             and sched.kind == "fista")
    if report.method == "dpg":
        bound_id = "primal-subopt-sqrtk"
    elif fista_like:
        bound_id = "primal-subopt-k1"
    else:
        return [_na("primal-subopt-k1",
                    "no primal suboptimality decay is stated for this "
                    "momentum schedule")]
    if not is_finite(gamma_h):
        return [_na(bound_id, "no finite objective subgradient bound declared")]
    extra = ref.extra_slack()
    d0 = _dist0(report, ref)
    sigma = problem.f.sigma
    certs = []
    for r in report.records:
        if not is_finite(r.primal_val):
            certs.append(BoundCertificate(
                bound_id, r.k, math.nan, math.nan, math.nan, None,
                note="iterate outside the restricted feasible domain"))
            continue
        scale = gamma_h * math.sqrt(r.L / sigma) * d0
        if report.method == "dpg":
            b = scale / math.sqrt(r.k)
        else:
            b = 2.0 * scale / (r.k + 1)
        certs.append(_cert(bound_id, r.k, b, r.primal_val - ref.primal_star,
                           extra_abs=extra, snapshot={"L": r.L}))
    return certs


def certify_energy_telescope(report: SolverReport,
                             ref: ReferenceSolution) -> list[BoundCertificate]:
    """Telescoped momentum energy stays below half the squared start distance.

    Checks sum_i (T_i - t_i^2)/2 ||y_{i+1} - w_i||^2 +
    (T_{k-1}/L_k)(dual gap at y_k) <= d0^2 / 2 at every k, with 1e-8
    relative slack.
    """
    extra = ref.extra_slack()
    d0sq = _dist0(report, ref) ** 2
    certs = []
    energy = 0.0
    for i, r in enumerate(report.records):
        t_prev, T_prev = _t_T_before(report, i)
        energy += 0.5 * (T_prev - t_prev * t_prev) * r.step_norm ** 2
        m = energy + (T_prev / r.L) * (r.dual_val - ref.q_tilde_star)
        certs.append(_cert("momentum-telescope", r.k, 0.5 * d0sq, m,
                           extra_abs=extra, rel=1e-8,
                           snapshot={"L": r.L, "T_prev": T_prev}))
    return certs


def certificate_suite(report: SolverReport,
                      ref: ReferenceSolution) -> list[BoundCertificate]:
    """Every certificate applicable to the method/schedule of ``report``."""
    method = report.method
    sched = report.schedule
    fista_like = method == "fdpg" or (sched is not None and sched.kind == "fista")
    certs: list[BoundCertificate] = []
    if method == "fdpg" or (method == "gfdpg" and fista_like):
        certs += certify_dual_decay_fdpg(report, ref)
    if method in ("fdpg", "gfdpg"):
        certs += certify_dual_decay_gfdpg(report, ref)
        certs += certify_energy_telescope(report, ref)
        certs += certify_pg_decay_gfdpg(report, ref)
    if method == "gfdpg":
        certs += certify_pg_decay_poly(report, ref)
    if method == "dpg" or fista_like:
        certs += certify_pg_decay_basic(report, ref)
    certs += certify_split_gap(report)
    certs += certify_primal_gap(report, ref)
    certs += certify_iterate_radius(report, ref)
    certs += certify_primal_subopt(report, ref)
    return certs


@dataclass(frozen=True)
class RateFit:
    """Least-squares slope of log(metric) against log(k)."""

    metric: str
    window: tuple[int, int]
    slope: float
    residual: float
    note: str = ""


def fit_rate(records, metric: str, window: tuple[int, int]) -> RateFit:
    """Fit an empirical power-law exponent to a positive trace metric.

    ``records`` is a sequence of IterateRecord or mapping rows with a ``k``
    entry.  A ``min:`` prefix on the metric fits the running-min envelope.
    The window is truncated at the first nonpositive value (with a note);
    at least 10 points must remain.
    """
    envelope = metric.startswith("min:")
    name = metric[4:] if envelope else metric

    def get(row, key):
        if isinstance(row, dict):
            return float(row[key])
        return float(getattr(row, key))

    ks, vals = [], []
    run = INF
    for row in records:
        k = int(get(row, "k"))
        val = get(row, name)
        if envelope:
            run = min(run, val)
            val = run
        if window[0] <= k <= window[1]:
            ks.append(k)
            vals.append(val)
    note = ""
    cut = len(vals)
    for i, v in enumerate(vals):
        if not v > 0.0 or not math.isfinite(v):
            cut = i
            note = f"window truncated at k = {ks[i]} (metric reached {v:g})"
            break
    ks, vals = ks[:cut], vals[:cut]
    if len(ks) < 10:
        raise ValueError(f"need at least 10 positive points to fit a rate; "
                         f"got {len(ks)} for '{metric}' in {window}")
    logk = np.log(np.asarray(ks, dtype=float))
    logv = np.log(np.asarray(vals, dtype=float))
    slope, intercept = np.polyfit(logk, logv, 1)
    resid = float(np.sqrt(np.mean((logv - (slope * logk + intercept)) ** 2)))
    return RateFit(metric=metric, window=(ks[0], ks[-1]),
                   slope=float(slope), residual=resid, note=note)
