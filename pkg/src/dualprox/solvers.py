"""DPG, FDPG, and GFDPG iteration engines with trace emission.

All three methods apply prox-gradient steps to the negated dual of the
composite problem.  The efficient step works in the original f/g oracles:

    u = x(base),  v = prox_{L g}(A u - L base),  y = base - (A u - v) / L,

which coincides with the dual prox-gradient map p_L(base) and, as a side
effect, produces v = z(y).  FDPG adds the classic accelerated momentum,
GFDPG accepts any schedule with t_k^2 <= T_k.  Step sizes are either fixed
or found by doubling backtracking on the sufficient-decrease condition.

A run is single-threaded and owns its state; concurrent runs over the same
immutable problem are fine, and reports are plain value objects.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (Array, CompositeProblem, DualProxError, ext_add,
                   primal_from_dual)
from .schedules import Schedule, fista_momentum, make_schedule

__all__ = [
    "BacktrackResult",
    "BacktrackingError",
    "DualIterateState",
    "IterateRecord",
    "SolverAbort",
    "SolverReport",
    "StepRule",
    "backtracking_search",
    "backtracking_step",
    "dpg_step",
    "fixed_step",
    "gfdpg_momentum",
    "prox_form_step",
    "run_solver",
]

METHODS = ("dpg", "fdpg", "gfdpg")


class BacktrackingError(DualProxError):
    """Sufficient decrease not reached within the doubling budget."""


class SolverAbort(DualProxError):
    """A solver run failed mid-iteration; carries the partial report."""

    def __init__(self, message: str, report: "SolverReport"):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class StepRule:
    """Step-size policy: fixed 1/L with L = grad Lipschitz by default, or
    doubling backtracking from L0 with growth factor eta."""

    kind: str  # "fixed" | "backtracking"
    L: Optional[float] = None
    L0: Optional[float] = None
    eta: float = 2.0


def fixed_step(L: float | None = None) -> StepRule:
    return StepRule("fixed", L=L)


def backtracking_step(L0: float | None = None, eta: float = 2.0) -> StepRule:
    if eta <= 1.0:
        raise ValueError("backtracking growth factor must exceed 1")
    return StepRule("backtracking", L0=L0, eta=eta)


def dpg_step(problem: CompositeProblem, y_prev: Array, L: float):
    """One efficient dual prox-gradient step from ``y_prev``.

    Returns ``(y, u, v)`` with u = x(y_prev), v = prox_{Lg}(Au - L y_prev)
    and y = y_prev - (Au - v)/L; v equals the recovered minimizer z(y).
    """
    if not L > 0:
        raise ValueError("step constant L must be positive")
    y_prev = np.asarray(y_prev, dtype=float)
    u = primal_from_dual(problem, y_prev)
    au = problem.op(u)
    v = problem.g.prox(L, au - L * y_prev)
    y = y_prev - (au - v) / L
    return y, u, v


def prox_form_step(problem: CompositeProblem, y_prev: Array, L: float) -> Array:
    """Dual prox-gradient map evaluated through the Moreau identity.

    Computes prox_{G/L}(y - grad/L) for the conjugate part G(y) = g*(-y),
    using prox_{c g*}(w) = w - c prox_{g/c}(w/c).  Reference route kept for
    equivalence testing against :func:`dpg_step`; both must agree to
    roundoff on every problem.
    """
    if not L > 0:
        raise ValueError("step constant L must be positive")
    y_prev = np.asarray(y_prev, dtype=float)
    grad = problem.op(primal_from_dual(problem, y_prev))
    vbar = y_prev - grad / L
    # prox_{(1/L) g*}(w) = w - (1/L) prox_{L g}(L w)
    u_star = -vbar - problem.g.prox(L, -L * vbar) / L
    return -u_star


def gfdpg_momentum(y_k: Array, y_prev: Array, w_prev: Array,
                   t_prev: float, t_k: float, T_prev: float, T_k: float) -> Array:
    """Generalized momentum combination of the last two iterates.

    With t_k^2 = T_k for the whole history the (y_k - w_prev) coefficient
    vanishes and the step reduces to the classic (t_prev - 1)/t_k rule.
    """
    scale = t_k / (t_prev * T_k)
    c_iter = (T_prev - t_prev) * scale
    c_extr = (t_prev * t_prev - T_prev) * scale
    return y_k + c_iter * (y_k - y_prev) + c_extr * (y_k - w_prev)


@dataclass
class _StepEval:
    """One evaluated prox-gradient step plus the values the loop logs."""

    L: float
    y: Array
    u: Array
    au: Array
    v: Array
    x: Array          # x(y)
    ax: Array         # A x(y)
    f_smooth: float   # F(y) = <y, A x(y)> - f(x(y))
    q_tilde: float    # F(y) + G(y) with G from the companion minimizer v


def _eval_step(problem, base, L, u=None, au=None) -> _StepEval:
    base = np.asarray(base, dtype=float)
    if u is None:
        u = primal_from_dual(problem, base)
        au = problem.op(u)
    v = problem.g.prox(L, au - L * base)
    y = base - (au - v) / L
    x = primal_from_dual(problem, y)
    ax = problem.op(x)
    f_smooth = float(y @ ax) - problem.f.value(x)
    g_conj = -float(y @ v) - problem.g.value(v)
    return _StepEval(L=L, y=y, u=u, au=au, v=v, x=x, ax=ax,
                     f_smooth=f_smooth, q_tilde=f_smooth + g_conj)


@dataclass
class BacktrackResult:
    """Accepted step constant with the step evaluated at it."""

    L: float
    y: Array
    q_tilde: float
    u: Array
    v: Array
    doublings: int
    step: _StepEval


def backtracking_search(problem: CompositeProblem, w: Array, L_start: float,
                        eta: float = 2.0, max_doublings: int = 60,
                        _u: Array | None = None,
                        _au: Array | None = None) -> BacktrackResult:
    """Smallest L in {L_start * eta^j} passing sufficient decrease at ``w``.

    The acceptance test is the quadratic-majorization condition at the
    trial step y = p_L(w); the conjugate part of the dual objective cancels
    from both sides, so only the smooth part is compared.  Acceptance
    guarantees the dual objective does not increase from w to y.

    Raises
    ------
    BacktrackingError
        After ``max_doublings`` failed trials; L >= the gradient Lipschitz
        constant always passes, so this signals inconsistent oracles.
    """
    if not L_start > 0:
        raise ValueError("L_start must be positive")
    if not eta > 1:
        raise ValueError("growth factor eta must exceed 1")
    w = np.asarray(w, dtype=float)
    if _u is None:
        _u = primal_from_dual(problem, w)
        _au = problem.op(_u)
    f_at_w = float(w @ _au) - problem.f.value(_u)  # F(w); grad F(w) = A u
    L = float(L_start)
    for j in range(max_doublings + 1):
        ev = _eval_step(problem, w, L, u=_u, au=_au)
        d = ev.y - w
        rhs = f_at_w + float(d @ _au) + 0.5 * L * float(d @ d)
        # eps-level slack keeps exactly-quadratic duals from triggering a
        # spurious extra doubling at L equal to the true Lipschitz constant
        if ev.f_smooth <= rhs + 1e-12 * (1.0 + abs(rhs)):
            return BacktrackResult(L=L, y=ev.y, q_tilde=ev.q_tilde,
                                   u=ev.u, v=ev.v, doublings=j, step=ev)
        L *= eta
    raise BacktrackingError(
        f"sufficient decrease unmet after {max_doublings} doublings from "
        f"L = {L_start:g}; oracle inconsistency suspected")


@dataclass(frozen=True)
class IterateRecord:
    """Metrics and vectors logged at one solver iteration."""

    k: int
    L: float
    t: float
    T: float
    dual_val: float       # negated dual objective at y_k
    primal_val: float     # composite objective at x(y_k); may be +inf
    pg_norm: float        # ||p_{L'}(y_k) - y_k||; nan unless certificates on
    step_norm: float      # ||y_k - base||, base = w_{k-1} or y_{k-1}
    pd_gap: float         # primal_val - dual value; may be +inf
    infeas: float         # ||A u_k - v_k|| = L_k * step_norm
    lemma_residual: float  # ||A u_k - v_k + L_k (y_k - base)||
    au_norm: float
    L_prime: float        # accepted certificate step constant; nan if off
    dual_val_at_p: float  # negated dual objective at p_{L'}(y_k); nan if off
    y: Array
    w: Array
    v: Array
    p: Optional[Array] = None
    p_v: Optional[Array] = None  # recovered minimizer z at p


@dataclass(frozen=True)
class DualIterateState:
    """Solver state after the last completed iteration."""

    k: int
    y: Array
    w: Array
    s: Optional[Array]
    y_prev: Array
    w_prev: Array
    t_prev: float
    T_prev: float
    t: float
    T: float
    L: float


@dataclass
class SolverReport:
    """Run outcome: per-iteration records plus termination metadata."""

    method: str
    schedule: Optional[Schedule]
    y0: Array
    L0: float
    t0: float
    T0: float
    records: list[IterateRecord]
    termination: str
    wall_time: float
    cert_mode: bool
    final_state: Optional[DualIterateState]
    problem: CompositeProblem

    @property
    def iterations(self) -> int:
        return len(self.records)


def run_solver(problem: CompositeProblem, method: str,
               schedule: Schedule | None = None,
               step_rule: StepRule | None = None,
               y0: Array | None = None,
               max_iters: int = 100, pg_tol: float = 0.0,
               cert_mode: bool = False) -> SolverReport:
    """Run one dual prox-gradient method and log a full trace.

    Parameters
    ----------
    method : str
        "dpg" (no momentum), "fdpg" (classic accelerated weights; any given
        schedule is ignored), or "gfdpg" (requires a valid schedule).
    step_rule : StepRule, optional
        Fixed step at the derived gradient Lipschitz constant by default.
    pg_tol : float, optional
        Terminate once the certified prox-gradient norm at y_k drops to
        this value; 0 (default) runs to ``max_iters`` so rate studies are
        uncensored.  A positive tolerance forces the certificate
        evaluation even when ``cert_mode`` is off.
    cert_mode : bool, optional
        When on, each iteration additionally finds L' by backtracking from
        L_k at y_k and logs ||p_{L'}(y_k) - y_k|| together with the dual
        value at p_{L'}(y_k).

    Raises
    ------
    SolverAbort
        On oracle or backtracking failure; the exception carries the
        partial report with termination "aborted".
    """
    if method not in METHODS:
        raise ValueError(f"unknown method '{method}'; expected one of {METHODS}")
    if step_rule is None:
        step_rule = fixed_step()
    if max_iters < 0:
        raise ValueError("max_iters must be >= 0")
    L_F = problem.grad_lipschitz
    if method == "fdpg":
        schedule = make_schedule("fista")
    elif method == "gfdpg":
        if schedule is None:
            raise ValueError("gfdpg requires a momentum schedule")
        if schedule.horizon is not None and max_iters > schedule.horizon:
            raise ValueError(
                f"schedule defined up to k = {schedule.horizon} cannot drive "
                f"{max_iters} iterations")
    else:
        schedule = None

    if y0 is None:
        y0 = np.zeros(problem.op.m)
    y0 = np.asarray(y0, dtype=float).copy()
    if y0.shape != (problem.op.m,):
        raise ValueError(f"y0 must have length {problem.op.m}")

    backtrack = step_rule.kind == "backtracking"
    if backtrack:
        eta = step_rule.eta
        L = step_rule.L0 if step_rule.L0 is not None else max(L_F / 16.0, 1e-12)
    else:
        eta = 2.0  # reused by the certificate search
        L = step_rule.L if step_rule.L is not None else L_F
    if not L > 0:
        raise ValueError("initial step constant must be positive")
    L0 = float(L)

    want_pg = cert_mode or pg_tol > 0.0

    y = y0.copy()
    w = y0.copy()
    s = y0.copy() if method == "gfdpg" else None
    y_prev = y0.copy()
    w_prev = y0.copy()
    if schedule is not None:
        t_prev = schedule.t(0)
        T_prev = schedule.T(0)
    else:
        t_prev = T_prev = math.nan
    t0 = 1.0 if schedule is None else schedule.t(0)
    records: list[IterateRecord] = []
    termination = "max-iters"
    reuse_x = None  # x(y_{k-1}) carried over when the next base is y_{k-1}
    reuse_ax = None
    started = time.perf_counter()

    def _partial(reason):
        return SolverReport(method=method, schedule=schedule, y0=y0, L0=L0,
                            t0=t0, T0=t0, records=records, termination=reason,
                            wall_time=time.perf_counter() - started,
                            cert_mode=want_pg, final_state=state,
                            problem=problem)

    state = None
    try:
        for k in range(1, max_iters + 1):
            base = y if method == "dpg" else w
            if backtrack:
                res = backtracking_search(problem, base, L, eta,
                                          _u=reuse_x, _au=reuse_ax)
                L = res.L
                ev = res.step
            else:
                ev = _eval_step(problem, base, L, u=reuse_x, au=reuse_ax)
            y_new, u, au, v = ev.y, ev.u, ev.au, ev.v

            d = y_new - base
            step_norm = float(np.linalg.norm(d))
            residual = float(np.linalg.norm(au - v + L * d))
            au_norm = float(np.linalg.norm(au))
            dual_val = ev.q_tilde
            primal_val = ext_add(problem.f.value(ev.x), problem.g.value(ev.ax))
            pd_gap = ext_add(primal_val, dual_val)

            if want_pg:
                cert = backtracking_search(problem, y_new, L, eta,
                                           _u=ev.x, _au=ev.ax)
                p_vec = cert.y
                p_v = cert.v
                pg_norm = float(np.linalg.norm(p_vec - y_new))
                L_prime = cert.L
                dual_at_p = cert.q_tilde
            else:
                p_vec = p_v = None
                pg_norm = L_prime = dual_at_p = math.nan

            if method == "dpg":
                t_k = T_k = math.nan
                w_new = y_new
            elif method == "fdpg":
                t_k = fista_momentum(t_prev)
                T_k = T_prev + t_k
                w_new = y_new + ((t_prev - 1.0) / t_k) * (y_new - y)
            else:
                t_k = schedule.t(k)
                T_k = schedule.T(k)
                s = s + t_prev * (y_new - w)
                w_new = gfdpg_momentum(y_new, y, w, t_prev, t_k, T_prev, T_k)

            records.append(IterateRecord(
                k=k, L=float(L), t=float(t_k), T=float(T_k),
                dual_val=dual_val, primal_val=primal_val, pg_norm=pg_norm,
                step_norm=step_norm, pd_gap=pd_gap, infeas=float(L) * step_norm,
                lemma_residual=residual, au_norm=au_norm, L_prime=L_prime,
                dual_val_at_p=dual_at_p, y=y_new.copy(), w=w_new.copy(),
                v=v.copy(), p=None if p_vec is None else p_vec.copy(),
                p_v=None if p_v is None else p_v.copy()))

            stalled = (step_norm == 0.0 and np.array_equal(y_new, y)
                       and np.array_equal(w_new, w))
            y_prev, w_prev = y, w
            y, w = y_new, w_new
            state = DualIterateState(k=k, y=y, w=w, s=None if s is None else s.copy(),
                                     y_prev=y_prev, w_prev=w_prev,
                                     t_prev=t_prev, T_prev=T_prev,
                                     t=t_k, T=T_k, L=float(L))
            t_prev, T_prev = t_k, T_k
            if method == "dpg":
                reuse_x, reuse_ax = ev.x, ev.ax  # next base is y_k itself
            else:
                reuse_x = reuse_ax = None
            if want_pg and pg_norm <= pg_tol and pg_tol > 0.0:
                termination = "pg-tol"
                break
            if stalled:
                termination = "stagnation"
                break
    except DualProxError as exc:
        raise SolverAbort(f"solver aborted at iteration {len(records) + 1}: {exc}",
                          _partial("aborted")) from exc

    return _partial(termination)
