"""Problem model and dual calculus for composite minimization.

Holds the composite objective f(x) + g(Ax) with sigma-strongly convex f and
prox-friendly g, the smooth/nonsmooth split of its (negated) dual, primal
recovery maps, and the objective evaluations that the solver and certificate
layers consume.  All vectors are dense 1-D float64 arrays; operators may be
dense matrices or matrix-free closures behind the same contract.  Every
type here is immutable after construction (the norm estimate is computed up
front, there are no shared mutable caches), so instances are safe for
simultaneous read-only use from multiple threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "INF",
    "Array",
    "CapabilityError",
    "CompositeProblem",
    "DualProxError",
    "LinearOperator",
    "PowerIterationError",
    "ProxOracle",
    "StronglyConvexOracle",
    "UnboundedBelowError",
    "estimate_operator_norm",
    "eval_dual",
    "eval_primal",
    "ext_add",
    "ext_sub",
    "grad_dual_smooth",
    "is_finite",
    "lagrangian_gap_identity",
    "primal_from_dual",
    "z_from_dual",
]

Array = np.ndarray

# Extended reals: indicator-type functions return +inf through ordinary IEEE
# doubles.  The helpers below keep arithmetic saturating and NaN-free (the
# only hazard is inf - inf, which is a logic error here, never a value).
INF = math.inf


def is_finite(x: float) -> bool:
    return math.isfinite(x)


def ext_add(a: float, b: float) -> float:
    """Saturating extended-real addition; -inf operands are rejected."""
    if a == -INF or b == -INF:
        raise ValueError("extended-real values are bounded below; got -inf")
    if a == INF or b == INF:
        return INF
    return a + b


def ext_sub(a: float, b: float) -> float:
    """a - b with b required finite, so the result is never NaN."""
    if not math.isfinite(b):
        raise ValueError("subtrahend must be finite")
    if a == INF:
        return INF
    return a - b


class DualProxError(Exception):
    """Base class for errors raised by this package."""


class PowerIterationError(DualProxError):
    """Spectral-norm estimation did not converge; carries the last estimate."""

    def __init__(self, message: str, last_estimate: float):
        super().__init__(message)
        self.last_estimate = last_estimate


class UnboundedBelowError(DualProxError):
    """An argmin/argmax requested from an oracle is not attained."""


class CapabilityError(DualProxError):
    """An optional oracle needed for the requested evaluation is missing."""


POWER_SEED = 0xDA7A


class LinearOperator:
    """An m x n linear map with adjoint and cached spectral-norm estimate.

    Parameters
    ----------
    n, m : int
        Primal (input) and dual (output) dimensions.
    forward : callable
        x -> A x for x of length n.
    adjoint : callable
        y -> A^T y for y of length m.
    norm : float, optional
        Exact spectral norm when known; skips power iteration.
    norm_tol : float, optional
        Relative accuracy requested from power iteration.
    """

    def __init__(self, n: int, m: int,
                 forward: Callable[[Array], Array],
                 adjoint: Callable[[Array], Array],
                 norm: float | None = None, norm_tol: float = 1e-8):
        if n < 1 or m < 1:
            raise ValueError("operator dimensions must be >= 1")
        self.n = int(n)
        self.m = int(m)
        self._forward = forward
        self._adjoint = adjoint
        self.norm_tol = float(norm_tol)
        if norm is not None:
            self.norm = float(norm)
        else:
            self.norm = estimate_operator_norm(self, tol=self.norm_tol)

    def __call__(self, x: Array) -> Array:
        return self._forward(np.asarray(x, dtype=float))

    def adjoint(self, y: Array) -> Array:
        return self._adjoint(np.asarray(y, dtype=float))

    @classmethod
    def from_matrix(cls, a: Array, norm: float | None = None,
                    norm_tol: float = 1e-8) -> "LinearOperator":
        a = np.asarray(a, dtype=float)
        if a.ndim != 2:
            raise ValueError("matrix operator must be 2-D")
        m, n = a.shape
        return cls(n, m, lambda x: a @ x, lambda y: a.T @ y,
                   norm=norm, norm_tol=norm_tol)


def estimate_operator_norm(op: LinearOperator, tol: float = 1e-8,
                           max_iters: int = 10_000,
                           seed: int = POWER_SEED) -> float:
    """Estimate the spectral norm of ``op`` by power iteration on A^T A.

    Deterministic for a fixed seed.  Converges when the singular-value
    estimate is stable to well below ``tol`` over several iterations, which
    at desk scale certifies |est - ||A||| / ||A|| <= tol.

    Raises
    ------
    PowerIterationError
        If the estimate has not stabilized within ``max_iters``; the
        exception carries the last Rayleigh-quotient-based estimate.
    """
    if not (0.0 < tol < 1.0):
        raise ValueError("tol must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(op.n)
    v /= np.linalg.norm(v)
    est_prev = -1.0
    est = 0.0
    stable = 0
    for _ in range(max_iters):
        w = op.adjoint(op(v))
        rq = float(v @ w)  # Rayleigh quotient of A^T A at unit v
        est = math.sqrt(max(rq, 0.0))
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0  # v in the null space of A; only the zero map here
        v = w / nw
        # 1e-3 safety factor guards against slow convergence with clustered
        # top singular values; require the plateau three times in a row.
        if abs(est - est_prev) <= 1e-3 * tol * max(est, 1e-300):
            stable += 1
            if stable >= 3:
                return est
        else:
            stable = 0
        est_prev = est
    raise PowerIterationError(
        f"power iteration did not stabilize in {max_iters} iterations "
        f"(last estimate {est:.6e})", last_estimate=est)


@dataclass(frozen=True)
class StronglyConvexOracle:
    """Oracle for a sigma-strongly convex function f.

    ``conj_argmax`` maps u to argmax_x {<u, x> - f(x)}, which is single
    valued by strong convexity and must be deterministic.  ``subgrad`` is an
    optional subgradient selection used only by property tests.
    """

    sigma: float
    value: Callable[[Array], float]
    conj_argmax: Callable[[Array], Array]
    subgrad: Optional[Callable[[Array], Array]] = None

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("strong-convexity modulus must be positive")


@dataclass(frozen=True)
class ProxOracle:
    """Oracle for a proper closed convex g with an easy scaled prox map.

    ``prox(c, w)`` returns argmin_z {c g(z) + 0.5 ||z - w||^2} for c > 0.
    ``gamma`` is the supremum of subgradient norms of g (+inf when
    unbounded, e.g. indicators).  ``conj_value`` evaluates the convex
    conjugate g*; ``conj_argmax`` maps u to argmax_z {<u, z> - g(z)} and
    raises UnboundedBelowError when the sup is not attained.  Both conjugate
    entries are optional and declared per problem.
    """

    value: Callable[[Array], float]
    prox: Callable[[float, Array], Array]
    gamma: float = INF
    conj_value: Optional[Callable[[Array], float]] = None
    conj_argmax: Optional[Callable[[Array], Array]] = None


@dataclass(frozen=True)
class CompositeProblem:
    """Bundle of operator A, strongly convex f, prox-friendly g.

    ``grad_lipschitz`` is the Lipschitz constant ||A||^2 / sigma of the
    smooth dual gradient, derived at construction from the operator's cached
    norm estimate.  ``gamma_H`` optionally declares a finite bound on the
    subgradient norms of the full objective over its effective domain;
    certificates needing it are skipped when it is +inf.  ``dual_box_qp``
    optionally carries structure for the exact reference enumerator.
    """

    op: LinearOperator
    f: StronglyConvexOracle
    g: ProxOracle
    gamma_H: float = INF
    name: str = ""
    dual_box_qp: Optional[object] = None
    grad_lipschitz: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "grad_lipschitz",
                           self.op.norm ** 2 / self.f.sigma)


def primal_from_dual(problem: CompositeProblem, y: Array) -> Array:
    """Recover the primal point x(y) = argmax_x {<A^T y, x> - f(x)}."""
    y = np.asarray(y, dtype=float)
    return problem.f.conj_argmax(problem.op.adjoint(y))


def z_from_dual(problem: CompositeProblem, y: Array,
                prox_context: tuple[Array, float] | None = None) -> Array:
    """Recover one minimizer z(y) of <y, z> + g(z).

    When ``y`` is a prox-gradient output p_L(y_base), pass
    ``prox_context=(y_base, L)`` and the minimizer is obtained exactly as
    A x(y_base) + L (y - y_base), with no conjugate oracle needed.
    Otherwise the conjugate-argmax oracle of g is used and an
    UnboundedBelowError propagates when the minimum is not attained.
    """
    y = np.asarray(y, dtype=float)
    if prox_context is not None:
        y_base, step_l = prox_context
        y_base = np.asarray(y_base, dtype=float)
        x = primal_from_dual(problem, y_base)
        return problem.op(x) + float(step_l) * (y - y_base)
    if problem.g.conj_argmax is None:
        raise CapabilityError(
            "problem declares no conjugate-argmax oracle for g; supply a "
            "prox_context or use a prox output")
    return problem.g.conj_argmax(-y)


def grad_dual_smooth(problem: CompositeProblem, y: Array) -> Array:
    """Gradient of the smooth dual part at y: A x(y)."""
    return problem.op(primal_from_dual(problem, y))


def eval_dual(problem: CompositeProblem, y: Array,
              companion_z: Array | None = None) -> float:
    """Evaluate the negated dual objective at y.

    Returns F(y) + G(y) where F(y) = <y, A x(y)> - f(x(y)) and
    G(y) = -<y, z(y)> - g(z(y)).  The minimizer z(y) is taken from
    ``companion_z`` when given (always available at prox outputs), else from
    the conjugate oracle of g.

    Raises
    ------
    CapabilityError
        If neither a companion minimizer nor a conjugate oracle is
        available.
    """
    y = np.asarray(y, dtype=float)
    x = primal_from_dual(problem, y)
    f_part = float(y @ problem.op(x)) - problem.f.value(x)
    if companion_z is not None:
        z = np.asarray(companion_z, dtype=float)
        g_part = -float(y @ z) - problem.g.value(z)
    elif problem.g.conj_value is not None:
        g_part = problem.g.conj_value(-y)
    else:
        raise CapabilityError(
            "dual evaluation off the prox path needs the conjugate oracle "
            "of g or a companion minimizer")
    return ext_add(f_part, g_part)


def eval_primal(problem: CompositeProblem, x: Array) -> float:
    """Evaluate the composite objective f(x) + g(Ax); may return +inf."""
    x = np.asarray(x, dtype=float)
    return ext_add(problem.f.value(x), problem.g.value(problem.op(x)))


def lagrangian_gap_identity(problem: CompositeProblem, y: Array,
                            x_of_y: Array, z_of_y: Array) -> tuple[float, float]:
    """Both sides of the split-gap identity at a dual point.

    For x(y), z(y) produced by the recovery maps at the same y, the split
    objective satisfies f(x(y)) + g(z(y)) - q(y) = <y, A x(y) - z(y)> where
    q is the dual function.  Returns (lhs, rhs) for equality testing.
    """
    y = np.asarray(y, dtype=float)
    x = np.asarray(x_of_y, dtype=float)
    z = np.asarray(z_of_y, dtype=float)
    split_obj = ext_add(problem.f.value(x), problem.g.value(z))
    q = -eval_dual(problem, y, companion_z=z)
    lhs = ext_sub(split_obj, q)
    rhs = float(y @ (problem.op(x) - z))
    return lhs, rhs
