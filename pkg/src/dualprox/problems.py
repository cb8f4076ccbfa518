"""Gallery of concrete composite problems and brute-force reference solvers.

Every instance ships closed-form oracles (exact conjugate argmax, exact
prox, conjugate evaluation where declared) so solver traces can be certified
without numerical fitting.  Reference optima come either from exhaustive
active-set enumeration of the dual box QP (exact, small duals only) or from
a long high-precision accelerated run, both independent of the solver
configuration under test.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (INF, CapabilityError, CompositeProblem, DualProxError,
                   LinearOperator, ProxOracle, StronglyConvexOracle,
                   UnboundedBelowError, eval_dual, eval_primal, ext_add,
                   primal_from_dual)
from .diagnostics import ReferenceSolution
from .solvers import dpg_step
from .schedules import fista_momentum

__all__ = [
    "BoxSet",
    "HalfspaceSet",
    "IntersectionProjSpec",
    "RandomBoxQpSpec",
    "ResourceAllocSpec",
    "Tv1dSpec",
    "builtin_problem",
    "BUILTIN_NAMES",
    "load_problem_file",
    "make_instance",
    "parse_vector",
    "reference_solve",
]

# Indicator oracles accept this much constraint violation before reporting
# +inf, so that prox outputs and recovered optima stay in-domain under
# roundoff while genuinely infeasible points are still flagged.
FEAS_ATOL = 1e-9


def _soft_threshold(w, tau):
    return np.sign(w) * np.maximum(np.abs(w) - tau, 0.0)


# ---------------------------------------------------------------------------
# f oracles

def quadratic_distance_oracle(d) -> StronglyConvexOracle:
    """f(x) = 0.5 ||x - d||^2; conjugate argmax is d + u."""
    d = np.asarray(d, dtype=float).copy()
    return StronglyConvexOracle(
        sigma=1.0,
        value=lambda x: 0.5 * float(np.dot(x - d, x - d)),
        conj_argmax=lambda u: d + u,
        subgrad=lambda x: x - d)


def diag_quadratic_oracle(q, b) -> StronglyConvexOracle:
    """f(x) = 0.5 x^T diag(q) x - b^T x with q >= sigma > 0 componentwise."""
    q = np.asarray(q, dtype=float).copy()
    b = np.asarray(b, dtype=float).copy()
    if np.any(q <= 0):
        raise ValueError("diagonal quadratic needs strictly positive weights")
    return StronglyConvexOracle(
        sigma=float(q.min()),
        value=lambda x: 0.5 * float(x @ (q * x)) - float(b @ x),
        conj_argmax=lambda u: (u + b) / q,
        subgrad=lambda x: q * x - b)


def box_utilities_oracle(alpha, beta, lower, upper) -> StronglyConvexOracle:
    """Negated separable concave utilities restricted to a box.

    f(x) = sum_j (0.5 beta_j x_j^2 - alpha_j x_j) over [lower, upper], +inf
    outside; the conjugate argmax clips the unconstrained stationary point
    to the box, componentwise.
    """
    alpha = np.asarray(alpha, dtype=float).copy()
    beta = np.asarray(beta, dtype=float).copy()
    lower = np.asarray(lower, dtype=float).copy()
    upper = np.asarray(upper, dtype=float).copy()
    if np.any(beta <= 0):
        raise ValueError("utility curvatures must be positive")
    if np.any(lower > upper):
        raise ValueError("empty box")

    def value(x):
        if np.any(x < lower - FEAS_ATOL) or np.any(x > upper + FEAS_ATOL):
            return INF
        return 0.5 * float(x @ (beta * x)) - float(alpha @ x)

    return StronglyConvexOracle(
        sigma=float(beta.min()),
        value=value,
        conj_argmax=lambda u: np.clip((u + alpha) / beta, lower, upper),
        subgrad=lambda x: beta * x - alpha)


# ---------------------------------------------------------------------------
# g oracles

def l1_prox_oracle(lam: float, m: int) -> ProxOracle:
    """g(z) = lam ||z||_1: soft-threshold prox, box-indicator conjugate."""
    lam = float(lam)
    radius = lam * (1.0 + 1e-12) + 1e-15

    def conj_value(u):
        return 0.0 if float(np.max(np.abs(u), initial=0.0)) <= radius else INF

    def conj_argmax(u):
        if float(np.max(np.abs(u), initial=0.0)) > radius:
            raise UnboundedBelowError("linear term dominates the l1 penalty")
        return np.zeros_like(np.asarray(u, dtype=float))

    return ProxOracle(
        value=lambda z: lam * float(np.sum(np.abs(z))),
        prox=lambda c, w: _soft_threshold(w, c * lam),
        gamma=lam * math.sqrt(m),
        conj_value=conj_value,
        conj_argmax=conj_argmax)


def box_indicator_oracle(lo, hi) -> ProxOracle:
    """g = indicator of the box [lo, hi]; prox is the clip projection."""
    lo = np.asarray(lo, dtype=float).copy()
    hi = np.asarray(hi, dtype=float).copy()
    if np.any(lo > hi):
        raise ValueError("empty box")

    def value(z):
        if np.any(z < lo - FEAS_ATOL) or np.any(z > hi + FEAS_ATOL):
            return INF
        return 0.0

    def conj_value(u):
        return float(hi @ np.maximum(u, 0.0) + lo @ np.minimum(u, 0.0))

    return ProxOracle(
        value=value,
        prox=lambda c, w: np.clip(w, lo, hi),
        gamma=INF,
        conj_value=conj_value,
        conj_argmax=lambda u: np.where(np.asarray(u, dtype=float) >= 0.0, hi, lo))


def upper_limit_indicator_oracle(b) -> ProxOracle:
    """g = indicator of {z <= b}; prox is the componentwise min with b."""
    b = np.asarray(b, dtype=float).copy()

    def value(z):
        return 0.0 if np.all(z <= b + FEAS_ATOL) else INF

    def conj_value(u):
        u = np.asarray(u, dtype=float)
        return float(u @ b) if np.all(u >= -FEAS_ATOL) else INF

    def conj_argmax(u):
        u = np.asarray(u, dtype=float)
        if np.any(u < -FEAS_ATOL):
            raise UnboundedBelowError("support point of a lower-unbounded set "
                                 "does not exist for this direction")
        return b.copy()

    return ProxOracle(value=value,
                      prox=lambda c, w: np.minimum(w, b),
                      gamma=INF, conj_value=conj_value,
                      conj_argmax=conj_argmax)


@dataclass(frozen=True, eq=False)
class BoxSet:
    lo: np.ndarray
    hi: np.ndarray

    def project(self, w):
        return np.clip(w, self.lo, self.hi)

    def contains(self, z):
        return bool(np.all(z >= self.lo - FEAS_ATOL)
                    and np.all(z <= self.hi + FEAS_ATOL))

    def support(self, u):
        return float(self.hi @ np.maximum(u, 0.0) + self.lo @ np.minimum(u, 0.0))

    def support_point(self, u):
        return np.where(np.asarray(u, dtype=float) >= 0.0, self.hi, self.lo)


@dataclass(frozen=True, eq=False)
class HalfspaceSet:
    normal: np.ndarray
    offset: float

    def project(self, w):
        a = self.normal
        excess = float(a @ w) - self.offset
        if excess <= 0.0:
            return np.asarray(w, dtype=float).copy()
        return w - (excess / float(a @ a)) * a

    def contains(self, z):
        scale = 1.0 + abs(self.offset)
        return float(self.normal @ z) <= self.offset + FEAS_ATOL * scale

    def _ray_coefficient(self, u):
        # the support is finite only along the outward normal direction
        a = self.normal
        t = float(a @ u) / float(a @ a)
        if float(np.linalg.norm(u - t * a)) > 1e-9 * (1.0 + float(np.linalg.norm(u))):
            return None
        if t < -1e-12:
            return None
        return max(t, 0.0)

    def support(self, u):
        t = self._ray_coefficient(u)
        return INF if t is None else t * self.offset

    def support_point(self, u):
        t = self._ray_coefficient(u)
        if t is None:
            raise UnboundedBelowError("support point of a halfspace exists only "
                                 "along its outward normal")
        return (self.offset / float(self.normal @ self.normal)) * self.normal


def block_indicator_oracle(sets, block_len: int) -> ProxOracle:
    """g(z_1,...,z_r) = sum of set indicators; prox is blockwise projection."""
    sets = tuple(sets)

    def blocks(z):
        return np.asarray(z, dtype=float).reshape(len(sets), block_len)

    def value(z):
        return 0.0 if all(s.contains(b) for s, b in zip(sets, blocks(z))) else INF

    def prox(c, w):
        return np.concatenate([s.project(b) for s, b in zip(sets, blocks(w))])

    def conj_value(u):
        total = 0.0
        for s, b in zip(sets, blocks(u)):
            total = ext_add(total, s.support(b))
        return total

    def conj_argmax(u):
        return np.concatenate([s.support_point(b)
                               for s, b in zip(sets, blocks(u))])

    return ProxOracle(value=value, prox=prox, gamma=INF,
                      conj_value=conj_value, conj_argmax=conj_argmax)


# ---------------------------------------------------------------------------
# operators

def difference_operator(n: int) -> LinearOperator:
    """The (n-1) x n first-difference map with its exact spectral norm."""
    if n < 2:
        raise ValueError("difference operator needs n >= 2")

    def forward(x):
        return np.diff(x)

    def adjoint(y):
        out = np.zeros(n)
        out[:-1] -= y
        out[1:] += y
        return out

    return LinearOperator(n, n - 1, forward, adjoint,
                          norm=math.sqrt(2.0 + 2.0 * math.cos(math.pi / n)))


def stacked_identity_operator(n: int, r: int) -> LinearOperator:
    """r identity blocks stacked vertically; exact norm sqrt(r)."""
    return LinearOperator(
        n, r * n,
        lambda x: np.tile(np.asarray(x, dtype=float), r),
        lambda y: np.asarray(y, dtype=float).reshape(r, n).sum(axis=0),
        norm=math.sqrt(r))


# ---------------------------------------------------------------------------
# instance specs

@dataclass(frozen=True, eq=False)
class Tv1dSpec:
    """1-D total-variation denoising: f = 0.5||x-d||^2, g = lam ||.||_1 of
    first differences."""

    d: np.ndarray
    lam: float


@dataclass(frozen=True, eq=False)
class IntersectionProjSpec:
    """Projection of d onto an intersection of boxes/halfspaces via copies."""

    d: np.ndarray
    sets: tuple


@dataclass(frozen=True, eq=False)
class ResourceAllocSpec:
    """Box-constrained concave utility maximization under coupled budgets."""

    alpha: np.ndarray
    beta: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    coupling: np.ndarray
    budget: np.ndarray


@dataclass(frozen=True, eq=False)
class RandomBoxQpSpec:
    """Seeded diagonal QP with full-row-rank coupling, l1 or box regularizer."""

    seed: int
    n: int
    m: int
    g_kind: str = "l1"    # "l1" | "box"
    lam: float = 1.0
    z_lo: float = -0.5
    z_hi: float = 0.5
    q_max: float = 10.0


@dataclass(frozen=True, eq=False)
class DualBoxQp:
    """Quadratic structure of the negated dual used by the exact enumerator.

    The smooth dual gradient is lin + hess @ y.  ``kind`` describes the
    nonsmooth part: "l1" constrains y to the box of the given radius,
    "box" contributes a piecewise-linear support term kinked at y = 0 with
    the gradient interval [lo, hi] there.
    """

    hess: np.ndarray
    lin: np.ndarray
    kind: str
    radius: float | None = None
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None


ENUM_MAX_DUAL_DIM = 14


def make_instance(spec) -> CompositeProblem:
    """Build a CompositeProblem with exact oracles from a gallery spec."""
    if isinstance(spec, Tv1dSpec):
        return _make_tv1d(spec)
    if isinstance(spec, IntersectionProjSpec):
        return _make_intersection(spec)
    if isinstance(spec, ResourceAllocSpec):
        return _make_resource(spec)
    if isinstance(spec, RandomBoxQpSpec):
        return _make_box_qp(spec)
    raise TypeError(f"unknown problem spec {type(spec).__name__}")


def _make_tv1d(spec: Tv1dSpec) -> CompositeProblem:
    d = np.asarray(spec.d, dtype=float)
    if not spec.lam > 0:
        raise ValueError("regularization weight must be positive")
    n = d.size
    op = difference_operator(n)
    m = n - 1
    qp = None
    if m <= ENUM_MAX_DUAL_DIM:
        a = np.zeros((m, n))
        idx = np.arange(m)
        a[idx, idx] = -1.0
        a[idx, idx + 1] = 1.0
        qp = DualBoxQp(hess=a @ a.T, lin=a @ d, kind="l1", radius=spec.lam)
    return CompositeProblem(op=op, f=quadratic_distance_oracle(d),
                            g=l1_prox_oracle(spec.lam, m),
                            name="tv1d", dual_box_qp=qp)


def _make_intersection(spec: IntersectionProjSpec) -> CompositeProblem:
    d = np.asarray(spec.d, dtype=float)
    n = d.size
    sets = tuple(spec.sets)
    if not sets:
        raise ValueError("need at least one set")
    op = stacked_identity_operator(n, len(sets))
    return CompositeProblem(op=op, f=quadratic_distance_oracle(d),
                            g=block_indicator_oracle(sets, n),
                            name="intersection_proj")


def _make_resource(spec: ResourceAllocSpec) -> CompositeProblem:
    coupling = np.asarray(spec.coupling, dtype=float)
    if coupling.ndim != 2:
        raise ValueError("coupling must be a matrix")
    n = coupling.shape[1]
    if n > 12:
        raise ValueError("vertex enumeration of gamma_H is limited to n <= 12")
    f = box_utilities_oracle(spec.alpha, spec.beta, spec.lower, spec.upper)
    op = LinearOperator.from_matrix(coupling,
                                    norm=float(np.linalg.norm(coupling, 2)))
    gamma_h = _box_vertex_gradient_bound(np.asarray(spec.alpha, dtype=float),
                                         np.asarray(spec.beta, dtype=float),
                                         np.asarray(spec.lower, dtype=float),
                                         np.asarray(spec.upper, dtype=float))
    return CompositeProblem(op=op, f=f,
                            g=upper_limit_indicator_oracle(spec.budget),
                            gamma_H=gamma_h, name="resource_alloc")


def _box_vertex_gradient_bound(alpha, beta, lower, upper) -> float:
    """Largest utility-gradient norm over the feasible box, by enumerating
    its vertices (the norm is coordinatewise maximal at an endpoint)."""
    best = 0.0
    for corner in itertools.product(*zip(lower, upper)):
        x = np.asarray(corner, dtype=float)
        best = max(best, float(np.linalg.norm(beta * x - alpha)))
    return best


def _make_box_qp(spec: RandomBoxQpSpec) -> CompositeProblem:
    if spec.n < spec.m:
        raise ValueError("need n >= m")
    rng = np.random.default_rng(spec.seed)
    a = rng.standard_normal((spec.m, spec.n))
    q = rng.uniform(1.0, spec.q_max, size=spec.n)
    b = rng.standard_normal(spec.n)
    svals = np.linalg.svd(a, compute_uv=False)
    if svals[-1] <= 1e-10 * svals[0]:
        raise ValueError("sampled coupling matrix is rank deficient")
    op = LinearOperator.from_matrix(a, norm=float(svals[0]))
    hess = a @ (a / q).T
    lin = a @ (b / q)
    if spec.g_kind == "l1":
        g = l1_prox_oracle(spec.lam, spec.m)
        qp = DualBoxQp(hess=hess, lin=lin, kind="l1", radius=spec.lam)
    elif spec.g_kind == "box":
        lo = np.full(spec.m, float(spec.z_lo))
        hi = np.full(spec.m, float(spec.z_hi))
        g = box_indicator_oracle(lo, hi)
        qp = DualBoxQp(hess=hess, lin=lin, kind="box", lo=lo, hi=hi)
    else:
        raise ValueError(f"unknown regularizer kind '{spec.g_kind}'")
    if spec.m > ENUM_MAX_DUAL_DIM:
        qp = None
    return CompositeProblem(op=op, f=diag_quadratic_oracle(q, b), g=g,
                            name=f"random_box_qp(seed={spec.seed})",
                            dual_box_qp=qp)


# ---------------------------------------------------------------------------
# reference solvers

def reference_solve(problem: CompositeProblem, mode: str = "enumerate",
                    tol: float = 1e-12,
                    max_iters: int = 1_000_000) -> ReferenceSolution:
    """Compute a reference dual/primal optimum independent of the solvers.

    ``enumerate`` solves the dual exactly by trying all 3^m active-set
    patterns of its box structure (requires the declared structure and
    m <= 14).  ``longrun`` runs the classic accelerated method with a fixed
    step for up to ``max_iters`` iterations or until the prox-gradient norm
    reaches ``tol``; if the tolerance is missed the result is flagged
    low-precision and certificate slack widens to 10x the residual.
    """
    if mode == "enumerate":
        if problem.op.m > ENUM_MAX_DUAL_DIM:
            raise ValueError(
                f"enumerate mode refused for m = {problem.op.m} > "
                f"{ENUM_MAX_DUAL_DIM}")
        if problem.dual_box_qp is None:
            raise CapabilityError(
                "problem declares no dual box-QP structure; use longrun")
        y_star = _enumerate_dual(problem, problem.dual_box_qp)
        provenance = "active-set enumeration"
    elif mode == "longrun":
        y_star = _longrun_fdpg(problem, tol, max_iters)
        provenance = "long-run"
    else:
        raise ValueError(f"unknown reference mode '{mode}'")
    x_star = primal_from_dual(problem, y_star)
    q_star = eval_dual(problem, y_star)
    h_star = eval_primal(problem, x_star)
    p, _, _ = dpg_step(problem, y_star, problem.grad_lipschitz)
    residual = float(np.linalg.norm(p - y_star))
    gap = ext_add(h_star, q_star)
    return ReferenceSolution(
        y_star=y_star, x_star=x_star, q_tilde_star=q_star, primal_star=h_star,
        provenance=provenance, residual=residual, gap=gap,
        low_precision=(mode == "longrun" and residual > tol))


def _enumerate_dual(problem, qp: DualBoxQp) -> np.ndarray:
    m = qp.hess.shape[0]
    grad_tol = 1e-9 * (1.0 + float(np.linalg.norm(qp.lin)))
    best_val = INF
    best_y = None
    for pattern in itertools.product((-1, 0, 1), repeat=m):
        pattern = np.asarray(pattern)
        y = _pattern_solution(qp, pattern, grad_tol)
        if y is None:
            continue
        val = eval_dual(problem, y)
        if val < best_val:
            best_val = val
            best_y = y
    if best_y is None:
        raise DualProxError("active-set enumeration found no stationary "
                            "feasible pattern")
    return best_y


def _pattern_solution(qp, pattern, grad_tol):
    m = pattern.size
    if qp.kind == "l1":
        lam = qp.radius
        y = np.where(pattern < 0, -lam, np.where(pattern > 0, lam, 0.0)).astype(float)
        free = pattern == 0
        if free.any():
            rhs = -(qp.lin[free] + qp.hess[np.ix_(free, ~free)] @ y[~free])
            try:
                y[free] = np.linalg.solve(qp.hess[np.ix_(free, free)], rhs)
            except np.linalg.LinAlgError:
                return None
            if np.any(np.abs(y[free]) > lam * (1.0 + 1e-12) + 1e-12):
                return None
        grad = qp.lin + qp.hess @ y
        if np.any(grad[pattern < 0] < -grad_tol):
            return None
        if np.any(grad[pattern > 0] > grad_tol):
            return None
        return y
    if qp.kind == "box":
        # nonzero coordinates pin the smooth gradient to a box face of g;
        # zero coordinates must leave it inside [lo, hi]
        y = np.zeros(m)
        nz = pattern != 0
        if nz.any():
            target = np.where(pattern < 0, qp.hi, qp.lo)[nz]
            try:
                y[nz] = np.linalg.solve(qp.hess[np.ix_(nz, nz)],
                                        target - qp.lin[nz])
            except np.linalg.LinAlgError:
                return None
            if np.any(y[pattern < 0] > 1e-12) or np.any(y[pattern > 0] < -1e-12):
                return None
        grad = qp.lin + qp.hess @ y
        zero = ~nz
        if np.any(grad[zero] < qp.lo[zero] - grad_tol):
            return None
        if np.any(grad[zero] > qp.hi[zero] + grad_tol):
            return None
        return y
    raise ValueError(f"unknown dual structure kind '{qp.kind}'")


def _longrun_fdpg(problem, tol, max_iters) -> np.ndarray:
    """Lean fixed-step accelerated run from zero; no trace is kept."""
    L = problem.grad_lipschitz
    y = np.zeros(problem.op.m)
    w = y.copy()
    t = 1.0
    for k in range(1, max_iters + 1):
        y_new, _, _ = dpg_step(problem, w, L)
        step = float(np.linalg.norm(y_new - w))
        t_new = fista_momentum(t)
        w = y_new + ((t - 1.0) / t_new) * (y_new - y)
        y, t = y_new, t_new
        if step <= 0.25 * tol or k % 256 == 0:
            p, _, _ = dpg_step(problem, y, L)
            if float(np.linalg.norm(p - y)) <= tol:
                return y
    return y


# ---------------------------------------------------------------------------
# builtins and the plain-text spec-file format

BUILTIN_NAMES = ("tv1d-toy", "tv1d-const", "tv1d-n64", "boxqp-small",
                 "boxqp-box", "boxqp-tiny", "interproj-toy", "resalloc-toy")


def builtin_problem(name: str, seed: int = 0) -> CompositeProblem:
    """Construct a named gallery instance; random ones derive from ``seed``."""
    key = name.lower()
    if key == "tv1d-toy":
        return make_instance(Tv1dSpec(d=np.array([0.0, 4.0]), lam=1.0))
    if key == "tv1d-const":
        return make_instance(Tv1dSpec(d=np.full(5, 2.5), lam=1.0))
    if key == "tv1d-n64":
        rng = np.random.default_rng(seed)
        return make_instance(Tv1dSpec(d=rng.standard_normal(64), lam=0.5))
    if key == "boxqp-small":
        return make_instance(RandomBoxQpSpec(seed=seed, n=8, m=4))
    if key == "boxqp-box":
        return make_instance(RandomBoxQpSpec(seed=seed, n=8, m=4, g_kind="box"))
    if key == "boxqp-tiny":
        return make_instance(RandomBoxQpSpec(seed=seed, n=6, m=3))
    if key == "interproj-toy":
        sets = (BoxSet(lo=np.array([-1.0, -1.0, -1.0, -1.0]),
                       hi=np.array([0.5, 0.75, 0.5, 1.0])),
                HalfspaceSet(normal=np.array([1.0, 1.0, 1.0, 1.0]), offset=1.2))
        return make_instance(IntersectionProjSpec(
            d=np.array([1.0, 2.0, -0.5, 0.25]), sets=sets))
    if key == "resalloc-toy":
        return make_instance(ResourceAllocSpec(
            alpha=np.array([1.0, 2.0, 1.5]),
            beta=np.array([1.0, 1.5, 2.0]),
            lower=np.zeros(3),
            upper=np.array([1.0, 1.0, 1.0]),
            coupling=np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]]),
            budget=np.array([1.5, 1.2])))
    raise ValueError(f"unknown builtin problem '{name}'; known: "
                     + ", ".join(BUILTIN_NAMES))


def parse_vector(text: str) -> np.ndarray:
    return np.asarray([float(p) for p in text.split(",")], dtype=float)


def _parse_kv_file(path) -> dict:
    entries = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        entries[key.strip()] = value.strip()
    return entries


def load_problem_file(path) -> CompositeProblem:
    """Load an instance from a plain-text key/value spec file.

    One ``key = value`` per line; ``#`` starts a comment; vectors are
    comma-separated decimals and matrices are given row by row as
    ``A_row1``, ``A_row2``, ...
    """
    kv = _parse_kv_file(path)
    kind = kv.get("kind", "").replace("-", "_").lower()
    if kind == "tv1d":
        return make_instance(Tv1dSpec(d=parse_vector(kv["d"]),
                                      lam=float(kv["lam"])))
    if kind == "intersection_proj":
        sets = []
        for i in itertools.count(1):
            tag = kv.get(f"set{i}")
            if tag is None:
                break
            tag = tag.lower()
            if tag == "box":
                sets.append(BoxSet(lo=parse_vector(kv[f"set{i}_lo"]),
                                   hi=parse_vector(kv[f"set{i}_hi"])))
            elif tag == "halfspace":
                sets.append(HalfspaceSet(normal=parse_vector(kv[f"set{i}_a"]),
                                         offset=float(kv[f"set{i}_b"])))
            else:
                raise ValueError(f"unknown set kind '{tag}'")
        return make_instance(IntersectionProjSpec(d=parse_vector(kv["d"]),
                                                  sets=tuple(sets)))
    if kind == "resource_alloc":
        rows = []
        for i in itertools.count(1):
            row = kv.get(f"A_row{i}")
            if row is None:
                break
            rows.append(parse_vector(row))
        return make_instance(ResourceAllocSpec(
            alpha=parse_vector(kv["alpha"]), beta=parse_vector(kv["beta"]),
            lower=parse_vector(kv["lower"]), upper=parse_vector(kv["upper"]),
            coupling=np.vstack(rows), budget=parse_vector(kv["budget"])))
    if kind == "random_box_qp":
        spec = RandomBoxQpSpec(
            seed=int(kv.get("seed", 0)), n=int(kv["n"]), m=int(kv["m"]),
            g_kind=kv.get("g", "l1"), lam=float(kv.get("lam", 1.0)),
            z_lo=float(kv.get("z_lo", -0.5)), z_hi=float(kv.get("z_hi", 0.5)),
            q_max=float(kv.get("q_max", 10.0)))
        return make_instance(spec)
    raise ValueError(f"unknown problem kind '{kind}'")
