"""Dual proximal gradient solvers with numerical convergence certificates.

Solves min_x f(x) + g(Ax) for sigma-strongly convex f and prox-friendly g
by applying plain (DPG), classically accelerated (FDPG), or
generalized-momentum (GFDPG) proximal gradient steps to the dual, recovers
primal iterates, and certifies every convergence bound the methods carry
against independently computed reference optima.
"""

from .core import (INF, CapabilityError, CompositeProblem, DualProxError,
                   LinearOperator, PowerIterationError, ProxOracle,
                   StronglyConvexOracle, UnboundedBelowError,
                   estimate_operator_norm, eval_dual, eval_primal,
                   grad_dual_smooth, lagrangian_gap_identity,
                   primal_from_dual, z_from_dual)
from .schedules import Schedule, ScheduleError, fista_momentum, make_schedule
from .solvers import (BacktrackingError, IterateRecord, SolverAbort,
                      SolverReport, StepRule, backtracking_search,
                      backtracking_step, dpg_step, fixed_step,
                      gfdpg_momentum, prox_form_step, run_solver)
from .diagnostics import (BoundCertificate, RateFit, ReferenceSolution,
                          certificate_suite, fit_rate)
from .problems import (BoxSet, HalfspaceSet, IntersectionProjSpec,
                       RandomBoxQpSpec, ResourceAllocSpec, Tv1dSpec,
                       builtin_problem, load_problem_file, make_instance,
                       reference_solve)

__version__ = "0.1.0"
