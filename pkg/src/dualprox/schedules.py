"""Momentum-parameter schedules for the accelerated dual solvers.

A schedule produces the positive weights t_k and their running sums
T_k = sum_{i<=k} t_i that drive the momentum step.  Every generated entry
must satisfy t_k^2 <= T_k; the classic accelerated sequence attains
equality, polynomial schedules (k+a)/a trade it for faster decay of the
prox-gradient norm, and the fixed-horizon rule front-loads the classic
growth before decaying linearly when the iteration budget is known.
"""

from __future__ import annotations

import math

from .core import DualProxError

__all__ = ["Schedule", "ScheduleError", "fista_momentum", "make_schedule"]


class ScheduleError(DualProxError):
    """A momentum schedule is invalid at some index."""


def fista_momentum(t_prev: float) -> float:
    """Next weight of the classic accelerated sequence, (1+sqrt(1+4t^2))/2."""
    return 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_prev * t_prev))


class Schedule:
    """Lazily generated momentum weights with running sums and validation.

    Entries are cached, so ``t(k)``/``T(k)`` are cheap on re-access and the
    object behaves as immutable (the cache only grows).  Generation raises
    ScheduleError as soon as an invalid entry (t_k <= 0 or t_k^2 > T_k up to
    roundoff slack) would be produced, or when ``k`` exceeds the horizon of
    a finite schedule.
    """

    def __init__(self, kind: str, gen, t0: float, horizon: int | None = None,
                 a: float | None = None, N: int | None = None):
        if not 0.0 < t0 <= 1.0:
            raise ScheduleError(f"t_0 = {t0} must lie in (0, 1]")
        self.kind = kind
        self.a = a
        self.N = N
        self.horizon = horizon
        self._gen = gen
        self._ts = [float(t0)]
        self._Ts = [float(t0)]

    @property
    def t0(self) -> float:
        return self._ts[0]

    def t(self, k: int) -> float:
        self._ensure(k)
        return self._ts[k]

    def T(self, k: int) -> float:
        self._ensure(k)
        return self._Ts[k]

    def _ensure(self, k: int):
        if k < 0:
            raise IndexError("schedule index must be >= 0")
        if self.horizon is not None and k > self.horizon:
            raise ScheduleError(
                f"schedule '{self.kind}' is defined only up to k = {self.horizon}")
        while len(self._ts) <= k:
            j = len(self._ts)
            tj = float(self._gen(j, self._ts))
            Tj = self._Ts[-1] + tj
            if not tj > 0.0:
                raise ScheduleError(f"t_{j} = {tj} must be positive")
            if tj * tj > Tj * (1.0 + 1e-9) + 1e-12:
                raise ScheduleError(
                    f"momentum validity t_k^2 <= T_k fails at k = {j}: "
                    f"t={tj!r}, T={Tj!r}")
            self._ts.append(tj)
            self._Ts.append(Tj)


def make_schedule(kind: str, a: float | None = None, N: int | None = None,
                  values=None) -> Schedule:
    """Build a validated momentum schedule.

    Kinds: ``fista`` (classic accelerated weights, t_k^2 = T_k),
    ``poly`` (t_k = (k+a)/a for a > 0; a > 2 is needed only by the
    k^{-1.5} prox-gradient certificate and is flagged there, not here),
    ``fixed_horizon`` (classic growth for k < floor(N/2), then linear decay
    (N-k+1)/2; defined for k <= N), and ``custom`` (explicit list, rejected
    if some t_k <= 0 or t_k^2 > T_k + 1e-12).
    """
    kind = kind.replace("-", "_").lower()
    if kind == "fista":
        return Schedule("fista", lambda k, ts: fista_momentum(ts[-1]), 1.0)
    if kind == "poly":
        if a is None or not a > 0:
            raise ScheduleError("poly schedule requires a > 0")
        a = float(a)
        return Schedule("poly", lambda k, ts: (k + a) / a, 1.0, a=a)
    if kind == "fixed_horizon":
        if N is None or int(N) < 2:
            raise ScheduleError("fixed_horizon schedule requires N >= 2")
        N = int(N)

        def gen(k, ts):
            if k <= N // 2 - 1:
                return fista_momentum(ts[-1])
            return (N - k + 1) / 2.0

        return Schedule("fixed_horizon", gen, 1.0, horizon=N, N=N)
    if kind == "custom":
        if not values:
            raise ScheduleError("custom schedule requires a nonempty list")
        ts = [float(v) for v in values]
        if not 0.0 < ts[0] <= 1.0:
            raise ScheduleError(f"t_0 = {ts[0]} must lie in (0, 1]")
        running = 0.0
        for k, tk in enumerate(ts):
            running += tk
            if tk <= 0.0:
                raise ScheduleError(f"custom schedule invalid at k = {k}: "
                                    f"t_k = {tk} is not positive")
            if tk * tk > running + 1e-12:
                raise ScheduleError(f"custom schedule invalid at k = {k}: "
                                    f"t_k^2 = {tk * tk!r} exceeds T_k = {running!r}")
        return Schedule("custom", lambda k, _: ts[k], ts[0], horizon=len(ts) - 1)
    raise ScheduleError(f"unknown schedule kind '{kind}'")
