"""Momentum schedules: generation, validity, and the classic identities."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dualprox.schedules import (Schedule, ScheduleError, fista_momentum,
                                make_schedule)
from dualprox.solvers import gfdpg_momentum


def test_fista_momentum_values():
    assert fista_momentum(1.0) == pytest.approx((1 + math.sqrt(5)) / 2, abs=1e-10)
    assert fista_momentum(1.618033988749895) == pytest.approx(2.193527085331054,
                                                              abs=1e-12)


def test_fista_momentum_grows_by_half():
    t = 1.0
    for _ in range(50):
        t_next = fista_momentum(t)
        assert t_next >= t + 0.5 - 1e-12
        t = t_next


def test_fista_square_equals_running_sum():
    sched = make_schedule("fista")
    running = 0.0
    for k in range(101):
        running += sched.t(k)
        assert abs(sched.t(k) ** 2 - running) <= 1e-10
        assert sched.T(k) == pytest.approx(running, abs=1e-12)


def test_poly_a3_values():
    sched = make_schedule("poly", a=3)
    ts = [sched.t(k) for k in range(4)]
    Ts = [sched.T(k) for k in range(4)]
    assert ts == pytest.approx([1, 4 / 3, 5 / 3, 2], abs=1e-14)
    assert Ts == pytest.approx([1, 7 / 3, 4, 6], abs=1e-14)


def test_poly_a2_is_valid():
    sched = make_schedule("poly", a=2)
    for k in range(200):
        assert sched.t(k) ** 2 <= sched.T(k) * (1 + 1e-12)


def test_poly_small_a_eventually_invalid():
    sched = make_schedule("poly", a=1)
    with pytest.raises(ScheduleError):
        sched.t(50)


def test_poly_requires_positive_a():
    with pytest.raises(ScheduleError):
        make_schedule("poly", a=0.0)
    with pytest.raises(ScheduleError):
        make_schedule("poly")


def test_fixed_horizon_n6_values():
    sched = make_schedule("fixed_horizon", N=6)
    ts = [sched.t(k) for k in range(7)]
    assert ts[:3] == pytest.approx([1.0, 1.618033988749895, 2.193527085331054],
                                   abs=1e-12)
    assert ts[3:] == pytest.approx([2.0, 1.5, 1.0, 0.5], abs=1e-14)
    with pytest.raises(ScheduleError):
        sched.t(7)


def test_fixed_horizon_validity_at_scale():
    for n in (2, 10, 100, 500):
        sched = make_schedule("fixed_horizon", N=n)
        for k in range(n + 1):
            assert sched.t(k) > 0
            assert sched.t(k) ** 2 <= sched.T(k) * (1 + 1e-9) + 1e-12


def test_fixed_horizon_requires_budget():
    with pytest.raises(ScheduleError):
        make_schedule("fixed_horizon", N=1)
    with pytest.raises(ScheduleError):
        make_schedule("fixed_horizon")


def test_custom_accepts_valid_list():
    sched = make_schedule("custom", values=[1.0, 1.0, 1.0, 1.5])
    assert sched.T(3) == pytest.approx(4.5)
    assert sched.horizon == 3


def test_custom_rejections_name_first_offender():
    with pytest.raises(ScheduleError, match="k = 2"):
        make_schedule("custom", values=[1.0, 1.0, 3.0])
    with pytest.raises(ScheduleError, match="k = 1"):
        make_schedule("custom", values=[1.0, -0.5])
    with pytest.raises(ScheduleError):
        make_schedule("custom", values=[1.5, 1.0])  # t0 out of (0, 1]
    with pytest.raises(ScheduleError):
        make_schedule("custom", values=[])


def test_unknown_kind():
    with pytest.raises(ScheduleError):
        make_schedule("geometric")


@given(st.lists(st.floats(min_value=0.05, max_value=1.0), min_size=1, max_size=30),
       st.floats(min_value=0.05, max_value=1.0))
def test_custom_fractional_lists_are_valid(fracs, t0):
    # t_k chosen as a fraction of the largest valid weight keeps t_k^2 <= T_k
    values = [t0]
    total = t0
    for frac in fracs:
        t_max = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * total))
        t = frac * t_max
        values.append(t)
        total += t
    sched = make_schedule("custom", values=values)
    for k in range(len(values)):
        assert sched.t(k) ** 2 <= sched.T(k) * (1 + 1e-9) + 1e-12


def test_gfdpg_momentum_poly_k1_is_plain_iterate(rng):
    y1 = rng.standard_normal(4)
    y0 = rng.standard_normal(4)
    w0 = y0.copy()
    # t0 = T0 = 1: both extrapolation coefficients vanish
    w1 = gfdpg_momentum(y1, y0, w0, 1.0, 4 / 3, 1.0, 7 / 3)
    assert np.allclose(w1, y1, atol=1e-15)


def test_gfdpg_momentum_poly_k2_coefficients():
    # poly a=3 at k=2: coefficients 5/16 and -25/144 from the table formula
    y_k = np.array([1.0, 0.0])
    y_prev = np.array([0.0, 0.0])
    w_prev = np.array([0.0, 1.0])
    w = gfdpg_momentum(y_k, y_prev, w_prev, 4 / 3, 5 / 3, 7 / 3, 4.0)
    delta = w - y_k  # = c1*(y_k - y_prev) + c2*(y_k - w_prev)
    c2 = -delta[1]
    c1 = delta[0] - c2
    assert c1 == pytest.approx(5 / 16, abs=1e-14)
    assert c2 == pytest.approx(-25 / 144, abs=1e-14)


def test_gfdpg_momentum_reduces_to_fista_rule(rng):
    sched = make_schedule("fista")
    y_k = rng.standard_normal(3)
    y_prev = rng.standard_normal(3)
    w_prev = rng.standard_normal(3)
    for k in range(1, 51):
        t_prev, t_k = sched.t(k - 1), sched.t(k)
        T_prev, T_k = sched.T(k - 1), sched.T(k)
        general = gfdpg_momentum(y_k, y_prev, w_prev, t_prev, t_k, T_prev, T_k)
        classic = y_k + ((t_prev - 1) / t_k) * (y_k - y_prev)
        assert np.allclose(general, classic, atol=1e-12, rtol=1e-12)


def test_schedule_cache_is_stable():
    sched = make_schedule("poly", a=3)
    first = [sched.t(k) for k in range(10)]
    again = [sched.t(k) for k in range(10)]
    assert first == again


def test_schedule_rejects_negative_index():
    with pytest.raises(IndexError):
        make_schedule("fista").t(-1)


def test_direct_schedule_t0_validation():
    with pytest.raises(ScheduleError):
        Schedule("x", lambda k, ts: 1.0, t0=0.0)
