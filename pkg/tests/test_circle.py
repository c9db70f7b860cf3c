import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyclo_extremal.circle import (
    TWO_PI,
    CircleProfile,
    binary_a,
    binary_witness,
    check_fnp_identity,
    circle_profile,
    compute_D,
    compute_L,
    derivative_at_zero,
    eval_F,
    eval_F_rational,
    eval_phi_circle,
    maximize_F,
)
from cyclo_extremal.cyclo_poly import phi_coefficients
from cyclo_extremal.errors import BudgetExceeded, InvalidZeroIndex, ScanBudgetExceeded
from cyclo_extremal.numtheory import parse_squarefree_odd

N = parse_squarefree_odd


def mp_F(n, x, dps=40):
    """High-precision F_n with the sin(a x)/sin(b x) = a/b convention as a limit."""
    with mpmath.workdps(dps):
        x = mpmath.mpf(x)
        val = mpmath.mpf(1)
        for d, s in N(n).divisors:
            v = mpmath.sin(d * x / 2)
            val *= v if s == 1 else 1 / v
        return float(val)


def test_values_at_special_points():
    assert eval_F(N(5), 0.0) == 5.0
    assert eval_F(N(15), 0.0) == 1.0
    assert eval_F(N(1), 0.0) == 0.0
    assert abs(eval_F(N(15), math.pi)) == pytest.approx(1.0)
    assert abs(eval_F(N(15), TWO_PI / 15)) < 1e-12
    assert eval_F_rational(N(15), [1], 15)[0] == 0.0


@pytest.mark.parametrize("n", [3, 15, 105, 1155, 3 * 5 * 7 * 11 * 13])
def test_matches_high_precision_and_polynomial(n):
    rng = np.random.default_rng(n)
    poly = phi_coefficients(N(n))
    for x in rng.uniform(0, TWO_PI, 20):
        f = float(eval_F(N(n), x))
        assert f == pytest.approx(mp_F(n, x), rel=1e-12, abs=1e-12)
        assert abs(f) == pytest.approx(eval_phi_circle(poly, x), rel=1e-12, abs=1e-12)


def test_large_divisor_accuracy():
    n = 3 * 5 * 7 * 11 * 13 * 17
    for x in (0.1234567, 2.718281828, 5.5):
        assert float(eval_F(N(n), x)) == pytest.approx(mp_F(n, x), rel=1e-11)


def test_rational_limits_match_floats_nearby():
    n = N(105)
    for t, m in ((3, 105), (2, 15), (1, 6), (7, 30)):
        exact = float(eval_F_rational(n, [t], m)[0])
        x = TWO_PI * t / m
        assert exact == pytest.approx(mp_F(105, x + 1e-20, dps=60), rel=1e-9, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([3, 15, 21, 35, 105, 165]), st.sampled_from([7, 11, 13, 17, 19, 23]),
       st.floats(min_value=0.01, max_value=6.2))
def test_product_identity(n0, p, x):
    if n0 % p == 0:
        return
    n = N(n0)
    lhs = float(eval_F(n.extend(p), x))
    rhs = float(eval_F(n, p * x)) / float(eval_F(n, x))
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


def test_derivative_at_zero():
    assert derivative_at_zero(N(3), 1) == pytest.approx(math.sqrt(3))
    assert derivative_at_zero(N(1), 0) == 0.5
    with pytest.raises(InvalidZeroIndex):
        derivative_at_zero(N(15), 3)
    with pytest.raises(InvalidZeroIndex):
        derivative_at_zero(N(15), 15)
    # f_p(x0) = p / (2 sin(x0/2)) in absolute value, since F_p = sin(px/2)/sin(x/2)
    for t in range(1, 7):
        assert derivative_at_zero(N(7), t) == pytest.approx(7 / (2 * math.sin(math.pi * t / 7)))


def test_compute_D():
    D, t0 = compute_D(N(5))
    assert t0 == 2 and D == pytest.approx(5 / (2 * math.sin(2 * math.pi / 5)))
    assert compute_D(N(1)) == (0.5, 0)
    D, t0 = compute_D(N(105))
    all_t = [t for t in range(1, 53) if math.gcd(t, 105) == 1]
    vals = [derivative_at_zero(N(105), t) for t in all_t]
    assert D == min(vals) and t0 == all_t[vals.index(min(vals))]
    with pytest.raises(ScanBudgetExceeded):
        compute_D(N(105), scan_budget=10)


def test_L_small_cases():
    assert compute_L(N(1)) == (1.0, math.pi)
    assert compute_L(N(5)) == (5.0, 0.0)
    assert compute_L(N(13))[0] == pytest.approx(13.0, rel=1e-14)


def test_L_against_dense_scan():
    for n0 in (15, 35, 105):
        L, x = compute_L(N(n0))
        xs = np.linspace(0, math.pi, 400001)
        dense = np.abs(eval_F(N(n0), xs)).max()
        assert L >= dense - 1e-9
        assert L == pytest.approx(dense, rel=1e-6)
        assert abs(float(eval_F(N(n0), x))) == L


def test_L_grid_convergence_and_monotone():
    for n0 in (15, 105, 1155):
        a = compute_L(N(n0), 16)[0]
        b = compute_L(N(n0), 32)[0]
        assert abs(a - b) <= 1e-9
        assert b >= a - 1e-12


def test_seeded_scope_and_budget():
    n = N(105)
    with pytest.raises(BudgetExceeded):
        maximize_F(n, eval_cap=10)
    _, x_M = compute_L(n)
    res = maximize_F(n, seeds=[x_M + 1e-3], eval_cap=10)
    assert res.scope == "seeded"
    assert res.L == pytest.approx(compute_L(n)[0], rel=1e-12)


def test_threads_do_not_change_results():
    n = N(3 * 5 * 7 * 11 * 13)
    assert maximize_F(n, workers=1) == maximize_F(n, workers=3)
    assert compute_D(n, workers=1) == compute_D(n, workers=3)


def test_profile_round_trip():
    prof = circle_profile(N(35))
    assert CircleProfile.from_json(prof.to_json()) == prof
    assert prof.to_json()["n"] == "35"


def test_binary_witness():
    assert binary_a(3, 5) == -1
    assert binary_a(5, 7) == -1
    assert binary_a(3, 7) == 1
    for p1, p2 in ((3, 5), (5, 7), (5, 17), (7, 23), (11, 13)):
        w = binary_witness(p1, p2)
        assert (p2 + 2 * w.a) % p1 == 0 and 2 * abs(w.a) < p1
        assert w.measured >= w.bound
        assert compute_L(N(p1 * p2))[0] >= w.measured - 1e-12
    assert binary_witness(3, 5).bound == pytest.approx(20 / math.pi**2)
    with pytest.raises(ValueError):
        binary_witness(5, 3)


def test_fnp_identity():
    for n0, p, t1 in ((15, 7, 1), (35, 11, 2), (105, 13, 4), (3, 5, 7)):
        lhs, rhs = check_fnp_identity(N(n0), p, t1)
        assert lhs == pytest.approx(rhs, rel=1e-9)
    with pytest.raises(ValueError):
        check_fnp_identity(N(15), 5, 1)
