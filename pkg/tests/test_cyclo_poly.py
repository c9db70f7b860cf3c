import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from cyclo_extremal.cyclo_poly import (
    METHODS,
    CycloPoly,
    Order,
    _recursive_division,
    _series_quotient,
    apply_transform,
    height_of,
    height_report,
    lex_compare,
    m_alpha,
    m_bound,
    m_exponents,
    phi_coefficients,
    reduce_radical,
)
from cyclo_extremal.errors import DegreeCapExceeded, LengthMismatch
from cyclo_extremal.numtheory import parse_squarefree_odd

X = sympy.symbols("x")


def sympy_coeffs(n):
    return [int(c) for c in reversed(sympy.Poly(sympy.cyclotomic_poly(n, X), X).all_coeffs())]


ODD_SQUAREFREE = [n for n in range(1, 400, 2) if sympy.ntheory.factor_.core(n) == n]


@pytest.mark.parametrize("method", METHODS)
def test_matches_sympy_oracle(method):
    for n in ODD_SQUAREFREE + [1155, 3315, 15015]:
        assert phi_coefficients(parse_squarefree_odd(n), method).to_ints() == sympy_coeffs(n), n


def test_phi_105():
    poly = phi_coefficients(parse_squarefree_odd(105))
    assert poly.coeffs[7] == -2
    assert poly.degree == 48
    rep = height_of(poly)
    assert (rep.A, rep.degree) == (2, 48)
    assert rep.S == sum(abs(c) for c in sympy_coeffs(105))


def test_phi_1_and_primes():
    assert phi_coefficients(parse_squarefree_odd(1)).to_ints() == [-1, 1]
    assert phi_coefficients(parse_squarefree_odd(7)).to_ints() == [1] * 7


def test_binary_heights_are_one():
    for n in (15, 21, 35, 33, 221, 3 * 997):
        assert height_report(parse_squarefree_odd(n)).A == 1


@pytest.mark.parametrize("n", [2, 4, 6, 9, 12, 18, 20, 45, 90, 210, 225, 360])
def test_reduce_radical_recovers_any_n(n):
    m, t = reduce_radical(n)
    poly = apply_transform(phi_coefficients(m), t, n)
    assert poly.to_ints() == sympy_coeffs(n)


def test_reduce_radical_identity_on_squarefree_odd():
    m, t = reduce_radical(105)
    assert m.value == 105 and t.is_identity


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from([3, 5, 7, 11, 13, 17, 19, 23, 29]), min_size=1, max_size=4, unique=True))
def test_structural_properties(primes):
    n = parse_squarefree_odd(math.prod(primes))
    poly = phi_coefficients(n)
    c = poly.to_ints()
    assert c == c[::-1]
    assert poly.degree == n.phi
    assert sum(c) == (primes[0] if len(primes) == 1 else 1)
    rep = height_of(poly)
    assert rep.A <= m_bound(n)


def test_object_dtype_route_agrees_with_int64():
    n = parse_squarefree_odd(3 * 5 * 7 * 11 * 13)
    a = _series_quotient(n, np.int64)
    for route in (_series_quotient, _recursive_division):
        b = route(n, object)
        assert [int(v) for v in b] == [int(v) for v in a]


def test_coefficients_are_read_only_and_round_trip():
    poly = phi_coefficients(parse_squarefree_odd(105))
    with pytest.raises(ValueError):
        poly.coeffs[0] = 5
    back = CycloPoly.from_json(105, poly.to_json())
    assert back.to_ints() == poly.to_ints()
    assert all(isinstance(s, str) for s in poly.to_json())


def test_degree_cap_and_method_errors():
    with pytest.raises(DegreeCapExceeded):
        phi_coefficients(parse_squarefree_odd(105), degree_cap=47)
    with pytest.raises(ValueError):
        phi_coefficients(parse_squarefree_odd(105), "fft")


def test_m_bound():
    assert m_exponents(3) == [1, 0, 0]
    assert m_exponents(4) == [3, 1, 0, 0]
    assert m_exponents(5) == [7, 3, 1, 0, 0]
    assert m_bound(parse_squarefree_odd(105)) == 3
    assert m_bound(parse_squarefree_odd(1155)) == 27 * 5
    assert m_bound(parse_squarefree_odd(15)) == 1
    assert m_bound(parse_squarefree_odd(1)) == 1


def test_m_alpha():
    n = parse_squarefree_odd(105)
    assert m_alpha(n, [1, 0, 0]) == 3.0
    assert m_alpha(n, [2, 1, 0], exact=True) == 45
    assert m_alpha(n, [0.5, 0, 0]) == pytest.approx(math.sqrt(3))
    assert m_alpha(n, [2000, 0, 0]) == math.inf
    with pytest.raises(LengthMismatch):
        m_alpha(n, [1, 0])
    with pytest.raises(ValueError):
        m_alpha(n, [0.5, 0, 0], exact=True)


def test_lex_compare_last_coordinate_dominates():
    assert lex_compare([5, 0, 1], [0, 0, 2]) == Order.LESS
    assert lex_compare([0, 3, 1], [9, 2, 1]) == Order.GREATER
    assert lex_compare([1, 2], [1, 2]) == Order.EQUAL
    with pytest.raises(LengthMismatch):
        lex_compare([1], [1, 2])
