"""Exact coefficients of cyclotomic polynomials and their height quantities.

Two independent routes produce the coefficient vector of Phi_n for squarefree
odd n:

* ``series_quotient`` expands prod_{d|n} (1 - z^d)^mu(n/d) as a power series
  truncated at degree phi(n).
* ``recursive_division`` adds one prime at a time through
  Phi_{mp}(z) = Phi_m(z^p) / Phi_m(z).

Both run on int64 arrays. Every step is a ring operation, so the arrays hold
the true coefficients modulo 2**64, and the result is exact whenever the true
coefficients fit in int64. A_n <= M_n (Bateman, Pomerance, Vaughan) gives that
guarantee; when M_n does not fit, the same code runs on Python-int object
arrays instead.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DegreeCapExceeded, LengthMismatch
from .numtheory import SquarefreeOdd, factorize

DEFAULT_DEGREE_CAP = 10**6
METHODS = ("series_quotient", "recursive_division")


@dataclass(frozen=True, eq=False)
class CycloPoly:
    """Phi_n with ``coeffs[i]`` the coefficient of x**i."""

    n: int
    coeffs: np.ndarray

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def to_ints(self) -> list[int]:
        return [int(c) for c in self.coeffs]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CycloPoly):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.coeffs, other.coeffs)

    def to_json(self) -> list[str]:
        return [str(c) for c in self.to_ints()]

    @classmethod
    def from_json(cls, n: int, data: Sequence[str]) -> CycloPoly:
        return cls(n, _freeze(np.array([int(s) for s in data], dtype=object)))


@dataclass(frozen=True)
class HeightReport:
    n: int
    A: int
    S: int
    degree: int


@dataclass(frozen=True)
class RadicalTransform:
    """How Phi_n is recovered from Phi_m, m the odd radical of n.

    Phi_n(x) = sign * Phi_m(s * x**exponent) with s = -1 when ``negate``.
    """

    negate: bool
    exponent: int
    sign: int = 1

    @property
    def is_identity(self) -> bool:
        return not self.negate and self.exponent == 1 and self.sign == 1


class Order(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def reduce_radical(n: int) -> tuple[SquarefreeOdd, RadicalTransform]:
    """Odd radical m of n and the transform taking Phi_m to Phi_n."""
    if n < 1:
        raise ValueError("n must be positive")
    f = factorize(n)
    odd = tuple(p for p in f if p != 2)
    m = SquarefreeOdd(math.prod(odd), odd)
    negate = 2 in f
    rad = m.value * (2 if negate else 1)
    # Phi_2(x) = -Phi_1(-x); for odd m > 1 the degree is even and no sign appears
    sign = -1 if negate and m.value == 1 else 1
    return m, RadicalTransform(negate, n // rad, sign)


def apply_transform(poly: CycloPoly, t: RadicalTransform, n: int) -> CycloPoly:
    c = np.array(poly.coeffs, copy=True)
    if t.negate:
        c[1::2] = -c[1::2]
    c = t.sign * c
    out = np.zeros(poly.degree * t.exponent + 1, dtype=c.dtype)
    out[:: t.exponent] = c
    return CycloPoly(n, _freeze(out))


def _dtype_for(n: SquarefreeOdd):
    return np.int64 if m_bound(n) < (1 << 62) else object


def _series_quotient(n: SquarefreeOdd, dtype) -> np.ndarray:
    size = n.phi + 1
    c = np.zeros(size, dtype=dtype)
    c[0] = 1
    divs = n.divisors
    for d, s in divs:
        if s == 1 and d < size:
            c[d:] = c[d:] - c[:-d]
    for d, s in divs:
        if s == -1 and d < size:
            # multiply by 1/(1 - z^d) = sum_k z^{kd}: running sums along stride d
            padded = np.zeros(-(-size // d) * d, dtype=dtype)
            padded[:size] = c
            c = padded.reshape(-1, d).cumsum(axis=0).reshape(-1)[:size]
    return c


def _substitute_times(sparse: np.ndarray, p: int, dense: np.ndarray) -> np.ndarray:
    """sparse(z**p) * dense(z)."""
    k = len(sparse)
    out = np.zeros((k - 1) * p + len(dense), dtype=sparse.dtype)
    for j in np.flatnonzero(dense):
        out[j : j + (k - 1) * p + 1 : p] += dense[j] * sparse
    return out


def _divide_by_binomial(c: np.ndarray, m: int) -> np.ndarray:
    """Exact quotient c(z) / (z**m - 1)."""
    size = len(c) - m
    padded = np.zeros(-(-len(c) // m) * m, dtype=c.dtype)
    padded[: len(c)] = c
    return -padded.reshape(-1, m).cumsum(axis=0).reshape(-1)[:size]


def _recursive_division(n: SquarefreeOdd, dtype) -> np.ndarray:
    # Carry the cofactor Psi_m = (z^m - 1) / Phi_m alongside Phi_m, so that
    # dividing by Phi_m becomes multiplying by Psi_m and dividing by z^m - 1:
    #   Phi_mp = Phi_m(z^p) Psi_m(z) / (z^m - 1),   Psi_mp = Psi_m(z^p) Phi_m(z)
    phi = np.array([-1, 1], dtype=dtype)
    psi = np.array([1], dtype=dtype)
    m = 1
    for p in n.primes:
        phi, psi = (
            _divide_by_binomial(_substitute_times(phi, p, psi), m),
            _substitute_times(psi, p, phi),
        )
        m *= p
    return phi


def phi_coefficients(
    n: SquarefreeOdd,
    method: str = "series_quotient",
    degree_cap: int = DEFAULT_DEGREE_CAP,
) -> CycloPoly:
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    if n.phi > degree_cap:
        raise DegreeCapExceeded(f"phi({n.value}) = {n.phi} exceeds the degree cap {degree_cap}")
    dtype = _dtype_for(n)
    if n.value == 1:
        coeffs = np.array([-1, 1], dtype=dtype)
    elif method == "series_quotient":
        coeffs = _series_quotient(n, dtype)
    else:
        coeffs = _recursive_division(n, dtype)
    return CycloPoly(n.value, _freeze(coeffs))


def height_report(n: SquarefreeOdd, degree_cap: int = DEFAULT_DEGREE_CAP) -> HeightReport:
    poly = phi_coefficients(n, degree_cap=degree_cap)
    return height_of(poly)


def height_of(poly: CycloPoly) -> HeightReport:
    a = np.abs(poly.coeffs)
    return HeightReport(poly.n, int(a.max()), int(a.sum(dtype=poly.coeffs.dtype)), poly.degree)


def m_exponents(omega: int) -> list[int]:
    """Exponent of p_i in M_n for i = 1..omega."""
    return [2 ** (omega - 1 - i) - 1 if i <= omega - 2 else 0 for i in range(1, omega + 1)]


def m_bound(n: SquarefreeOdd) -> int:
    return math.prod(p**e for p, e in zip(n.primes, m_exponents(n.omega)))


def m_alpha(n: SquarefreeOdd, alpha: Sequence[float], exact: bool = False):
    """p_1**alpha_1 * ... * p_omega**alpha_omega.

    Float by default; ``exact=True`` returns an int and requires nonnegative
    integer exponents.
    """
    if len(alpha) != n.omega:
        raise LengthMismatch(f"{len(alpha)} exponents for omega = {n.omega}")
    if exact:
        if any(Fraction(a).denominator != 1 or a < 0 for a in alpha):
            raise ValueError("exact mode needs nonnegative integer exponents")
        return math.prod(p ** int(a) for p, a in zip(n.primes, alpha))
    try:
        return math.prod(float(p) ** a for p, a in zip(n.primes, alpha))
    except OverflowError:
        return math.inf


def lex_compare(alpha: Sequence[float], beta: Sequence[float]) -> Order:
    """The order on exponent vectors in which the last coordinate dominates."""
    if len(alpha) != len(beta):
        raise LengthMismatch(f"lengths {len(alpha)} and {len(beta)} differ")
    for a, b in zip(reversed(alpha), reversed(beta)):
        if a != b:
            return Order.LESS if a < b else Order.GREATER
    return Order.EQUAL
