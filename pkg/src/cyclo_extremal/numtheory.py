"""Elementary number theory on 64-bit integers.

Everything here is a pure function. Factorization is trial division up to
``TRIAL_LIMIT`` followed by a deterministic primality test on the cofactor;
``mobius`` additionally falls back to Pollard-Brent so it stays total on the
whole 64-bit range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import NotInvertible, NotOdd, NotSquarefree, SearchExhausted, TooLarge

UINT64_LIMIT = 1 << 64
TRIAL_LIMIT = 10**6
DEFAULT_MAX_CANDIDATES = 10**5

# Jaeschke / Sorenson-Webster: the first 12 prime bases are exact below 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


@lru_cache(maxsize=None)
def primes_below(limit: int) -> tuple[int, ...]:
    """All primes p < limit, by an Eratosthenes sieve."""
    if limit <= 2:
        return ()
    sieve = np.ones(limit, dtype=bool)
    sieve[:2] = False
    sieve[4::2] = False
    for p in range(3, math.isqrt(limit - 1) + 1, 2):
        if sieve[p]:
            sieve[p * p :: 2 * p] = False
    return tuple(int(p) for p in np.flatnonzero(sieve))


def _check_range(m: int) -> None:
    if m >= UINT64_LIMIT:
        raise TooLarge(f"{m} exceeds the 64-bit range")


def is_prime(m: int) -> bool:
    """Deterministic Miller-Rabin, exact for every m < 2**64."""
    _check_range(m)
    if m < 2:
        return False
    for p in _MR_BASES:
        if m % p == 0:
            return m == p
    d, s = m - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, m)
        if x == 1 or x == m - 1:
            continue
        for _ in range(s - 1):
            x = x * x % m
            if x == m - 1:
                break
        else:
            return False
    return True


def _pollard_brent(m: int) -> int:
    """A nontrivial factor of the odd composite m."""
    for c in range(1, 100):
        y, r, q, g = 2, 1, 1, 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % m
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(128, r - k)):
                    y = (y * y + c) % m
                    q = q * abs(x - y) % m
                g = math.gcd(q, m)
                k += 128
            r *= 2
        if g == m:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % m
                g = math.gcd(abs(x - ys), m)
        if g != m:
            return g
    raise TooLarge(f"could not split {m}")  # pragma: no cover


def factorize(m: int, *, complete: bool = False) -> dict[int, int]:
    """Prime factorization {p: e} of m >= 1.

    Trial division runs to ``TRIAL_LIMIT``; a leftover composite cofactor
    raises TooLarge unless ``complete`` asks for Pollard-Brent.
    """
    if m < 1:
        raise ValueError("factorize needs m >= 1")
    _check_range(m)
    out: dict[int, int] = {}
    for p in primes_below(TRIAL_LIMIT + 1):
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out[p] = e
    if m == 1:
        return out
    stack = [m]
    while stack:
        c = stack.pop()
        if c == 1:
            continue
        if is_prime(c):
            out[c] = out.get(c, 0) + 1
            continue
        if not complete:
            raise TooLarge(f"cofactor {c} has no factor below {TRIAL_LIMIT} and is not prime")
        r = math.isqrt(c)
        g = r if r * r == c else _pollard_brent(c)
        stack.extend((g, c // g))
    return dict(sorted(out.items()))


def mobius(n: int) -> int:
    if n < 1:
        raise ValueError("mobius needs n >= 1")
    f = factorize(n, complete=True)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


@dataclass(frozen=True)
class SquarefreeOdd:
    """A squarefree odd integer together with its ordered prime factors."""

    value: int
    primes: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.value < 1 or math.prod(self.primes) != self.value:
            raise ValueError(f"primes {self.primes} do not multiply to {self.value}")
        if any(p % 2 == 0 for p in self.primes):
            raise NotOdd(f"{self.value} is even")
        if any(a >= b for a, b in zip(self.primes, self.primes[1:])):
            raise ValueError(f"primes {self.primes} are not strictly increasing")

    @classmethod
    def from_primes(cls, primes) -> SquarefreeOdd:
        ps = tuple(sorted(int(p) for p in primes))
        if len(set(ps)) != len(ps):
            raise NotSquarefree(f"repeated prime in {ps}")
        return cls(math.prod(ps), ps)

    @property
    def omega(self) -> int:
        return len(self.primes)

    @property
    def phi(self) -> int:
        return math.prod(p - 1 for p in self.primes)

    @property
    def mu(self) -> int:
        return -1 if self.omega % 2 else 1

    @cached_property
    def divisors(self) -> tuple[tuple[int, int], ...]:
        return tuple(divisors(self))

    def extend(self, p: int) -> SquarefreeOdd:
        return SquarefreeOdd.from_primes(self.primes + (p,))

    def __int__(self) -> int:
        return self.value

    def __str__(self) -> str:
        return str(self.value)


def parse_squarefree_odd(value: int) -> SquarefreeOdd:
    value = int(value)
    if value < 1:
        raise ValueError("value must be positive")
    if value % 2 == 0:
        raise NotOdd(f"{value} is even")
    f = factorize(value)
    repeated = [p for p, e in f.items() if e > 1]
    if repeated:
        raise NotSquarefree(f"{value} is divisible by {repeated[0]}^2")
    return SquarefreeOdd(value, tuple(f))


def divisors(n: SquarefreeOdd) -> list[tuple[int, int]]:
    """Pairs (d, mu(n/d)) over all divisors d of n, ascending in d."""
    # mu(n/d) = mu(n) * mu(d) on squarefree n
    pairs = [(1, 1)]
    for p in n.primes:
        pairs += [(d * p, -s) for d, s in pairs]
    return sorted((d, n.mu * s) for d, s in pairs)


def mod_inverse(a: int, m: int) -> int:
    if m < 2:
        raise ValueError("modulus must be at least 2")
    try:
        return pow(a, -1, m)
    except ValueError:
        raise NotInvertible(f"gcd({a}, {m}) = {math.gcd(a, m)}") from None


@dataclass(frozen=True)
class ResidueClass:
    residue: int
    modulus: int

    def __post_init__(self) -> None:
        if self.modulus < 1:
            raise ValueError("modulus must be positive")
        object.__setattr__(self, "residue", self.residue % self.modulus)

    def __contains__(self, x: int) -> bool:
        return x % self.modulus == self.residue


def find_prime_in_class(
    cls: ResidueClass, lower: int, max_candidates: int = DEFAULT_MAX_CANDIDATES
) -> int:
    """Smallest prime p > lower with p in the class.

    Walks the progression upward from the first term above ``lower`` and gives
    up with SearchExhausted after ``max_candidates`` terms.
    """
    if math.gcd(cls.residue, cls.modulus) != 1:
        raise NotInvertible(f"class {cls.residue} mod {cls.modulus} is not a unit")
    m = cls.modulus
    start = lower + 1
    start += (cls.residue - start) % m
    for k in range(max_candidates):
        c = start + k * m
        _check_range(c)
        if is_prime(c):
            return c
    raise SearchExhausted(
        f"no prime = {cls.residue} mod {m} above {lower} among {max_candidates} terms"
    )


def odd_prime_after(lower: int) -> int:
    """Smallest odd prime strictly greater than lower."""
    c = max(int(math.floor(lower)) + 1, 3)
    while not is_prime(c):
        c += 1
    return c
