"""Inductive construction of n with large L_n (hence large height A_n).

A tower starts from a binary seed p1 < p2 with p2 = 2 (mod p1) and adds one
prime per level. With n the current product, x_M an argmax of |F_n| and
x0 = 2 pi t0 / n a zero of F_n with |f_n(x0)| = D_n, the next prime is taken
from the class p = r / t0 (mod n), where r is the integer coprime to n
closest to n x_M / (2 pi). For such p one preimage (x_M + 2 k pi) / p lands
within 2 pi b / (n p) of x0, which makes |F_np| = |F_n(p x)| / |F_n(x)| large
there. Candidates are tried in increasing order until the measured L clears
the level target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
import mpmath
import numpy as np

from .circle import (
    DEFAULT_EVAL_CAP,
    DEFAULT_GRID_MULT,
    DEFAULT_SCAN_BUDGET,
    TWO_PI,
    BinaryWitness,
    CircleProfile,
    binary_witness,
    compute_D,
    maximize_F,
)
from .cyclo_poly import DEFAULT_DEGREE_CAP, height_report, m_bound
from .errors import ScanBudgetExceeded, SearchExhausted
from .numtheory import (
    DEFAULT_MAX_CANDIDATES,
    ResidueClass,
    SquarefreeOdd,
    find_prime_in_class,
    mod_inverse,
    odd_prime_after,
    primes_below,
)

# below 2**-1022 c_omega is no longer a normal binary64 number
_LOG2_MIN_NORMAL = -1022
DEFAULT_LEVEL_BUDGET = 200

_KIND_ALIASES = {
    "const": "constant",
    "constant": "constant",
    "affine": "affine",
    "pow": "power",
    "power": "power",
    "exp": "exponential",
    "exponential": "exponential",
}
_SHORT = {"constant": "const", "affine": "affine", "power": "pow", "exponential": "exp"}
_ARITY = {"constant": 1, "affine": 2, "power": 1, "exponential": 1}


def _num(v: Fraction):
    return int(v) if v.denominator == 1 else float(v)


@dataclass(frozen=True)
class HFunction:
    """Growth function h used for the h-growing condition p_i > h(n_{i-1}).

    ``constant`` c, ``affine`` a*x + b, ``power`` x**k, ``exponential`` c**x.
    Parameters are kept as exact fractions so thresholds on integers are exact.
    """

    kind: str
    params: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if self.kind not in _ARITY:
            raise ValueError(f"unknown h kind {self.kind!r}")
        if len(self.params) != _ARITY[self.kind]:
            raise ValueError(f"{self.kind} takes {_ARITY[self.kind]} parameter(s)")
        object.__setattr__(self, "params", tuple(Fraction(p) for p in self.params))
        bad = {
            "constant": lambda c: c <= 0,
            "affine": lambda a, b: a < 0 or b < 0 or a == b == 0,
            "power": lambda k: False,
            "exponential": lambda c: c <= 0,
        }[self.kind](*self.params)
        if bad:
            raise ValueError(f"h = {self.to_text()} is not positive on positive reals")

    @classmethod
    def parse(cls, text: str) -> HFunction:
        kind, _, rest = text.partition(":")
        if kind not in _KIND_ALIASES or not rest:
            raise ValueError(f"cannot parse h {text!r}; use const:c, affine:a,b, pow:k or exp:c")
        try:
            params = tuple(Fraction(s.strip()) for s in rest.split(","))
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"bad parameters in {text!r}") from None
        return cls(_KIND_ALIASES[kind], params)

    def to_text(self) -> str:
        return f"{_SHORT[self.kind]}:" + ",".join(str(_num(p)) for p in self.params)

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": [_num(p) for p in self.params]}

    @classmethod
    def from_json(cls, data: dict) -> HFunction:
        return cls(data["kind"], tuple(Fraction(str(p)) for p in data["params"]))

    def __call__(self, x: float) -> float:
        if self.kind == "constant":
            return float(self.params[0])
        if self.kind == "affine":
            a, b = self.params
            return float(a) * x + float(b)
        try:
            if self.kind == "power":
                return float(x) ** float(self.params[0])
            return float(self.params[0]) ** float(x)
        except OverflowError:
            return math.inf

    def floor_at(self, x: int) -> int:
        """floor(h(x)) for a positive integer x; p > h(x) iff p > floor(h(x))."""
        if self.kind == "constant":
            return math.floor(self.params[0])
        if self.kind == "affine":
            a, b = self.params
            return math.floor(a * x + b)
        base, expo = (x, self.params[0]) if self.kind == "power" else (self.params[0], x)
        size = float(expo) * math.log2(base) if base != 1 else 0.0
        if size > 66:
            raise SearchExhausted(f"h({x}) = {self.to_text()} exceeds the 64-bit prime range")
        if Fraction(expo).denominator == 1:
            return math.floor(Fraction(base) ** int(expo))
        return math.floor(float(base) ** float(expo))


# ---------------------------------------------------------------- constants


def _dps(omega: int) -> int:
    return 30 + int(0.31 * omega) + 5


def c_constant_mp(omega: int) -> mpmath.mpf:
    """Closed form of c_omega at a working precision that survives 2**omega."""
    if omega < 3:
        raise ValueError("c_omega is defined for omega >= 3")
    with mpmath.workdps(_dps(omega)):
        denom = mpmath.fprod(mpmath.mpf(k) ** (2 ** (omega - 1 - k)) for k in range(3, omega))
        return (2 / mpmath.pi) ** (3 * 2 ** (omega - 3)) / (omega * denom)


@dataclass(frozen=True)
class CValue:
    value: float | None
    log2: float
    in_log_space: bool


def c_constant(omega: int) -> CValue:
    """c_omega as a float, or only its log2 once it underflows binary64."""
    c = c_constant_mp(omega)
    with mpmath.workdps(_dps(omega)):
        lg = float(mpmath.log(c, 2))
    if lg < _LOG2_MIN_NORMAL:
        return CValue(None, lg, True)
    return CValue(float(c), lg, False)


def c_recurrence_check(omega: int) -> tuple[mpmath.mpf, mpmath.mpf]:
    """c_omega from the closed form and from c_{w+1} = 8 / (pi^3 (w+1)) * prod_{i=3..w} c_i."""
    if omega < 3:
        raise ValueError("omega must be at least 3")
    with mpmath.workdps(_dps(omega)):
        prod = mpmath.mpf(1)
        c = None
        for w in range(2, omega):
            c = 8 / (mpmath.pi**3 * (w + 1)) * prod
            prod *= c
        return c_constant_mp(omega), c


def c_root(omega: int) -> float:
    """c_omega ** (2 ** -omega)."""
    with mpmath.workdps(_dps(omega)):
        return float(mpmath.exp(mpmath.log(c_constant_mp(omega)) / mpmath.mpf(2) ** omega))


def exponent_identity_check(omega: int, k: int) -> tuple[int, int]:
    """Exponent of p_k in prod_{i<=omega} p_1...p_i M_{p_1...p_i}, summed term by term, vs 2^(omega-k)."""
    if not 1 <= k <= omega:
        raise ValueError("need 1 <= k <= omega")
    lhs = omega - k + 1
    for i in range(k + 2, omega + 1):
        lhs += 2 ** (i - k - 1) - 1
    return lhs, 2 ** (omega - k)


# ---------------------------------------------------------------- towers


@dataclass(frozen=True)
class TowerLevel:
    index: int
    p: int
    n: SquarefreeOdd
    profile: CircleProfile
    target: float
    passed: bool
    residue: int | None = None
    modulus: int | None = None
    r: int | None = None
    b: float | None = None
    candidates_tried: int = 1
    witness: BinaryWitness | None = None

    @property
    def measured_L(self) -> float:
        return self.profile.L

    @property
    def t0(self) -> int | None:
        return self.profile.t0

    def to_json(self) -> dict:
        prof = self.profile
        out = {
            "index": self.index,
            "p": self.p,
            "n": str(self.n.value),
            "L": prof.L,
            "x_M": prof.x_M,
            "D": prof.D,
            "t0": prof.t0,
            "r": self.r,
            "b": self.b,
            "residue": self.residue,
            "class_modulus": None if self.modulus is None else str(self.modulus),
            "target": self.target,
            "pass": self.passed,
            "scope": prof.scope,
            "grid_mult": prof.grid_mult,
            "candidates_tried": self.candidates_tried,
        }
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out


@dataclass
class PrimeTower:
    omega: int
    epsilon: float
    h: HFunction
    levels: list[TowerLevel] = field(default_factory=list)
    grid_mult: int = DEFAULT_GRID_MULT
    eval_cap: int = DEFAULT_EVAL_CAP
    scan_budget: int = DEFAULT_SCAN_BUDGET
    workers: int = 1

    @property
    def n(self) -> SquarefreeOdd:
        return self.levels[-1].n

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(lv.p for lv in self.levels)

    @property
    def complete(self) -> bool:
        return len(self.levels) == self.omega

    @property
    def final_target(self) -> float:
        return level_target(self.omega, self.omega, self.epsilon, self.n)

    @property
    def verdict(self) -> bool:
        return self.complete and self.levels[-1].profile.L > self.final_target

    def certified_A_lower(self) -> int:
        """floor(L_n / n): A_n >= L_n / n, and the measured L is a lower bound on L_n."""
        return math.floor(Fraction(self.levels[-1].profile.L) / self.n.value)

    def to_json(self) -> dict:
        c = c_constant(self.omega) if self.omega >= 3 else None
        return {
            "omega": self.omega,
            "epsilon": self.epsilon,
            "h": self.h.to_json(),
            "primes": list(self.primes),
            "verdict": self.verdict,
            "c_omega": None if c is None else c.value,
            "c_omega_log2": None if c is None else c.log2,
            "M_n": str(m_bound(self.n)),
            "n": str(self.n.value),
            "final_target": self.final_target if self.omega >= 3 else None,
            "certified_A_lower": str(self.certified_A_lower()),
            "L_over_n": self.levels[-1].profile.L / self.n.value,
            "levels": [lv.to_json() for lv in self.levels],
        }


def level_target(i: int, omega: int, epsilon: float, n: SquarefreeOdd) -> float:
    """(1 - eps)^(i/omega) * c_i * n * M_n for a level of order i >= 3."""
    c = c_constant(i)
    log_t = (i / omega) * math.log1p(-epsilon) + c.log2 * math.log(2) + math.log(n.value * m_bound(n))
    return math.exp(log_t) if log_t < 709 else math.inf


def binary_seed(h: HFunction, omega_target: int, max_candidates: int = DEFAULT_MAX_CANDIDATES):
    """(p1, p2, witness): p1 the first odd prime above max(h(1), omega), p2 = 2 mod p1 above max(h(p1), p1)."""
    p1 = odd_prime_after(max(h.floor_at(1), omega_target))
    p2 = find_prime_in_class(ResidueClass(2, p1), max(h.floor_at(p1), p1), max_candidates)
    return p1, p2, binary_witness(p1, p2)


def nearest_coprime(y: float, n: int) -> int:
    """Integer coprime to n closest to y; the smaller one on a tie."""
    below = math.floor(y)
    while math.gcd(below, n) != 1:
        below -= 1
    above = below + 1
    while above <= y or math.gcd(above, n) != 1:
        above += 1
    return below if y - below <= above - y else above


def _profile(tower: PrimeTower, n: SquarefreeOdd, found, with_D: bool = True) -> CircleProfile:
    D = t0 = None
    if with_D:
        try:
            D, t0 = compute_D(n, tower.scan_budget, tower.workers)
        except ScanBudgetExceeded:
            pass
    return CircleProfile(n, found.L, found.x_M, D, t0, tower.grid_mult, found.refined, found.scope)


def start_tower(
    omega: int,
    epsilon: float,
    h: HFunction,
    *,
    grid_mult: int = DEFAULT_GRID_MULT,
    eval_cap: int = DEFAULT_EVAL_CAP,
    scan_budget: int = DEFAULT_SCAN_BUDGET,
    workers: int = 1,
    seed: tuple[int, int] | None = None,
    max_candidates: int = DEFAULT_MAX_CANDIDATES,
) -> PrimeTower:
    """Tower holding the two seed levels.

    ``seed`` overrides the automatic (p1, p2) choice, e.g. to study (3, 5).
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    tower = PrimeTower(omega, epsilon, h, grid_mult=grid_mult, eval_cap=eval_cap,
                       scan_budget=scan_budget, workers=workers)
    if seed is None:
        p1, p2, wit = binary_seed(h, omega, max_candidates)
    else:
        p1, p2 = seed
        wit = binary_witness(p1, p2)
    n1 = SquarefreeOdd.from_primes((p1,))
    m1 = maximize_F(n1, grid_mult, eval_cap=eval_cap, workers=workers)
    tower.levels.append(
        TowerLevel(1, p1, n1, _profile(tower, n1, m1), float(p1), abs(m1.L - p1) <= 1e-9 * p1)
    )
    n2 = n1.extend(p2)
    m2 = maximize_F(n2, grid_mult, [wit.x], eval_cap=eval_cap, workers=workers)
    tower.levels.append(
        TowerLevel(2, p2, n2, _profile(tower, n2, m2), wit.bound, m2.L >= wit.bound, witness=wit)
    )
    return tower


def next_level(
    tower: PrimeTower, budget: int = DEFAULT_LEVEL_BUDGET, max_candidates: int = DEFAULT_MAX_CANDIDATES
) -> PrimeTower:
    """Append level i+1, searching the residue class p = r / t0 (mod n_i).

    Tries up to ``budget`` primes of the class above max(h(n_i), p_i); keeps the
    first whose measured L beats the level target, or else the best one seen
    (that level then records pass = False).
    """
    last = tower.levels[-1]
    n, prof = last.n, last.profile
    if len(tower.levels) < 2 or prof.t0 is None:
        raise ValueError("next_level needs a tower with >= 2 levels and a computed D_n")
    y = n.value * prof.x_M / TWO_PI
    r = nearest_coprime(y, n.value)
    b = abs(y - r)
    if tower.levels[0].p > n.omega and b > (n.omega + 1) / 2:
        raise ArithmeticError(f"b = {b} exceeds (omega+1)/2 for n = {n.value}")
    modulus = n.value
    residue = r * mod_inverse(prof.t0, modulus) % modulus
    cls = ResidueClass(residue, modulus)
    i = len(tower.levels) + 1
    lower = max(tower.h.floor_at(n.value), last.p)

    best = None
    tried = 0
    for _ in range(budget):
        p = find_prime_in_class(cls, lower, max_candidates)
        lower = p
        tried += 1
        n_new = n.extend(p)
        seeds = (prof.x_M + TWO_PI * np.arange(p, dtype=float)) / p
        found = maximize_F(n_new, tower.grid_mult, seeds, eval_cap=tower.eval_cap, workers=tower.workers)
        target = level_target(i, tower.omega, tower.epsilon, n_new)
        ratio = found.L / target
        if best is None or ratio > best[0]:
            best = (ratio, p, n_new, found, target)
        if found.L > target:
            break
    _, p, n_new, found, target = best
    with_D = i < tower.omega or n_new.value // 2 <= tower.scan_budget
    tower.levels.append(
        TowerLevel(
            i, p, n_new, _profile(tower, n_new, found, with_D), target, found.L > target,
            residue=residue, modulus=modulus, r=r, b=b, candidates_tried=tried,
        )
    )
    return tower


def build_tower(
    omega: int,
    epsilon: float,
    h: HFunction,
    budget: int = DEFAULT_LEVEL_BUDGET,
    **kw,
) -> PrimeTower:
    if omega < 3:
        raise ValueError("towers are built for omega >= 3")
    max_candidates = kw.pop("max_candidates", DEFAULT_MAX_CANDIDATES)
    tower = start_tower(omega, epsilon, h, max_candidates=max_candidates, **kw)
    while len(tower.levels) < omega:
        next_level(tower, budget, max_candidates)
    return tower


def dn_sandwich(tower: PrimeTower) -> list[tuple[int, float, float]]:
    """Per level: (index, D_n, (n/2) / (L_{n_1} ... L_{n_{i-1}})) where D_n is known."""
    out = []
    prod_L = 1.0
    for lv in tower.levels:
        if lv.profile.D is not None:
            out.append((lv.index, lv.profile.D, lv.n.value / 2.0 / prod_L))
        prod_L *= lv.profile.L
    return out


# ------------------------------------------------------------ ratio scan


@dataclass(frozen=True)
class BeiterScanRow:
    n: SquarefreeOdd
    A: int
    M: int

    @property
    def ratio(self) -> float:
        return self.A / self.M

    @property
    def exact_ratio(self) -> Fraction:
        return Fraction(self.A, self.M)


def squarefree_odd_with_omega(omega: int, n_max: int) -> list[SquarefreeOdd]:
    """Every product of omega distinct odd primes up to n_max, ascending."""
    out: list[SquarefreeOdd] = []
    odd_primes = [p for p in primes_below(n_max + 1) if p > 2]

    def rec(start: int, chosen: list[int], prod: int) -> None:
        left = omega - len(chosen)
        if left == 0:
            out.append(SquarefreeOdd(prod, tuple(chosen)))
            return
        for j in range(start, len(odd_primes)):
            p = odd_primes[j]
            # the remaining primes are all >= p
            if prod * p**left > n_max:
                break
            chosen.append(p)
            rec(j + 1, chosen, prod * p)
            chosen.pop()

    rec(0, [], 1)
    return sorted(out, key=lambda s: s.value)


def scan_ratios(omega: int, n_max: int, degree_cap: int = DEFAULT_DEGREE_CAP) -> list[BeiterScanRow]:
    """A_n / M_n for every squarefree odd n <= n_max of order omega, largest ratio first."""
    if omega < 3:
        raise ValueError("the scan covers omega >= 3")
    rows = []
    for n in squarefree_odd_with_omega(omega, n_max):
        rep = height_report(n, degree_cap)
        rows.append(BeiterScanRow(n, rep.A, m_bound(n)))
    rows.sort(key=lambda row: (-row.exact_ratio, row.n.value))
    return rows
