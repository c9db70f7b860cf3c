"""Property suites behind ``cyclo-extremal verify``.

Each check evaluates one identity or inequality over a deterministic sample
and reports the inputs of every violation. Samples come from a fixed-seed
generator so two runs report the same table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .cache import ProfileCache
from .circle import (
    TWO_PI,
    binary_witness,
    check_fnp_identity,
    circle_profile,
    compute_D,
    compute_L,
    derivative_at_zero,
    eval_F,
    eval_phi_circle,
)
from .construct import (
    HFunction,
    PrimeTower,
    build_tower,
    c_recurrence_check,
    exponent_identity_check,
)
from .cyclo_poly import METHODS, height_report, phi_coefficients
from .numtheory import SquarefreeOdd, is_prime, parse_squarefree_odd, primes_below

SEED = 20240917
SUITES = ("lemmas", "binary", "tower", "all")
FD_STEP = 1e-6


@dataclass
class CheckResult:
    name: str
    cases: int = 0
    counterexamples: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.counterexamples

    def record(self, ok: bool, label: Callable[[], str]) -> None:
        self.cases += 1
        if not ok:
            self.counterexamples.append(label())

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "cases": self.cases,
            "counterexamples": self.counterexamples,
        }


def squarefree_odd_upto(limit: int) -> list[SquarefreeOdd]:
    """Every squarefree odd n in [1, limit], ascending."""
    spf = np.zeros(limit + 1, dtype=np.int64)
    for p in primes_below(limit + 1):
        sl = spf[p::p]
        sl[sl == 0] = p
    out = [SquarefreeOdd(1, ())]
    for n in range(3, limit + 1, 2):
        ps, m = [], n
        while m > 1:
            p = int(spf[m])
            m //= p
            if m % p == 0:
                break
            ps.append(p)
        else:
            out.append(SquarefreeOdd(n, tuple(ps)))
    return out


def rel_close(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def fd_derivative(n: SquarefreeOdd, t0: int, h: float = FD_STEP) -> float:
    """Central difference of F_n at 2 pi t0 / n."""
    x0 = TWO_PI * t0 / n.value
    return abs(float(eval_F(n, x0 + h)) - float(eval_F(n, x0 - h))) / (2.0 * h)


# ------------------------------------------------------------------ checks


def check_coefficients(ns: Iterable[SquarefreeOdd]) -> CheckResult:
    res = CheckResult("coefficient methods agree")
    for n in ns:
        a, b = (phi_coefficients(n, m) for m in METHODS)
        res.record(a == b, lambda: f"n={n.value}")
    return res


def check_circle_identity(pairs: Iterable[tuple[SquarefreeOdd, float]], tol: float = 1e-9) -> CheckResult:
    res = CheckResult("|F_n(x)| = |Phi_n(e^ix)|")
    for n, x in pairs:
        f = abs(float(eval_F(n, x)))
        g = eval_phi_circle(phi_coefficients(n), x)
        res.record(abs(f - g) <= tol * max(1.0, g), lambda: f"n={n.value} x={x!r} F={f!r} Phi={g!r}")
    return res


def check_derivative(ns: Iterable[SquarefreeOdd], tol: float = 1e-5) -> CheckResult:
    res = CheckResult("derivative at zeros matches finite differences")
    for n in ns:
        if n.value == 1:
            continue
        for t0 in range(1, n.value):
            if math.gcd(t0, n.value) != 1:
                continue
            exact, fd = derivative_at_zero(n, t0), fd_derivative(n, t0)
            res.record(abs(exact - fd) <= tol * exact, lambda: f"n={n.value} t0={t0} closed={exact!r} fd={fd!r}")
    return res


def check_fnp(triples: Iterable[tuple[SquarefreeOdd, int, int]], tol: float = 1e-9) -> CheckResult:
    res = CheckResult("|f_np(x1)| = p |f_n(p x1)| / |F_n(x1)|")
    for n, p, t1 in triples:
        lhs, rhs = check_fnp_identity(n, p, t1)
        res.record(rel_close(lhs, rhs, tol), lambda: f"n={n.value} p={p} t1={t1} lhs={lhs!r} rhs={rhs!r}")
    return res


def check_dnp(pairs: Iterable[tuple[SquarefreeOdd, int]], slack: float = 1e-9, workers: int = 1) -> CheckResult:
    res = CheckResult("D_np >= p D_n / L_n")
    for n, p in pairs:
        L, _ = compute_L(n, workers=workers)
        Dn, _ = compute_D(n, workers=workers)
        Dnp, _ = compute_D(n.extend(p), workers=workers)
        bound = p * Dn / L
        res.record(Dnp >= bound * (1 - slack), lambda: f"n={n.value} p={p} D_np={Dnp!r} bound={bound!r}")
    return res


def check_L_small() -> CheckResult:
    res = CheckResult("L_1 = 1 and L_p = p")
    for m in (1,) + primes_below(60)[1:]:
        n = parse_squarefree_odd(m)
        L, _ = compute_L(n)
        res.record(rel_close(L, float(m), 1e-12), lambda: f"n={m} L={L!r}")
    return res


def check_constants(max_omega: int = 30, tol: float = 1e-12) -> CheckResult:
    res = CheckResult("c_omega closed form = recurrence")
    for w in range(3, max_omega + 1):
        a, b = c_recurrence_check(w)
        res.record(abs(a - b) <= tol * abs(a), lambda: f"omega={w} closed={a} recurred={b}")
    return res


def check_exponents(max_omega: int = 20) -> CheckResult:
    res = CheckResult("exponent identity")
    for w in range(1, max_omega + 1):
        for k in range(1, w + 1):
            lhs, rhs = exponent_identity_check(w, k)
            res.record(lhs == rhs, lambda: f"omega={w} k={k} lhs={lhs} rhs={rhs}")
    return res


def check_binary(pairs: Iterable[tuple[int, int]], workers: int = 1) -> CheckResult:
    res = CheckResult("binary witness and L_p1p2 reach 4(p1-2)p2/(pi^2|2a+1|)")
    for p1, p2 in pairs:
        w = binary_witness(p1, p2)
        L, _ = compute_L(SquarefreeOdd.from_primes((p1, p2)), workers=workers)
        res.record(
            w.measured >= w.bound and L >= w.bound,
            lambda: f"p1={p1} p2={p2} a={w.a} bound={w.bound!r} witness={w.measured!r} L={L!r}",
        )
    return res


def check_tower(tower: PrimeTower, label: str, slack: float = 1e-9) -> CheckResult:
    """Structural invariants, the D_n sandwich and the final inequality."""
    res = CheckResult(f"tower {label}")
    prev_n, prev_p, prod_L = 1, 0, 1.0
    for lv in tower.levels:
        tag = f"{label} level {lv.index} p={lv.p}"
        res.record(is_prime(lv.p) and lv.p > prev_p, lambda: f"{tag}: primes not increasing")
        res.record(lv.p > tower.h.floor_at(prev_n), lambda: f"{tag}: p <= h(n_prev)")
        if lv.index >= 3:
            ok = lv.modulus == prev_n and math.gcd(lv.residue, prev_n) == 1 and lv.p % prev_n == lv.residue
            res.record(ok, lambda: f"{tag}: not in class {lv.residue} mod {lv.modulus}")
            if tower.levels[0].p > lv.index - 1:
                res.record(lv.b <= lv.index / 2, lambda: f"{tag}: b={lv.b} exceeds (omega+1)/2")
        if lv.profile.D is not None:
            lower = lv.n.value / 2.0 / prod_L
            res.record(lv.profile.D >= lower * (1 - slack), lambda: f"{tag}: D={lv.profile.D!r} < {lower!r}")
        prod_L *= lv.profile.L
        prev_n, prev_p = lv.n.value, lv.p
    res.record(tower.verdict, lambda: f"{label}: L={tower.levels[-1].measured_L!r} misses {tower.final_target!r}")
    n = tower.n
    # A_n >= L_n / n, checked against the exact height when Phi_n is small enough
    if n.phi <= 10**5:
        A = height_report(n).A
        L = tower.levels[-1].measured_L
        res.record(A >= L / n.value, lambda: f"{label}: A={A} < L/n={L / n.value!r}")
    return res


def check_cache(cache: ProfileCache, workers: int = 1) -> CheckResult:
    """Recompute every cached profile and require identical numbers."""
    res = CheckResult("cache entries reproduce")
    for entry in cache.entries():
        old = entry.value
        tol = float(entry.key.split("|")[2])
        new = circle_profile(old.n, old.grid_mult, with_D=old.D is not None, tol=tol, workers=workers)
        same = (new.L, new.x_M, new.D, new.t0) == (old.L, old.x_M, old.D, old.t0)
        res.record(
            same,
            lambda: f"n={old.n.value} grid_mult={old.grid_mult}: cached L={old.L!r} D={old.D!r}, "
            f"recomputed L={new.L!r} D={new.D!r}",
        )
    return res


# ------------------------------------------------------------------ suites


def _lemma_samples(rng: np.random.Generator):
    small = squarefree_odd_upto(2000)
    circle = [(small[i], float(rng.uniform(0, TWO_PI))) for i in rng.integers(0, len(small), 60)]
    deriv = [n for n in small if n.value <= 200]
    fnp = []
    while len(fnp) < 40:
        n = small[int(rng.integers(1, len(small)))]
        p = int(rng.choice(primes_below(10**5 // n.value + 1)[1:] or (3,)))
        if n.value % p == 0 or n.value * p > 10**5:
            continue
        np_ = n.value * p
        t1 = int(rng.integers(1, np_))
        if math.gcd(t1, np_) == 1:
            fnp.append((n, p, t1))
    dnp = []
    for n0, p in ((15, 7), (15, 31), (21, 5), (35, 3), (105, 11), (105, 97)):
        dnp.append((parse_squarefree_odd(n0), p))
    return circle, deriv, fnp, dnp


def suite_lemmas(workers: int = 1) -> list[CheckResult]:
    rng = np.random.default_rng(SEED)
    circle, deriv, fnp, dnp = _lemma_samples(rng)
    return [
        check_coefficients(squarefree_odd_upto(1500)),
        check_circle_identity(circle),
        check_derivative(deriv),
        check_fnp(fnp),
        check_dnp(dnp, workers=workers),
        check_L_small(),
        check_constants(),
        check_exponents(),
    ]


def suite_binary(p_max: int = 80, workers: int = 1) -> list[CheckResult]:
    ps = primes_below(p_max + 1)[1:]
    pairs = [(p1, p2) for i, p1 in enumerate(ps) for p2 in ps[i + 1 :]]
    return [check_binary(pairs, workers)]


def suite_tower(workers: int = 1) -> list[CheckResult]:
    out = []
    for omega, h in ((3, "const:1"), (3, "pow:2"), (4, "const:1")):
        tower = build_tower(omega, 0.5, HFunction.parse(h), workers=workers)
        out.append(check_tower(tower, f"omega={omega} h={h}"))
    return out


def run_suite(name: str, cache: ProfileCache | None = None, workers: int = 1) -> list[CheckResult]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}")
    results: list[CheckResult] = []
    if name in ("lemmas", "all"):
        results += suite_lemmas(workers)
    if name in ("binary", "all"):
        results += suite_binary(workers=workers)
    if name in ("tower", "all"):
        results += suite_tower(workers)
    if name == "all" and cache is not None:
        results.append(check_cache(cache, workers))
    return results
