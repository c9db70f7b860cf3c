"""|Phi_n| on the unit circle through the sine product F_n.

F_n(x) = prod_{d|n} sin(d x / 2) ** mu(n/d) and |F_n(x)| = |Phi_n(e^{ix})| for
n > 1. Two evaluation paths exist:

* the rational path takes x = 2 pi t / m with integers t, m. Which factors
  vanish is decided from d*t mod 2m in exact integer arithmetic, and each
  vanishing factor is replaced by its first-order term, so matched
  numerator/denominator zeros cancel to the a/b limit.
* the float path takes arbitrary x. d*x is split into exactly representable
  pieces before any sine is taken, keeping every factor within a few ulps
  even for d around 1e8.

Grids, zero scans and the binary witness use the rational path; golden-section
refinement and seed points use the float path.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .cyclo_poly import CycloPoly
from .errors import BudgetExceeded, InvalidZeroIndex, ScanBudgetExceeded
from .numtheory import SquarefreeOdd, is_prime, parse_squarefree_odd

TWO_PI = 2.0 * math.pi
DEFAULT_GRID_MULT = 16
DEFAULT_TOL = 1e-12
MAX_GOLDEN_ITER = 200
# grid points evaluated on [0, pi] (|F_n| is even, so this covers the circle)
DEFAULT_EVAL_CAP = 1 << 24
DEFAULT_SCAN_BUDGET = 10**8
CHUNK = 1 << 16
GRID_CANDIDATES = 12
SEED_CANDIDATES = 8

_SPLITTER = float(2**27 + 1)
_D_SPLIT = 1 << 26


def _map_chunks(fn: Callable, items: Sequence, workers: int) -> list:
    """Ordered map; chunk boundaries never depend on the worker count."""
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _ranges(start: int, stop: int, size: int = CHUNK) -> list[tuple[int, int]]:
    return [(a, min(a + size, stop)) for a in range(start, stop, size)]


# ---------------------------------------------------------------- float path


def _split(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """x = hi + lo exactly, each half carrying at most 26 significant bits."""
    c = _SPLITTER * x
    hi = c - (c - x)
    return hi, x - hi


def _angle_phasor(k, hi: np.ndarray, lo: np.ndarray, scale: float):
    """(cos, sin) of scale*k*(hi + lo) for integer k, without rounding k*x."""
    k_hi, k_lo = divmod(k, _D_SPLIT)
    k_lo = np.asarray(k_lo, dtype=float)
    parts = [k_lo * hi * scale, k_lo * lo * scale]
    if np.any(k_hi):
        k_hi = np.asarray(k_hi, dtype=float) * _D_SPLIT
        parts += [k_hi * hi * scale, k_hi * lo * scale]
    c, s = np.cos(parts[0]), np.sin(parts[0])
    for a in parts[1:]:
        ca, sa = np.cos(a), np.sin(a)
        c, s = c * ca - s * sa, s * ca + c * sa
    return c, s


def _F_float(n: SquarefreeOdd, x: np.ndarray) -> np.ndarray:
    hi, lo = _split(x)
    out = np.ones_like(x)
    for d, s in n.divisors:
        v = _angle_phasor(d, hi, lo, 0.5)[1]
        out = out * v if s == 1 else out / v
    return out


def eval_F(n: SquarefreeOdd, x):
    """Signed F_n(x) for real x (scalar or array)."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(arr)
    at_zero = arr == 0.0
    if np.any(at_zero):
        out[at_zero] = eval_F_rational(n, np.zeros(int(at_zero.sum()), dtype=np.int64), 1)
    if not np.all(at_zero):
        out[~at_zero] = _F_float(n, arr[~at_zero])
    return float(out[0]) if np.ndim(x) == 0 else out


# ------------------------------------------------------------- rational path


def _reduce_products(d: int, t: np.ndarray, mod: int) -> np.ndarray:
    if mod * mod < (1 << 62):
        return (d % mod) * (t % mod) % mod
    return np.array([d * int(v) % mod for v in t], dtype=object)


def eval_F_rational(n: SquarefreeOdd, t, m: int) -> np.ndarray:
    """Signed F_n at x = 2 pi t / m, t an integer array.

    A factor sin(pi*d*t/m) is zero exactly when m | d*t; near such a point it
    behaves like cos(pi*d*t/m) * d * eps / 2. Numerator and denominator zeros
    are counted in exact arithmetic: an excess of numerator zeros gives 0,
    otherwise the eps/2 parts cancel and each zero factor contributes +-d.
    """
    t = np.asarray(t, dtype=np.int64)
    mod = 2 * m
    val = np.ones(t.shape, dtype=float)
    balance = np.zeros(t.shape, dtype=np.int64)
    for d, s in n.divisors:
        r = _reduce_products(d, t, mod)
        zero = r % m == 0
        rf = np.asarray(r, dtype=float)
        f = np.sin(math.pi * rf / m)
        if np.any(zero):
            f = np.where(zero, np.where(rf == 0, float(d), -float(d)), f)
            balance += s * zero
        val = val * f if s == 1 else val / f
    if np.any(balance < 0):
        raise ArithmeticError("unbalanced zero in F_n; the product cannot be bounded")
    val[balance > 0] = 0.0
    return val


# ----------------------------------------------------- direct evaluation


def eval_phi_circle(poly: CycloPoly, x: float) -> float:
    """|Phi_n(e^{ix})| summed straight from the coefficient vector."""
    coeffs = np.asarray(poly.coeffs)
    k = np.flatnonzero(coeffs)
    c = coeffs[k].astype(float)
    hi, lo = _split(np.float64(x))
    cos_k, sin_k = _angle_phasor(k, hi, lo, 1.0)
    # numpy sums pairwise, so the rounding error grows like log(degree)
    return math.hypot(float(np.sum(c * cos_k)), float(np.sum(c * sin_k)))


# ------------------------------------------------------ derivative at zeros


def _check_zero_index(n: SquarefreeOdd, t0: int) -> None:
    if not (1 <= t0 < n.value) or math.gcd(t0, n.value) != 1:
        raise InvalidZeroIndex(f"t0 = {t0} is not a unit in [1, {n.value})")


def _derivative_abs(n: SquarefreeOdd, t: np.ndarray) -> np.ndarray:
    out = np.full(t.shape, n.value / 2.0)
    for d, s in n.divisors:
        if d == n.value:
            continue
        v = np.abs(np.sin(math.pi * np.asarray(_reduce_products(d, t, n.value), dtype=float) / n.value))
        out = out * v if s == 1 else out / v
    return out


def derivative_at_zero(n: SquarefreeOdd, t0: int) -> float:
    """|f_n| at the zero x0 = 2 pi t0 / n, from the closed-form product.

    For n = 1 the only zero is x0 = 0 (t0 = 0) and |f_1(0)| = 1/2.
    """
    if n.value == 1:
        if t0 % 1 != 0 or t0 != 0:
            raise InvalidZeroIndex("the zero of F_1 in [0, 2pi) has index 0")
        return 0.5
    _check_zero_index(n, t0)
    return float(_derivative_abs(n, np.array([t0], dtype=np.int64))[0])


def compute_D(
    n: SquarefreeOdd, scan_budget: int = DEFAULT_SCAN_BUDGET, workers: int = 1
) -> tuple[float, int]:
    """Minimum of |f_n| over every zero of F_n, and the smallest t0 attaining it.

    |f_n(2 pi - x)| = |f_n(x)|, so only t <= n/2 is scanned.
    """
    if n.value == 1:
        return 0.5, 0
    top = n.value // 2
    if top > scan_budget:
        raise ScanBudgetExceeded(f"{top} zeros to scan for n = {n.value}, budget {scan_budget}")

    def scan(bounds):
        t = np.arange(bounds[0], bounds[1], dtype=np.int64)
        t = t[np.gcd(t, n.value) == 1]
        if t.size == 0:
            return math.inf, 0
        v = _derivative_abs(n, t)
        i = int(np.argmin(v))
        return float(v[i]), int(t[i])

    best, t0 = math.inf, 0
    for v, t in _map_chunks(scan, _ranges(1, top + 1, 4 * CHUNK), workers):
        if v < best:
            best, t0 = v, t
    return best, t0


# -------------------------------------------------------------- maxima of F


@dataclass(frozen=True)
class CircleMax:
    L: float
    x_M: float
    scope: str  # "global" (full grid) or "seeded" (seed neighbourhoods only)
    refined: bool


def _golden_max(f, a: np.ndarray, b: np.ndarray, tol: float, max_iter: int = MAX_GOLDEN_ITER):
    """Golden-section maximisation of f on each bracket [a_i, b_i] at once."""
    g = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = a.astype(float), b.astype(float)
    c = b - g * (b - a)
    d = a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if np.all(b - a <= tol * np.maximum(1.0, np.abs(a) + np.abs(b))):
            break
        left = fc >= fd
        # keep [a, d] where the left probe wins, [c, b] otherwise
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = b - g * (b - a)
        new_d = a + g * (b - a)
        c, d = np.where(left, new_c, d), np.where(left, c, new_d)
        fc_keep, fd_keep = fc, fd
        probe = np.where(left, c, d)
        fp = f(probe)
        fc = np.where(left, fp, fd_keep)
        fd = np.where(left, fc_keep, fp)
    x = np.where(fc >= fd, c, d)
    return x, np.maximum(fc, fd)


def _fold(x: np.ndarray) -> np.ndarray:
    """Representative of +-x mod 2 pi in [0, pi]; |F_n| takes the same value."""
    x = np.mod(x, TWO_PI)
    return np.minimum(x, TWO_PI - x)


def _top(values: np.ndarray, xs: np.ndarray, k: int) -> np.ndarray:
    order = np.lexsort((xs, -values))
    return order[:k]


def maximize_F(
    n: SquarefreeOdd,
    grid_mult: int = DEFAULT_GRID_MULT,
    seeds: Iterable[float] | None = None,
    *,
    tol: float = DEFAULT_TOL,
    eval_cap: int = DEFAULT_EVAL_CAP,
    workers: int = 1,
    refine: bool = True,
) -> CircleMax:
    """Best value of |F_n| found on a grid (and seeds), polished by golden section.

    The grid has grid_mult*phi(n) points over [0, 2 pi); by evenness only the
    half on [0, pi] is evaluated. When that half exceeds ``eval_cap`` points
    the search falls back to neighbourhoods of the seeds alone (scope
    "seeded"); without seeds that raises BudgetExceeded. Either way the value
    returned is attained at x_M, so it is a lower bound on L_n.
    """
    if grid_mult < 4:
        raise ValueError("grid_mult must be at least 4")
    if n.value == 1:
        return CircleMax(1.0, math.pi, "global", False)
    absF = lambda x: np.abs(eval_F(n, x))  # noqa: E731
    N = grid_mult * n.phi
    step = TWO_PI / N
    half = N // 2
    seeds = np.asarray(list(seeds) if seeds is not None else [], dtype=float)

    cand_x: list[np.ndarray] = []
    cand_v: list[np.ndarray] = []
    brackets: list[tuple[np.ndarray, float]] = []

    if half + 1 <= eval_cap:
        scope = "global"

        def grid(bounds):
            j = np.arange(bounds[0], bounds[1], dtype=np.int64)
            return np.abs(eval_F_rational(n, j, N))

        v = np.concatenate(_map_chunks(grid, _ranges(0, half + 1), workers))
        left = np.concatenate(([v[1]], v[:-1]))
        right = np.concatenate((v[1:], [v[-2] if N % 2 == 0 else v[-1]]))
        peaks = np.flatnonzero((v >= left) & (v >= right))
        px = peaks * step
        pick = peaks[_top(v[peaks], px, GRID_CANDIDATES)]
        cand_x.append(pick * step)
        cand_v.append(v[pick])
        brackets.append((pick * step, step))
    elif seeds.size:
        scope = "seeded"
    else:
        raise BudgetExceeded(
            f"grid of {half + 1} points for n = {n.value} exceeds the cap {eval_cap}"
        )

    if seeds.size:
        sx = _fold(seeds)
        sv = np.concatenate(
            _map_chunks(lambda b: absF(sx[b[0] : b[1]]), _ranges(0, sx.size), workers)
        )
        pick = _top(sv, sx, SEED_CANDIDATES)
        cand_x.append(sx[pick])
        cand_v.append(sv[pick])
        brackets.append((sx[pick], 2.0 * step))

    xs = np.concatenate(cand_x)
    vs = np.concatenate(cand_v)
    if refine:
        centres = np.concatenate([c for c, _ in brackets])
        widths = np.concatenate([np.full(c.size, w) for c, w in brackets])
        rx, rv = _golden_max(absF, centres - widths, centres + widths, tol)
        rx = _fold(rx)
        xs = np.concatenate((xs, rx))
        vs = np.concatenate((vs, rv))
    best = _top(vs, xs, 1)[0]
    return CircleMax(float(vs[best]), float(xs[best]), scope, refine)


def compute_L(n: SquarefreeOdd, grid_mult: int = DEFAULT_GRID_MULT, seeds=None, **kw) -> tuple[float, float]:
    res = maximize_F(n, grid_mult, seeds, **kw)
    return res.L, res.x_M


# ---------------------------------------------------------------- profiles


@dataclass(frozen=True)
class CircleProfile:
    n: SquarefreeOdd
    L: float
    x_M: float
    D: float | None
    t0: int | None
    grid_mult: int
    refined: bool
    scope: str = "global"

    def to_json(self) -> dict:
        return {
            "n": str(self.n.value),
            "L": self.L,
            "x_M": self.x_M,
            "D": self.D,
            "t0": self.t0,
            "grid_mult": self.grid_mult,
            "refined": self.refined,
            "scope": self.scope,
        }

    @classmethod
    def from_json(cls, data: dict, n: SquarefreeOdd | None = None) -> CircleProfile:
        if n is None:
            n = parse_squarefree_odd(int(data["n"]))
        return cls(
            n=n,
            L=float(data["L"]),
            x_M=float(data["x_M"]),
            D=None if data["D"] is None else float(data["D"]),
            t0=None if data["t0"] is None else int(data["t0"]),
            grid_mult=int(data["grid_mult"]),
            refined=bool(data["refined"]),
            scope=data.get("scope", "global"),
        )


def circle_profile(
    n: SquarefreeOdd,
    grid_mult: int = DEFAULT_GRID_MULT,
    seeds=None,
    *,
    with_D: bool = True,
    scan_budget: int = DEFAULT_SCAN_BUDGET,
    **kw,
) -> CircleProfile:
    m = maximize_F(n, grid_mult, seeds, **kw)
    D = t0 = None
    if with_D:
        D, t0 = compute_D(n, scan_budget, kw.get("workers", 1))
    return CircleProfile(n, m.L, m.x_M, D, t0, grid_mult, m.refined, m.scope)


# ------------------------------------------------------------ binary case


@dataclass(frozen=True)
class BinaryWitness:
    p1: int
    p2: int
    a: int
    x: float
    bound: float
    measured: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


def binary_a(p1: int, p2: int) -> int:
    """The unique a with p1 | p2 + 2a and |a| < p1/2."""
    a = (-p2 * pow(2, -1, p1)) % p1
    return a - p1 if 2 * a > p1 else a


def binary_witness(p1: int, p2: int) -> BinaryWitness:
    if not (2 < p1 < p2 and is_prime(p1) and is_prime(p2)):
        raise ValueError(f"need odd primes p1 < p2, got {p1}, {p2}")
    a = binary_a(p1, p2)
    n = SquarefreeOdd.from_primes((p1, p2))
    # x = (1 + 1/p1 + (2a+1)/(p1 p2)) pi = 2 pi t / (2 p1 p2)
    t = p1 * p2 + p2 + 2 * a + 1
    m = 2 * p1 * p2
    measured = abs(float(eval_F_rational(n, np.array([t]), m)[0]))
    bound = 4.0 * (p1 - 2) * p2 / (math.pi**2 * abs(2 * a + 1))
    return BinaryWitness(p1, p2, a, TWO_PI * t / m, bound, measured)


def check_fnp_identity(n: SquarefreeOdd, p: int, t1: int) -> tuple[float, float]:
    """Both sides of |f_np(x1)| = p |f_n(p x1)| / |F_n(x1)| at x1 = 2 pi t1 / (np)."""
    if n.value == 1:
        raise ValueError("the identity is checked for n > 1")
    if not is_prime(p) or n.value % p == 0:
        raise ValueError(f"{p} must be a prime not dividing {n.value}")
    np_ = n.extend(p)
    _check_zero_index(np_, t1)
    lhs = derivative_at_zero(np_, t1)
    F_x1 = abs(float(eval_F_rational(n, np.array([t1]), np_.value)[0]))
    rhs = p * derivative_at_zero(n, t1 % n.value) / F_x1
    return lhs, rhs
