"""Expanding maps of the circle and their periodic orbits.

Two families are supported: the linear k-adic map T(x) = kx mod 1 and its
trigonometric perturbation T(x) = kx + a*sin(2*pi*x) mod 1, which stays
uniformly expanding while |2*pi*a| < k - 1.  The inverse branches of the
perturbed map contract by lambda = 1/(k - 2*pi*|a|); for the linear map
lambda = 1/k.

Periodic points of the linear map are the rationals j/(k^p - 1), so orbit
enumeration is done in exact integer arithmetic (numerators mod k^p - 1).
Perturbed-map periodic points are obtained by Newton continuation from the
linear solutions; the lift is monotone, so every root is bracketed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Union

import numpy as np

from .circle import as_float, circle_dist, wrap01
from .errors import NonExpanding, PeriodTooLarge

Point = Union[float, Fraction]

# Hard cap on k^p - 1 when enumerating periodic points.
ENUMERATION_CAP = 1 << 24

# Tolerances for float orbit bookkeeping.
CLOSURE_TOL = 1e-10
DISTINCT_TOL = 1e-9


@dataclass(frozen=True)
class ExpandingMap:
    """Uniformly expanding degree-k circle map."""

    kind: str            # "linear" or "perturbed"
    k: int
    a: float = 0.0

    def __post_init__(self):
        if self.kind not in ("linear", "perturbed"):
            raise ValueError(f"unknown map kind {self.kind!r}")
        if self.k < 2:
            raise NonExpanding(f"need k >= 2, got k={self.k}")
        if self.kind == "linear" and self.a != 0.0:
            raise ValueError("linear map takes no perturbation amplitude")
        if 2.0 * math.pi * abs(self.a) >= self.k - 1:
            raise NonExpanding(
                f"|2*pi*a| = {2 * math.pi * abs(self.a):.6g} >= k - 1 = {self.k - 1}"
            )

    @classmethod
    def linear(cls, k: int) -> "ExpandingMap":
        return cls("linear", k)

    @classmethod
    def perturbed(cls, k: int, a: float) -> "ExpandingMap":
        return cls("perturbed", k, float(a))

    @property
    def lam(self) -> float:
        """Contraction factor of the inverse branches."""
        if self.kind == "linear":
            return 1.0 / self.k
        return 1.0 / (self.k - 2.0 * math.pi * abs(self.a))

    @property
    def lip_t(self) -> float:
        """Lipschitz constant of the forward map."""
        return self.k + 2.0 * math.pi * abs(self.a)

    @property
    def branch_count(self) -> int:
        return self.k

    @property
    def e0(self) -> float:
        """Radius on which every inverse branch is well defined."""
        return 0.5

    def spec(self) -> str:
        if self.kind == "linear":
            return f"linear:k={self.k}"
        return f"perturbed:k={self.k},a={self.a!r}"


def parse_map_spec(text: str) -> ExpandingMap:
    """Parse "linear:k=2" or "perturbed:k=2,a=0.05"."""
    try:
        kind, _, rest = text.partition(":")
        params = {}
        if rest:
            for item in rest.split(","):
                key, _, val = item.partition("=")
                params[key.strip()] = val.strip()
        if kind == "linear":
            return ExpandingMap.linear(int(params["k"]))
        if kind == "perturbed":
            return ExpandingMap.perturbed(int(params["k"]), float(params["a"]))
    except (KeyError, ValueError) as exc:
        if isinstance(exc, NonExpanding):
            raise
        raise ValueError(f"bad map spec {text!r}: {exc}") from exc
    raise ValueError(f"bad map spec {text!r}: unknown kind {kind!r}")


def _lift(m: ExpandingMap, z: float) -> float:
    # Lift restricted to [0, 1); monotone onto [0, k].
    return m.k * z + m.a * math.sin(2.0 * math.pi * z)


def _dlift(m: ExpandingMap, z: float) -> float:
    return m.k + 2.0 * math.pi * m.a * math.cos(2.0 * math.pi * z)


def evaluate(m: ExpandingMap, x: Point) -> Point:
    """Apply T once.  Exact for Fraction input on linear maps."""
    if m.kind == "linear":
        if isinstance(x, Fraction):
            return (m.k * x) % 1
        return (m.k * float(x)) % 1.0
    return wrap01(_lift(m, as_float(x)))


def evaluate_array(m: ExpandingMap, x: np.ndarray) -> np.ndarray:
    """Vectorized forward map on float arrays."""
    x = np.asarray(x, dtype=float)
    if m.kind == "linear":
        return np.mod(m.k * x, 1.0)
    return wrap01(m.k * x + m.a * np.sin(2.0 * np.pi * x))


def _solve_branch(m: ExpandingMap, target: float, lo: float, hi: float) -> float:
    """Root of lift(z) = target on [lo, hi], bisection-secured Newton."""
    z = 0.5 * (lo + hi)
    for _ in range(100):
        g = _lift(m, z) - target
        if g > 0:
            hi = z
        else:
            lo = z
        step = g / _dlift(m, z)
        znew = z - step
        if not (lo < znew < hi):
            znew = 0.5 * (lo + hi)
        if abs(znew - z) < 1e-16:
            z = znew
            break
        z = znew
    return z


def inverse_branches(m: ExpandingMap, x: Point) -> list:
    """All k preimages of x, sorted ascending in [0, 1).

    Exact Fractions for Fraction input on linear maps; for perturbed maps
    each branch is solved to residual below 1e-12.
    """
    if m.kind == "linear":
        if isinstance(x, Fraction):
            xr = x % 1
            return sorted((xr + i) / m.k for i in range(m.k))
        xf = as_float(x)
        # (x + k - 1)/k can round up to 1.0 when x is within an ulp of 1
        return sorted(wrap01((xf + i) / m.k) for i in range(m.k))
    xf = as_float(x)
    # lift maps [0,1) monotonically onto [0,k); preimages solve lift(z) = x + i
    return sorted(wrap01(_solve_branch(m, xf + i, 0.0, 1.0)) for i in range(m.k))


def inverse_branches_array(m: ExpandingMap, x: np.ndarray) -> np.ndarray:
    """Preimages of an array of points, shape (k, len(x)), branch-sorted."""
    x = np.asarray(x, dtype=float)
    if m.kind == "linear":
        return np.stack([(x + i) / m.k for i in range(m.k)])
    out = np.empty((m.k, x.size))
    flat = x.ravel()
    for j, xv in enumerate(flat):
        for i in range(m.k):
            out[i, j] = _solve_branch(m, xv + i, 0.0, 1.0)
    return out.reshape((m.k,) + x.shape)


@dataclass(frozen=True)
class PeriodicOrbit:
    """A prime periodic orbit, listed from its smallest point along T."""

    map: ExpandingMap
    points: tuple
    period: int = field(init=False)

    def __post_init__(self):
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "period", len(pts))
        if not pts:
            raise ValueError("orbit needs at least one point")
        exact = all(isinstance(p, Fraction) for p in pts)
        if min(pts) != pts[0]:
            raise ValueError("orbit must start at its smallest point")
        for i, p in enumerate(pts):
            succ = pts[(i + 1) % len(pts)]
            img = evaluate(self.map, p)
            if exact:
                if img != succ:
                    raise ValueError(f"not T-consistent at index {i}")
            elif circle_dist(as_float(img), as_float(succ)) > CLOSURE_TOL:
                raise ValueError(f"not T-consistent at index {i}")
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if exact:
                    if pts[i] == pts[j]:
                        raise ValueError("orbit points must be distinct")
                elif circle_dist(as_float(pts[i]), as_float(pts[j])) <= DISTINCT_TOL:
                    raise ValueError("orbit points must be distinct")

    @classmethod
    def from_cycle(cls, m: ExpandingMap, cycle) -> "PeriodicOrbit":
        """Rotate a T-consistent cycle so it starts at its smallest point."""
        cycle = list(cycle)
        start = cycle.index(min(cycle))
        return cls(m, tuple(cycle[start:] + cycle[:start]))

    def float_points(self) -> np.ndarray:
        return np.array([as_float(p) for p in self.points], dtype=float)

    def same_orbit(self, other: "PeriodicOrbit", tol: float = 1e-9) -> bool:
        if self.period != other.period:
            return False
        a, b = self.float_points(), other.float_points()
        return bool(np.max(circle_dist(a, b)) <= tol)


def periodic_points(m: ExpandingMap, p: int) -> list:
    """All fixed points of T^p (period p, not necessarily prime).

    Linear maps: the exact rationals j/(k^p - 1).  Perturbed maps: Newton
    continuation from those seeds, one monotone bracket per root.
    """
    if p < 1:
        raise ValueError("period must be >= 1")
    count = m.k ** p - 1
    if count > ENUMERATION_CAP:
        raise PeriodTooLarge(f"k^p - 1 = {count} exceeds cap {ENUMERATION_CAP}")
    if m.kind == "linear":
        return [Fraction(j, count) for j in range(count)]
    return _perturbed_periodic_points(m, p)


def _lift_iterate(m: ExpandingMap, x: float, p: int):
    """(T~^p(x) - carried integer, derivative) with reduced intermediate values."""
    z, n, d = x, 0, 1.0
    for _ in range(p):
        d *= _dlift(m, z)
        y = _lift(m, z)
        i = int(math.floor(y))
        if i >= m.k:       # guard the closed upper endpoint
            i = m.k - 1
        n = m.k * n + i
        z = y - i
    return z, n, d


def _perturbed_periodic_points(m: ExpandingMap, p: int) -> list:
    count = m.k ** p - 1

    def g(x: float, j: int) -> float:
        z, n, _ = _lift_iterate(m, x, p)
        return (z - x) + (n - j)

    roots = []
    for j in range(count):
        lo, hi = 0.0, 1.0
        x = j / count
        for _ in range(80):
            z, n, d = _lift_iterate(m, x, p)
            val = (z - x) + (n - j)
            if val > 0:
                hi = x
            elif val < 0:
                lo = x
            else:
                break
            step = val / (d - 1.0)
            xn = x - step
            if not (lo < xn < hi):
                xn = 0.5 * (lo + hi)
            if abs(xn - x) < 1e-15:
                x = xn
                break
            x = xn
        roots.append(x % 1.0)
    return sorted(roots)


def _linear_prime_orbits(m: ExpandingMap, p: int) -> list:
    """Prime-period-p orbits of the linear map, via numerators mod k^p - 1."""
    mod = m.k ** p - 1
    seen = bytearray(mod)
    orbits = []
    for j in range(mod):
        if seen[j]:
            continue
        cycle = [j]
        cur = (m.k * j) % mod
        while cur != j:
            cycle.append(cur)
            cur = (m.k * cur) % mod
        for c in cycle:
            seen[c] = 1
        if len(cycle) != p:
            continue          # prime period divides p strictly
        start = cycle.index(min(cycle))
        cycle = cycle[start:] + cycle[:start]
        orbits.append(PeriodicOrbit(m, tuple(Fraction(c, mod) for c in cycle)))
    orbits.sort(key=lambda o: o.points[0])
    return orbits


def _perturbed_prime_orbits(m: ExpandingMap, p: int) -> list:
    pts = np.array(_perturbed_periodic_points(m, p))
    if len(pts) == 0:
        return []
    images = evaluate_array(m, pts)
    # match each image to the enumerated root set
    idx = np.searchsorted(pts, images)
    nxt = np.empty(len(pts), dtype=int)
    for i, (im, j) in enumerate(zip(images, idx)):
        cand = [(j - 1) % len(pts), j % len(pts)]
        nxt[i] = min(cand, key=lambda c: circle_dist(pts[c], im))
    seen = np.zeros(len(pts), dtype=bool)
    orbits = []
    for i in range(len(pts)):
        if seen[i]:
            continue
        cycle = [i]
        cur = nxt[i]
        while cur != i and not seen[cur] and len(cycle) <= p:
            cycle.append(cur)
            cur = nxt[cur]
        for c in cycle:
            seen[c] = True
        if len(cycle) != p:
            continue
        orbits.append(PeriodicOrbit.from_cycle(m, [float(pts[c]) for c in cycle]))
    orbits.sort(key=lambda o: o.points[0])
    return orbits


@lru_cache(maxsize=32)
def prime_orbits(m: ExpandingMap, max_period: int) -> tuple:
    """All prime periodic orbits of period <= max_period.

    Returned sorted by (period, smallest point); the tuple is cached per
    (map, max_period) so repeated maximization calls reuse the enumeration.
    """
    if max_period < 1:
        raise ValueError("max_period must be >= 1")
    if m.k ** max_period - 1 > ENUMERATION_CAP:
        raise PeriodTooLarge(
            f"k^p - 1 = {m.k ** max_period - 1} exceeds cap {ENUMERATION_CAP}"
        )
    out = []
    for p in range(1, max_period + 1):
        if m.kind == "linear":
            out.extend(_linear_prime_orbits(m, p))
        else:
            out.extend(_perturbed_prime_orbits(m, p))
    return tuple(out)


def forward_orbit(m: ExpandingMap, seed, length: int) -> np.ndarray:
    """Forward orbit of seed, returned as floats.

    Linear maps iterate the numerator exactly (a <- k*a mod b), so long
    orbits of rational seeds keep full precision; a float seed of the
    k-adic map would collapse onto 0 after about 53 doublings.  Decimal
    strings are accepted and read as exact rationals.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    if isinstance(seed, str):
        seed = Fraction(seed)
    if m.kind == "linear" and isinstance(seed, Fraction):
        seed %= 1
        num, den = seed.numerator, seed.denominator
        out = np.empty(length)
        for i in range(length):
            out[i] = num / den
            num = (m.k * num) % den
        return out
    x = as_float(seed)
    out = np.empty(length)
    for i in range(length):
        out[i] = x
        x = as_float(evaluate(m, x))
    return out


def orbit_count_by_necklace(k: int, p: int) -> int:
    """Number of prime period-p orbits of the k-adic map (Moebius count)."""
    def mobius(n: int) -> int:
        result, d, nn = 1, 2, n
        while d * d <= nn:
            if nn % d == 0:
                nn //= d
                if nn % d == 0:
                    return 0
                result = -result
            d += 1
        if nn > 1:
            result = -result
        return result

    total = 0
    for d in range(1, p + 1):
        if p % d == 0:
            total += mobius(p // d) * (k ** d - 1)
    return total // p
