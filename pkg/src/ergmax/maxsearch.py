"""Brute-force maximization of ergodic averages over periodic orbits.

For observables of bounded period interest the maximizing measure among
periodic measures is found by enumerating every prime orbit up to a period
cap and comparing orbit averages.  alpha is reported with the sign
convention alpha(F) = -max average, so the effective observable
F + u - u o T + alpha is nonpositive.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .dynamics import ExpandingMap, PeriodicOrbit, prime_orbits
from .errors import UnsupportedMap

DEFAULT_TIE_TOL = 1e-9


@lru_cache(maxsize=16)
def _orbit_table(m: ExpandingMap, max_period: int):
    """Concatenated orbit points and segment offsets for fast averaging."""
    orbits = prime_orbits(m, max_period)
    pts = np.concatenate([o.float_points() for o in orbits])
    offsets = np.cumsum([0] + [o.period for o in orbits])[:-1]
    periods = np.array([o.period for o in orbits], dtype=float)
    return orbits, pts, offsets, periods


def orbit_average(obs, orbit: PeriodicOrbit) -> float:
    """Average of the observable along one periodic orbit."""
    return float(np.mean(obs.values(orbit.float_points())))


@dataclass(frozen=True)
class MaximizationResult:
    argmax: tuple              # orbits within tie_tol of the best average
    alpha: float               # -best average
    best_average: float
    runner_up_gap: float       # inf when nothing lies below the tie band
    tie_tol: float
    searched: int              # number of orbits compared

    @property
    def unique(self) -> bool:
        return len(self.argmax) == 1


def maximize_over_orbits(m: ExpandingMap, obs, max_period: int,
                         tie_tol: float = DEFAULT_TIE_TOL) -> MaximizationResult:
    """Best periodic orbit average among all prime orbits up to max_period."""
    orbits, pts, offsets, periods = _orbit_table(m, max_period)
    sums = np.add.reduceat(obs.values(pts), offsets)
    averages = sums / periods
    best = float(np.max(averages))
    tied = averages >= best - tie_tol
    argmax = tuple(o for o, t in zip(orbits, tied) if t)
    below = averages[~tied]
    gap = float(best - np.max(below)) if below.size else float("inf")
    return MaximizationResult(argmax=argmax, alpha=-best, best_average=best,
                              runner_up_gap=gap, tie_tol=tie_tol,
                              searched=len(orbits))


def rotation_number(orbit: PeriodicOrbit) -> Fraction:
    """Fraction of the orbit spent in [1/2, 1), for the doubling map.

    This is the combinatorial rotation number of the itinerary; it is only
    meaningful for the linear k=2 map.
    """
    m = orbit.map
    if m.kind != "linear" or m.k != 2:
        raise UnsupportedMap("rotation numbers are defined for linear:k=2 only")
    half = Fraction(1, 2)
    count = 0
    for p in orbit.points:
        if isinstance(p, Fraction):
            count += p >= half
        else:
            count += p >= 0.5
    return Fraction(count, orbit.period)


@dataclass(frozen=True)
class SweepRow:
    theta: float
    period: int
    rotation: Fraction
    alpha: float
    runner_up_gap: float


def theta_sweep(m: ExpandingMap, thetas, max_period: int,
                tie_tol: float = DEFAULT_TIE_TOL) -> list:
    """Maximize f_theta(x) = cos(2*pi*(x - theta)) for each theta.

    Reports the first argmax orbit (smallest period, then smallest point)
    per theta.  Along such a family the locked rotation number moves
    through a devil's staircase; the sweep is the raw material for that
    picture.
    """
    from .observables import Observable

    rows = []
    for theta in thetas:
        res = maximize_over_orbits(m, Observable.cosine(theta), max_period, tie_tol)
        first = res.argmax[0]
        rows.append(SweepRow(theta=float(theta), period=first.period,
                             rotation=rotation_number(first), alpha=res.alpha,
                             runner_up_gap=res.runner_up_gap))
    return rows
