"""Entropy diagnostics for expanding circle maps.

Three instruments around metric entropy, all desk scale:

  * partition entropy of an empirical measure over the k-adic interval
    partitions, minimized over depth (the defining infimum, truncated);
  * return-time statistics of an orbit to a small ball, with the gap and
    entropy expressions of the return-gap argument evaluated as
    diagnostics for comparison rather than asserted;
  * the periodic-approximation schedule for a target set and the matching
    perturbation f - beta * (smooth distance to the approximating orbit),
    which drives the maximizing measure toward low entropy.

Empirical measures from finite orbits stand in for invariant measures
throughout; a sample-size gate rejects depth budgets the sample cannot
populate.  Natural logarithms everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .circle import as_float, circle_dist, dist_to_set, float_points, wrap01
from .dynamics import (ExpandingMap, PeriodicOrbit, evaluate, evaluate_array,
                       forward_orbit, prime_orbits)
from .errors import InsufficientSamples, PeriodTooLarge, UnsupportedMap
from .locking import smooth_distance
from .maxsearch import DEFAULT_TIE_TOL, maximize_over_orbits, orbit_average
from .observables import FunctionObservable

MAX_ORBIT_LENGTH = 10_000_000
INDEX_CAP = 1 << 62       # cell indices are int64


@dataclass(frozen=True)
class MarkovPartition:
    """The k-adic interval partition [j/k^n, (j+1)/k^n) at depth n.

    Cells are indexed, never materialized.  For the linear map the image
    of each depth-n cell is exactly one depth-(n-1) cell, which is the
    Markov property in its simplest form.
    """

    map: ExpandingMap
    depth: int

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.map.k ** self.depth >= INDEX_CAP:
            raise PeriodTooLarge(
                f"k^depth = {self.map.k ** self.depth} exceeds the index cap")

    @property
    def cell_count(self) -> int:
        return self.map.k ** self.depth

    def cell_index(self, xs) -> np.ndarray:
        x = wrap01(np.asarray(xs, dtype=float))
        idx = (x * float(self.cell_count)).astype(np.int64)
        # points within one ulp of 1 can round up into a phantom cell
        return np.minimum(idx, self.cell_count - 1)

    def cell_interval(self, j: int):
        den = self.cell_count
        return Fraction(j, den), Fraction(j + 1, den)

    def image_cell(self, j: int) -> int:
        """Depth-(n-1) cell index of the image of cell j (linear maps)."""
        if self.map.kind != "linear":
            raise UnsupportedMap("Markov image indexing needs the linear map")
        if not 0 <= j < self.cell_count:
            raise ValueError("cell index out of range")
        return j % (self.map.k ** (self.depth - 1)) if self.depth > 1 else 0


@dataclass(frozen=True)
class EntropyEstimate:
    per_depth: tuple          # (depth, H_depth / depth), natural log
    value: float              # min over computed depths
    sample_size: int


def partition_entropy(m: ExpandingMap, samples,
                      max_depth: int) -> EntropyEstimate:
    """Empirical partition entropy, H_d/d minimized over depths 1..max_depth.

    The sample-size gate targets continuum-like measures: when the depth
    budget outruns log(sample count) and the deepest histogram holds about
    one sample per occupied cell, deeper levels measure the sampling, not
    the measure, and the call is rejected.  Finite-support samples
    (periodic orbits with repetitions) occupy a bounded cell set and pass
    at any depth.
    """
    x = wrap01(np.asarray(samples, dtype=float).ravel())
    nsamp = x.size
    if nsamp < 1:
        raise ValueError("need at least one sample")
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    deepest = MarkovPartition(m, max_depth)
    distinct = np.unique(deepest.cell_index(x)).size
    if (max_depth * math.log(m.k) > math.log(nsamp) + 2.0
            and distinct >= max(2.0, 0.9 * min(nsamp, deepest.cell_count))):
        raise InsufficientSamples(
            f"{nsamp} samples spread over {distinct} depth-{max_depth} "
            "cells; cells are not populated")
    per = []
    best = float("inf")
    for d in range(1, max_depth + 1):
        idx = MarkovPartition(m, d).cell_index(x)
        _, counts = np.unique(idx, return_counts=True)
        freq = counts / nsamp
        h = float(-np.sum(freq * np.log(freq))) / d
        per.append((d, h))
        best = min(best, h)
    return EntropyEstimate(per_depth=tuple(per),
                           value=best if best > 0.0 else 0.0,
                           sample_size=nsamp)


@dataclass(frozen=True)
class ReturnStatistics:
    """Visits of an orbit to the ball of radius half Q^-N around w."""

    w: float
    radius: float
    Q: float
    N: int
    N0: int
    return_times: tuple
    min_gap: int              # 0 when fewer than two returns
    gap_bound: float          # sqrt(2^(N - N0 - 1))
    entropy_bound: float      # log(sqrt 2) * |log lambda| / log Q


def return_times(m: ExpandingMap, q, w, Q: float, N: int, N0: int,
                 length: int) -> ReturnStatistics:
    """Scan the orbit of q for returns to w and report the gap data.

    gap_bound and entropy_bound are the displayed quantities of the
    return-gap argument evaluated at the run's parameters; in the source
    argument they live inside a contradiction, so here they are reported
    for comparison, never asserted.
    """
    if length > MAX_ORBIT_LENGTH:
        raise ValueError(f"orbit length capped at {MAX_ORBIT_LENGTH}")
    if Q <= 1.0:
        raise ValueError("Q must exceed 1")
    orbit = forward_orbit(m, q, length)
    radius = 0.5 * Q ** float(-N)
    hits = np.nonzero(circle_dist(orbit, as_float(w)) <= radius)[0]
    gaps = np.diff(hits)
    return ReturnStatistics(
        w=as_float(w), radius=radius, Q=Q, N=N, N0=N0,
        return_times=tuple(int(t) for t in hits),
        min_gap=int(gaps.min()) if gaps.size else 0,
        gap_bound=math.sqrt(2.0 ** (N - N0 - 1)),
        entropy_bound=math.log(math.sqrt(2.0)) * abs(math.log(m.lam))
        / math.log(Q))


def dynamical_ball(m: ExpandingMap, w, steps: int, eps: float,
                   grid_n: int = 1 << 20) -> np.ndarray:
    """Grid points whose iterates 0..steps stay eps-close to those of w.

    Expansion squeezes this set into the ball of radius lambda^steps * eps
    around w; the scan provides the test set for that inclusion.
    """
    x = np.arange(grid_n) / grid_n
    mask = np.ones(grid_n, dtype=bool)
    cur = x.copy()
    cw = as_float(w)
    for i in range(steps + 1):
        mask &= circle_dist(cur, cw) <= eps
        if i < steps:
            cur = evaluate_array(m, cur)
            cw = as_float(evaluate(m, cw))
    return x[mask]


def shannon_bound_check(a) -> tuple:
    """(lhs, rhs) of the entropy-sum bound: sum -a_i log a_i vs 1 + A log n.

    Zero entries contribute nothing to the left side (the 0 log 0
    convention); A is the plain sum of the entries.  Callers assert
    lhs <= rhs.
    """
    arr = np.asarray(a, dtype=float).ravel()
    if arr.size == 0:
        raise ValueError("need at least one entry")
    if np.any(arr < 0.0):
        raise ValueError("entries must be nonnegative")
    pos = arr[arr > 0.0]
    lhs = float(-np.sum(pos * np.log(pos))) if pos.size else 0.0
    rhs = 1.0 + float(arr.sum()) * math.log(arr.size)
    return lhs, rhs


@dataclass(frozen=True)
class ScheduleRow:
    """Best period-budget-n approximation of the target set.

    rate is the theta-logarithm of dist (infinite when the orbit lies on
    the target set); half_rate is floor(rate / 2).
    """

    n: int
    orbit: PeriodicOrbit
    dist: float
    rate: float
    half_rate: float


@dataclass(frozen=True)
class ApproximationSchedule:
    target: tuple             # finite point set being approximated
    theta: float
    per_n: tuple              # ScheduleRow, ascending in n
    C: Optional[float]        # fitted deficit/distance slope, if requested
    theta_within_bound: bool  # theta < min(e0, lambda, e0 / Lip(T))


def periodic_approximation(m: ExpandingMap, target_set, max_period: int,
                           theta: float, f=None,
                           tie_tol: float = DEFAULT_TIE_TOL
                           ) -> ApproximationSchedule:
    """Approximate a target set by enumerated periodic orbits.

    For each period budget n the orbit minimizing the averaged distance
    to the set is recorded with its rate exponents.  When a maximizing
    observable f is supplied, C is fitted as the largest observed ratio
    of average-deficit of f to averaged distance over the enumerated
    orbits; it is a lower estimate from tested measures only.

    theta is compared against min(e0, lambda, e0 / Lip(T)) and the verdict
    recorded rather than enforced; the rate bookkeeping stays meaningful
    for any theta in (0, 1).
    """
    pts = float_points(target_set)
    if pts.size == 0:
        raise ValueError("target set must be nonempty")
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    neg_dist = FunctionObservable(lambda x: -dist_to_set(x, pts),
                                  "negated distance to target", 1.0, 0.5)
    rows = []
    for n in range(1, max_period + 1):
        res = maximize_over_orbits(m, neg_dist, n, tie_tol)
        dist = max(0.0, -res.best_average)
        if dist == 0.0:
            rate = half = float("inf")
        else:
            rate = math.log(dist) / math.log(theta)
            half = float(math.floor(rate / 2.0))
        rows.append(ScheduleRow(n=n, orbit=res.argmax[0], dist=dist,
                                rate=rate, half_rate=half))
    C = None
    if f is not None:
        best = maximize_over_orbits(m, f, max_period, tie_tol).best_average
        ratios = []
        for orbit in prime_orbits(m, max_period):
            dv = -orbit_average(neg_dist, orbit)
            if dv > 1e-15:
                ratios.append((best - orbit_average(f, orbit)) / dv)
        C = max(ratios) if ratios else None
    bound = min(m.e0, m.lam, m.e0 / m.lip_t)
    return ApproximationSchedule(target=tuple(pts.tolist()), theta=theta,
                                 per_n=tuple(rows), C=C,
                                 theta_within_bound=theta < bound)


def zero_entropy_perturbation(f, sched: ApproximationSchedule, n: int,
                              beta: float, gamma: float) -> FunctionObservable:
    """f - beta * (smooth distance to the n-th approximating orbit).

    The smoothing budget is gamma * theta^(half_rate + rate/2).  A row
    with dist = 0 has infinite rate; the exponent 2n is substituted so
    the bump stays constructible (recorded in the certificates).
    beta = 0 returns an observable equal to f.
    """
    if beta < 0.0:
        raise ValueError("beta must be nonnegative")
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    row = next((r for r in sched.per_n if r.n == n), None)
    if row is None:
        raise ValueError(f"period budget {n} is not in the schedule")
    substituted = math.isinf(row.rate)
    exponent = 2.0 * n if substituted else row.half_rate + row.rate / 2.0
    budget = gamma * sched.theta ** exponent
    bump = smooth_distance(row.orbit, budget)

    def vals(x: np.ndarray) -> np.ndarray:
        return f.values(x) - beta * bump.values(x)

    out = FunctionObservable(
        vals, f"({f.text}) - {beta!r}*bump",
        f.lip_bound + beta * max(1.0, bump.achieved_lip),
        f.sup_bound + beta * (0.5 + bump.achieved_sup_error))
    out.certificates = {"eta": bump.eta,
                        "sup_error": bump.achieved_sup_error,
                        "lip": bump.achieved_lip,
                        "budget": budget,
                        "substituted_exponent": substituted,
                        "orbit_period": row.orbit.period}
    return out
