"""Locking a maximizing orbit with an explicit smooth perturbation.

Given an effective observable fbar (nonpositive, vanishing on the target
orbit) the perturbed observable

    G1 = fbar - epsilon * g + h,        G = G1 + beta,

with g a smooth surrogate for the distance to the orbit and h small
smooth noise, has its maximum locked onto the orbit.  The budget of the
construction is a derived constant schedule: from the jump budget, the
orbit period, the defect delta and the map data, the schedule produces
the penalty scale rho, the approximation budgets Gamma1 and Gamma2 and
the margin constants a and b.  epsilon is pinned to sqrt(delta).

All schedule conditions are checked numerically and reported as data;
infeasibility never raises.  Verification is brute force: enumerate the
periodic orbits and confirm the target is the unique argmax, then test
the far-point penalty G <= -b away from the orbit on a dense grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .circle import circle_dist, dist_to_set, wrap01
from .dynamics import ExpandingMap, PeriodicOrbit, inverse_branches_array
from .errors import PerturbationTooLarge, TargetUnreachable
from .lax import EffectiveObservable
from .maxsearch import DEFAULT_TIE_TOL, maximize_over_orbits
from .observables import FunctionObservable

CERT_GRID = 1 << 16
ETA_FLOOR = 1e-9
LIP_FLAG_BAND = 1.95      # sampled bump slopes in [1.95, 2) are flagged


@dataclass(frozen=True)
class LockingConstants:
    """Derived constant schedule with feasibility flags.

    jumps is the pseudo-orbit jump budget, period the target orbit
    length.  The scale separations are operationalized as rho <= e0/10
    and gamma3 >= 10*delta; reasons lists every violated condition.
    """

    jumps: int
    period: int
    delta: float
    epsilon: float            # = sqrt(delta)
    lip_fbar: float
    lam: float
    lip_t: float
    gamma_delta: float        # min pairwise separation of the pseudo-orbit
    e0: float
    K: float
    rho: float
    gamma2: float
    gamma3: float
    Gamma1: float
    Gamma2: float
    a: float
    b: float
    feasible: bool
    reasons: tuple


def compute_constants(jumps: int, period: int, delta: float, lip_fbar: float,
                      lam: float, lip_t: float, gamma_delta: float,
                      e0: float = 0.5) -> LockingConstants:
    """Fill the schedule from its base quantities, epsilon = sqrt(delta).

    Infeasibility is data, not an exception, so parameter scans can chart
    the feasible region.
    """
    if jumps < 1 or period < 1:
        raise ValueError("jump budget and period must be >= 1")
    if min(delta, lip_fbar, lip_t, gamma_delta, e0) <= 0.0:
        raise ValueError("schedule inputs must be positive")
    if not 0.0 < lam < 1.0:
        raise ValueError("lam must lie in (0, 1)")
    eps = math.sqrt(delta)
    K = max(jumps * lip_fbar / (1.0 - lam) ** 2, (lip_fbar + 3.0) / (1.0 - lam))
    rho = 3.0 * K * delta / eps
    gamma2 = gamma_delta - 2.0 * delta / (1.0 - lam)
    gamma3 = gamma2 / lip_t - lam * rho
    Gamma1 = rho / (12.0 * period)
    Gamma2 = K * delta / (4.0 * period)
    a = (eps * gamma3 - K * delta - K * rho
         - 2.0 * period * eps * Gamma1 - 2.0 * period * Gamma2)
    b = eps * rho - K * delta / period - 2.0 * eps * Gamma1 - 2.0 * Gamma2
    reasons = []
    if a <= 0.0:
        reasons.append("a <= 0")
    if b <= 0.0:
        reasons.append("b <= 0")
    if rho > e0 / 10.0:
        reasons.append("rho > e0/10")
    if gamma3 < 10.0 * delta:
        reasons.append("gamma3 < 10*delta")
    if Gamma1 >= 1.0:
        reasons.append("Gamma1 >= 1")
    if Gamma2 >= 1.0:
        reasons.append("Gamma2 >= 1")
    if gamma2 <= 0.0:
        reasons.append("gamma2 <= 0")
    return LockingConstants(jumps=jumps, period=period, delta=delta,
                            epsilon=eps, lip_fbar=lip_fbar, lam=lam,
                            lip_t=lip_t, gamma_delta=gamma_delta, e0=e0,
                            K=K, rho=rho, gamma2=gamma2, gamma3=gamma3,
                            Gamma1=Gamma1, Gamma2=Gamma2, a=a, b=b,
                            feasible=not reasons, reasons=tuple(reasons))


def _dist_matrix(x: np.ndarray, pts: np.ndarray) -> np.ndarray:
    t = np.abs(x[None, :] - pts[:, None]) % 1.0
    return np.minimum(t, 1.0 - t)


def _softmin(dmat: np.ndarray, eta: float) -> np.ndarray:
    # smooth one-point distances, then a soft minimum at the same width
    s = np.sqrt(dmat * dmat + eta * eta) - eta
    smin = s.min(axis=0)
    return smin - eta * np.log(np.sum(np.exp(-(s - smin) / eta), axis=0))


class SmoothBump:
    """Smooth stand-in for the distance to a periodic orbit.

    Soft minimum over orbit points of s(d(x, y_i)) with
    s(t) = sqrt(t^2 + eta^2) - eta.  Slopes stay below 1 analytically;
    the sampled slope and sup error are recorded as the certificate.
    g is within achieved_sup_error of the true distance everywhere and
    slightly negative at the orbit points themselves.
    """

    def __init__(self, target_orbit: PeriodicOrbit, eta: float,
                 achieved_sup_error: float, achieved_lip: float):
        self.target_orbit = target_orbit
        self.eta = eta
        self.achieved_sup_error = achieved_sup_error
        self.achieved_lip = achieved_lip
        self.lip_flagged = achieved_lip >= LIP_FLAG_BAND
        self._pts = np.array(target_orbit.float_points())

    def values(self, xs) -> np.ndarray:
        x = np.atleast_1d(wrap01(np.asarray(xs, dtype=float)))
        return _softmin(_dist_matrix(x, self._pts), self.eta)

    def value(self, x) -> float:
        return float(self.values(np.array([float(x)]))[0])

    def __repr__(self):
        return (f"SmoothBump(period={self.target_orbit.period}, "
                f"eta={self.eta!r}, err={self.achieved_sup_error!r})")


def smooth_distance(orbit: PeriodicOrbit, gamma1: float,
                    sample_grid: int = CERT_GRID) -> SmoothBump:
    """Widest smoothing width whose sampled sup error stays under gamma1.

    The error |g - d(., orbit)| grows with eta, so bisection on eta finds
    the smoothest admissible bump; the certificate fields store what was
    actually measured on the sample grid.
    """
    if gamma1 <= 0.0:
        raise ValueError("gamma1 must be positive")
    pts = np.array(orbit.float_points())
    x = np.arange(sample_grid) / sample_grid
    dmat = _dist_matrix(x, pts)
    dist = dmat.min(axis=0)

    def sup_err(eta: float) -> float:
        return float(np.max(np.abs(_softmin(dmat, eta) - dist)))

    lo, hi = ETA_FLOOR, 0.25
    if sup_err(lo) >= gamma1:
        raise TargetUnreachable(
            f"sup error budget {gamma1!r} unreachable even at eta = {ETA_FLOOR}")
    if sup_err(hi) < gamma1:
        lo = hi
    else:
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            if sup_err(mid) < gamma1:
                lo = mid
            else:
                hi = mid
    g = _softmin(dmat, lo)
    err = float(np.max(np.abs(g - dist)))
    slopes = np.diff(g, append=g[:1])
    lip = float(np.max(np.abs(slopes)) * sample_grid)
    return SmoothBump(orbit, lo, err, lip)


@dataclass(frozen=True)
class LockingPerturbation:
    """G1 = fbar - epsilon*g + h together with its normalization shift."""

    base: EffectiveObservable
    orbit: PeriodicOrbit
    epsilon: float
    g: SmoothBump
    h: Optional[object]       # Observable noise, or None for h = 0
    beta: float               # -(best orbit average of G1), so max <G> = 0
    g1: FunctionObservable
    consts: LockingConstants
    beta_period: int          # enumeration cap used to compute beta
    infeasible_override: bool

    def g_values(self, xs) -> np.ndarray:
        return self.g1.values(xs) + self.beta


def locking_perturbation(eff: EffectiveObservable, orbit: PeriodicOrbit,
                         consts: LockingConstants, h=None, *,
                         max_period: int = 12,
                         tie_tol: float = DEFAULT_TIE_TOL,
                         override_infeasible: bool = False) -> LockingPerturbation:
    """Assemble G1 and normalize by the enumerated orbit maximum.

    beta is computed over periodic orbits up to max_period, the
    computable stand-in for the sup over invariant measures.  An
    infeasible schedule is rejected unless override_infeasible is set;
    the override is recorded on the result.
    """
    if not consts.feasible and not override_infeasible:
        raise ValueError("constant schedule infeasible: "
                         + ", ".join(consts.reasons))
    if h is not None:
        if h.sup_bound >= consts.Gamma2:
            raise PerturbationTooLarge(
                f"noise sup bound {h.sup_bound!r} >= Gamma2 = {consts.Gamma2!r}")
        if h.lip_bound >= 1.0:
            raise PerturbationTooLarge(
                f"noise Lipschitz bound {h.lip_bound!r} >= 1")
    bump = smooth_distance(orbit, consts.Gamma1)
    eps = consts.epsilon

    def g1_vals(x: np.ndarray) -> np.ndarray:
        v = eff.values(x) - eps * bump.values(x)
        return v + h.values(x) if h is not None else v

    lip = eff.lip_bound + eps * max(1.0, bump.achieved_lip)
    sup = eff.sup_bound + eps * (0.5 + bump.achieved_sup_error)
    if h is not None:
        lip += h.lip_bound
        sup += h.sup_bound
    g1 = FunctionObservable(g1_vals, f"locking[{eff.obs.text}]", lip, sup)
    res = maximize_over_orbits(eff.map, g1, max_period, tie_tol)
    return LockingPerturbation(base=eff, orbit=orbit, epsilon=eps, g=bump,
                               h=h, beta=res.alpha, g1=g1, consts=consts,
                               beta_period=max_period,
                               infeasible_override=(override_infeasible
                                                    and not consts.feasible))


def verify_locking(m: ExpandingMap, pert: LockingPerturbation,
                   max_period: int, tie_tol: float = DEFAULT_TIE_TOL):
    """(locked, margin): is the target the unique argmax of G1?

    margin is the runner-up gap of the brute-force scan, the distance in
    average value to the best competing orbit.
    """
    if max_period < pert.orbit.period:
        raise ValueError("max_period must cover the target orbit period")
    res = maximize_over_orbits(m, pert.g1, max_period, tie_tol)
    locked = res.unique and res.argmax[0].same_orbit(pert.orbit)
    return locked, res.runner_up_gap


@dataclass(frozen=True)
class FarPointReport:
    """Grid test of the penalty displays for G = G1 + beta."""

    grid_n: int
    slack: float              # measured grid imperfections of fbar
    far_count: int            # grid points with d(x, orbit) > rho
    far_max: Optional[float]  # max G over those points, None if vacuous
    far_bound: float          # -b + slack
    far_ok: bool
    sup_max: float            # max G over the whole grid
    sup_bound: float          # K*delta/period + 2 eps Gamma1 + 2 Gamma2 + slack
    sup_ok: bool


def far_point_check(pert: LockingPerturbation,
                    grid_n: int = CERT_GRID) -> FarPointReport:
    """Test G <= -b beyond distance rho from the orbit, and the sup of G.

    slack carries the two measured imperfections of the discrete setup:
    fbar can sit slightly above 0 on the grid, and the target average of
    fbar slightly below 0.  Both enter the displays additively and vanish
    for an exact sub-action.
    """
    c = pert.consts
    x = np.arange(grid_n) / grid_n
    fv = pert.base.values(x)
    gv = fv - pert.epsilon * pert.g.values(x) + pert.beta
    if pert.h is not None:
        gv = gv + pert.h.values(x)
    tavg = pert.base.orbit_average(pert.orbit)
    slack = max(float(fv.max()), 0.0) + abs(tavg) + 1e-9
    far = dist_to_set(x, np.array(pert.orbit.float_points())) > c.rho
    far_count = int(far.sum())
    far_max = float(gv[far].max()) if far_count else None
    far_bound = -c.b + slack
    far_ok = far_count == 0 or far_max <= far_bound
    sup_max = float(gv.max())
    sup_bound = (c.K * c.delta / c.period + 2.0 * c.epsilon * c.Gamma1
                 + 2.0 * c.Gamma2 + slack)
    return FarPointReport(grid_n=grid_n, slack=slack, far_count=far_count,
                          far_max=far_max, far_bound=far_bound, far_ok=far_ok,
                          sup_max=sup_max, sup_bound=sup_bound,
                          sup_ok=sup_max <= sup_bound)


@dataclass(frozen=True)
class SeparationReport:
    min_separation: float     # closest non-tracking preimage to the orbit
    threshold: float          # gamma3 - 1e-9
    isolated: bool
    samples_per_point: int


def preimage_separation(m: ExpandingMap, orbit: PeriodicOrbit,
                        consts: LockingConstants,
                        samples_per_point: int = 1000,
                        seed: int = 0) -> SeparationReport:
    """Sample the non-tracking preimages near each orbit point.

    Near y_k exactly one inverse branch continues the orbit backwards,
    landing by y_{k-1}; every other branch must stay gamma3 away from the
    whole orbit for the locking argument to isolate the target.
    """
    rng = np.random.default_rng(seed)
    pts = np.array(orbit.float_points())
    worst = float("inf")
    for k in range(orbit.period):
        z = wrap01(pts[k] + rng.uniform(-consts.rho, consts.rho,
                                        samples_per_point))
        branches = inverse_branches_array(m, z)
        prev = pts[(k - 1) % orbit.period]
        track = np.argmin(circle_dist(branches, prev), axis=0)
        mask = np.ones(branches.shape, dtype=bool)
        mask[track, np.arange(samples_per_point)] = False
        worst = min(worst, float(dist_to_set(branches[mask], pts).min()))
    thr = consts.gamma3 - 1e-9
    return SeparationReport(min_separation=worst, threshold=thr,
                            isolated=worst >= thr,
                            samples_per_point=samples_per_point)
