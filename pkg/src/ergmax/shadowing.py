"""Shadowing of pseudo-orbits and backward calibrating orbits.

A delta-pseudo-orbit with delta < (1 - lambda) * e0 is shadowed by a true
orbit within eps = delta / (1 - lambda).  The shadow point is constructed,
not just asserted: walking the pseudo-orbit backwards and composing the
inverse branch nearest each anchor gives a contraction with factor
lambda^p whose fixed point is the shadow.  Periodic pseudo-orbits of a
linear map yield the shadow as an exact rational M / (k^p - 1) once the
branch digits are known, so the worked cases are checked in exact
arithmetic.

Recurrence mining scans a forward orbit for near-returns and closes each
one into a periodic pseudo-orbit with one jump, or splices two
near-returns that share a junction into a two-jump cycle.  For linear
maps the forward orbit is iterated on exact numerators, which keeps long
orbits honest (floats collapse onto the dyadics).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .circle import as_float, circle_dist, min_pairwise_dist
from .dynamics import (ExpandingMap, PeriodicOrbit, evaluate, forward_orbit,
                       inverse_branches)
from .errors import DeltaTooLarge
from .lax import EffectiveObservable

JUMP_TOL = 1e-12
FIXED_POINT_TOL = 1e-14
EXACT_SWEEP_LIMIT = 256    # exact backward sweeps beyond this get slow


@dataclass(frozen=True)
class PseudoOrbit:
    """A finite pseudo-orbit with its measured defects."""

    points: tuple
    periodic: bool
    defects: tuple            # defect[i] = d(T(x_i), x_{i+1}); wrap included if periodic
    delta: float              # max defect
    jumps: tuple              # indices where the defect exceeds JUMP_TOL
    gamma: float              # min pairwise distance; inf below two points

    @property
    def gamma_delta_ratio(self) -> float:
        if self.delta == 0.0:
            return float("inf")
        return self.gamma / self.delta


def validate_pseudo_orbit(m: ExpandingMap, points, periodic: bool) -> PseudoOrbit:
    """Measure defects, jump set and separation of a candidate pseudo-orbit."""
    pts = tuple(points)
    if not pts:
        raise ValueError("pseudo-orbit needs at least one point")
    exact = m.kind == "linear" and all(isinstance(p, Fraction) for p in pts)
    steps = len(pts) - 1 + (1 if periodic else 0)
    defects = []
    for i in range(steps):
        img = evaluate(m, pts[i])
        tgt = pts[(i + 1) % len(pts)]
        if exact:
            defects.append(float(circle_dist(img, tgt)))
        else:
            defects.append(float(circle_dist(as_float(img), as_float(tgt))))
    delta = max(defects) if defects else 0.0
    jumps = tuple(i for i, d in enumerate(defects) if d > JUMP_TOL)
    return PseudoOrbit(points=pts, periodic=periodic, defects=tuple(defects),
                       delta=delta, jumps=jumps,
                       gamma=min_pairwise_dist(pts))


@dataclass(frozen=True)
class ShadowResult:
    y: object                   # shadow point; Fraction on the exact path
    tracked: tuple              # true orbit segment T^i(y) aligned with the input
    achieved_bound: float       # max_i d(T^i(y), x_i)
    eps_bound: float            # delta / (1 - lambda)
    orbit: Optional[PeriodicOrbit]   # closed orbit for periodic input
    digits: Optional[tuple]     # branch digits for linear maps, else None


def _nearest_preimage(m: ExpandingMap, z, anchor):
    """Inverse branch value closest to the anchor; ties take the smaller."""
    best = None
    best_d = None
    for w in inverse_branches(m, z):
        d = circle_dist(w, anchor) if isinstance(w, Fraction) else \
            circle_dist(as_float(w), as_float(anchor))
        if best is None or d < best_d:
            best, best_d = w, d
    return best


def _branch_digit(m: ExpandingMap, w, z) -> int:
    # w = (z + digit)/k on the linear map; the mod folds the seam case
    # where w rounded across 0 and the raw difference lands on -1
    return int(round(m.k * as_float(w) - as_float(z))) % m.k


def shadow(m: ExpandingMap, po: PseudoOrbit) -> ShadowResult:
    """Construct the orbit shadowing a pseudo-orbit.

    Periodic input gives a periodic point of the same period (possibly of
    smaller prime period, in which case the reported orbit is reduced).
    On linear maps a periodic shadow is an exact rational with denominator
    k^p - 1, recovered from the branch digits whatever the input type.
    """
    lam = m.lam
    bound = (1.0 - lam) * m.e0
    if po.delta >= bound:
        raise DeltaTooLarge(f"delta = {po.delta:.6g} >= (1-lambda)*e0 = {bound:.6g}")
    eps = po.delta / (1.0 - lam)
    pts_f = [as_float(p) for p in po.points]
    L = len(pts_f)
    exact = m.kind == "linear"

    if po.periodic:
        # converge the composed backward contraction in floats first
        w = pts_f[0]
        for _ in range(400):
            w_prev = w
            for i in range(L - 1, -1, -1):
                w = _nearest_preimage(m, w, pts_f[i])
            if circle_dist(w, w_prev) <= FIXED_POINT_TOL:
                break
        # final backward pass records the tracked positions
        tracked = [0.0] * L
        cur = w
        for i in range(L - 1, -1, -1):
            nxt = _nearest_preimage(m, cur, pts_f[i])
            tracked[i] = nxt
            cur = nxt
        y = cur
        digits = None
        if exact:
            # per-step shifts c_i = k*z_i - z_{i+1} are near-integers but can
            # land on -1 or k when the float chain hops between the seam
            # representatives 0 and 1-; feeding the raw shifts into the cyclic
            # solve and folding once mod k^L - 1 absorbs every such carry,
            # where a digit-by-digit fold would splice two expansions of the
            # same circle point into a different orbit
            shifts = [int(round(m.k * as_float(tracked[i])
                                - as_float(tracked[(i + 1) % L])))
                      for i in range(L)]
            M_num = 0
            for c in shifts:
                M_num = M_num * m.k + c
            y = Fraction(M_num % (m.k ** L - 1), m.k ** L - 1)
            tracked = [y]
            for _ in range(L - 1):
                tracked.append((m.k * tracked[-1]) % 1)
            digits = [(m.k * t.numerator) // t.denominator for t in tracked]
            achieved = max(float(circle_dist(tracked[i], po.points[i]))
                           for i in range(L))
        else:
            achieved = max(circle_dist(tracked[i], pts_f[i]) for i in range(L))
        orbit = _reduce_to_orbit(m, tracked, exact)
        return ShadowResult(y=y, tracked=tuple(tracked), achieved_bound=achieved,
                            eps_bound=eps, orbit=orbit,
                            digits=tuple(digits) if digits is not None else None)

    # finite segment: anchor the far end and sweep backwards once
    use_exact = exact and L <= EXACT_SWEEP_LIMIT
    src = list(po.points) if use_exact else pts_f
    tracked = [None] * L
    tracked[-1] = src[-1]
    digits = [0] * (L - 1) if m.kind == "linear" else None
    for i in range(L - 2, -1, -1):
        w = _nearest_preimage(m, tracked[i + 1], src[i])
        if digits is not None:
            digits[i] = _branch_digit(m, w, tracked[i + 1])
        tracked[i] = w
    if use_exact:
        achieved = max(float(circle_dist(tracked[i], po.points[i]))
                       for i in range(L))
    else:
        achieved = max(circle_dist(as_float(tracked[i]), pts_f[i])
                       for i in range(L))
    return ShadowResult(y=tracked[0], tracked=tuple(tracked),
                        achieved_bound=achieved, eps_bound=eps, orbit=None,
                        digits=tuple(digits) if digits is not None else None)


def _reduce_to_orbit(m: ExpandingMap, cycle, exact: bool) -> PeriodicOrbit:
    """Reduce a closed tracked cycle to its prime period and canonical form."""
    p = len(cycle)
    for q in range(1, p + 1):
        if p % q != 0:
            continue
        if exact:
            ok = all(cycle[i] == cycle[i % q] for i in range(p))
        else:
            ok = all(circle_dist(cycle[i], cycle[i % q]) <= 1e-12 for i in range(p))
        if ok:
            return PeriodicOrbit.from_cycle(m, list(cycle[:q]))
    raise AssertionError("closed cycle failed to reduce")  # unreachable


def _near_return_pairs(orbit: np.ndarray, delta: float, cap: int):
    """Pairs i < j with d(x_j, x_i) <= delta, in (i, j) order, capped."""
    L = len(orbit)
    order = np.argsort(orbit)
    sorted_pos = orbit[order]
    pairs = []
    for i in range(L - 1):
        lo = np.searchsorted(sorted_pos, orbit[i] - delta, side="left")
        hi = np.searchsorted(sorted_pos, orbit[i] + delta, side="right")
        cand = list(order[lo:hi])
        # wraparound windows at both ends of [0, 1)
        if orbit[i] - delta < 0.0:
            lo2 = np.searchsorted(sorted_pos, orbit[i] - delta + 1.0, side="left")
            cand.extend(order[lo2:])
        if orbit[i] + delta > 1.0:
            hi2 = np.searchsorted(sorted_pos, orbit[i] + delta - 1.0, side="right")
            cand.extend(order[:hi2])
        js = sorted(int(j) for j in set(cand)
                    if j > i and circle_dist(orbit[j], orbit[i]) <= delta)
        for j in js:
            pairs.append((i, j))
            if len(pairs) >= cap:
                return pairs
    return pairs


def mine_recurrences(m: ExpandingMap, seed, length: int, delta: float,
                     max_jumps: int = 1, *, eff: Optional[EffectiveObservable] = None,
                     filter_tol: float = 1e-4, max_results: int = 64) -> list:
    """Close near-returns of a forward orbit into periodic pseudo-orbits.

    One jump: a pair i < j with d(x_j, x_i) <= delta closes the segment
    [i, j) into a cycle whose one defect sits at the wrap.  Two jumps:
    a junction pair (i', j') splices the segment [i, i') onto [j', mend)
    where a second pair (i, mend) closes the loop; the spliced ranges are
    disjoint, so the cycle visits each orbit point once.

    When an effective observable is supplied, only segments lying in its
    near-zero set (max |fbar| <= filter_tol) are kept.  max_results caps
    each jump count separately, one-jump results listed first.

    Orbits on linear maps are iterated as exact numerators; pass decimal
    seeds as strings or Fractions to get the intended rational orbit.
    """
    if max_jumps not in (1, 2):
        raise ValueError("max_jumps must be 1 or 2")
    if length > 1_000_000:
        raise ValueError("orbit length capped at 1e6")
    orbit = forward_orbit(m, seed, length)
    pair_cap = max(max_results * 8, 512)
    pairs = _near_return_pairs(orbit, delta, pair_cap)

    def _keep(seg: list, out: list) -> None:
        if len(out) >= max_results:
            return
        po = validate_pseudo_orbit(m, seg, periodic=True)
        if po.delta > delta + 1e-15:
            return             # two-jump splices can overshoot; drop them
        if eff is not None:
            if float(np.max(np.abs(eff.values(np.array(seg))))) > filter_tol:
                return
        out.append(po)

    # the cap applies per jump count, so splices are never starved out
    closed = []
    for i, j in pairs:
        _keep(list(orbit[i:j]), closed)
    spliced = []
    if max_jumps == 2:
        for i, mend in pairs:
            if len(spliced) >= max_results:
                break
            for ip, jp in pairs:
                if i < ip <= jp < mend:
                    _keep(list(orbit[i:ip]) + list(orbit[jp:mend]), spliced)
    return closed + spliced


def write_pseudo_orbit_csv(path: str, po: PseudoOrbit) -> None:
    """CSV with columns idx, x, defect; measurements in '# key=value' lines."""
    with open(path, "w", newline="") as fh:
        for key, val in (("delta", repr(po.delta)),
                         ("jumps", ",".join(str(j) for j in po.jumps)),
                         ("gamma", repr(po.gamma)),
                         ("periodic", str(int(po.periodic)))):
            fh.write(f"# {key}={val}\n")
        writer = csv.writer(fh)
        writer.writerow(["idx", "x", "defect"])
        for i, p in enumerate(po.points):
            defect = po.defects[i] if i < len(po.defects) else 0.0
            writer.writerow([i, repr(as_float(p)), repr(float(defect))])


def read_pseudo_orbit_csv(path: str, m: ExpandingMap) -> PseudoOrbit:
    """Re-validate a stored pseudo-orbit; defects are measured afresh."""
    periodic = False
    points = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("# periodic="):
                periodic = line.strip().split("=", 1)[1] == "1"
        fh.seek(0)
        rows = csv.reader(line for line in fh if not line.startswith("#"))
        header = next(rows)
        xcol = header.index("x")
        for row in rows:
            points.append(float(row[xcol]))
    return validate_pseudo_orbit(m, points, periodic)


@dataclass(frozen=True)
class PreOrbit:
    """Backward calibrating orbit: points[0] is the start, then preimages."""

    points: tuple
    residuals: tuple          # |u(z_{next}) - u(z) - alpha - F(z)| per step
    ties: tuple               # steps where the argmax was tied

    def end_point(self) -> float:
        return self.points[-1]


def calibrating_preorbit(m: ExpandingMap, eff: EffectiveObservable,
                         z, depth: int) -> PreOrbit:
    """Walk the calibrated relation backwards from z.

    Each step moves to the preimage maximizing F + u; ties break toward
    the smaller preimage and are recorded.  The residual of the
    calibration identity u(z_{k+1}) = u(z_k) + alpha + F(z_k) is measured
    at every step; backwards the walk converges to the maximizing set.
    """
    u, obs, alpha = eff.u, eff.obs, eff.alpha
    cur = as_float(z)
    points = [cur]
    residuals = []
    ties = []
    for step in range(depth):
        pres = np.array([as_float(w) for w in inverse_branches(m, cur)])
        vals = obs.values(pres) + u.eval(pres)
        best = int(np.argmax(vals))
        tied = np.nonzero(vals >= vals[best] - 1e-12)[0]
        if len(tied) > 1:
            best = int(tied[0])          # preimages are sorted ascending
            ties.append(step)
        nxt = float(pres[best])
        residuals.append(abs(u.value(cur) - u.value(nxt) - alpha
                             - float(obs.values(np.array([nxt]))[0])))
        points.append(nxt)
        cur = nxt
    return PreOrbit(tuple(points), tuple(residuals), tuple(ties))
