"""Arithmetic on the unit circle R/Z.

Points are represented in [0, 1).  Helpers accept floats, Fractions and
numpy arrays; exact types are preserved where the operation allows it.
"""

from fractions import Fraction

import numpy as np


def wrap01(x):
    """Reduce mod 1 into [0, 1).  Works for floats, Fractions and arrays."""
    if isinstance(x, np.ndarray):
        out = np.mod(x, 1.0)
        # mod can return 1.0 for inputs just below an integer
        out[out >= 1.0] = 0.0
        return out
    r = x % 1
    if r >= 1:
        r = r - 1
    return r


def circle_dist(a, b):
    """Distance d(a, b) = min(|a-b|, 1-|a-b|) on R/Z."""
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        t = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)) % 1.0
        return np.minimum(t, 1.0 - t)
    t = abs(a - b) % 1
    other = 1 - t
    return t if t <= other else other


def as_float(x) -> float:
    """Convert a circle point (float or Fraction) to float in [0, 1)."""
    if isinstance(x, Fraction):
        return float(x % 1)
    return float(wrap01(x))


def float_points(points) -> np.ndarray:
    """Convert a sequence of circle points to a float array."""
    return np.array([as_float(p) for p in points], dtype=float)


def dist_to_set(points: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Circle distance from each of `points` to the finite set `targets`.

    Sorted-neighbor search, O((P + K) log K); used when the target set is
    large (orbit-closure samples).
    """
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    tg = np.sort(np.asarray(targets, dtype=float) % 1.0)
    idx = np.searchsorted(tg, pts)
    left = tg[(idx - 1) % len(tg)]
    right = tg[idx % len(tg)]
    return np.minimum(circle_dist(pts, left), circle_dist(pts, right))


def min_pairwise_dist(points) -> float:
    """Minimum pairwise circle distance; inf for fewer than two points."""
    if len(points) < 2:
        return float("inf")
    v = np.sort(float_points(points))
    gaps = np.diff(v)
    wrap = 1.0 - (v[-1] - v[0])
    return float(min(gaps.min(), wrap))
