import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ergmax import (InsufficientSamples, MarkovPartition, PeriodTooLarge,
                    UnsupportedMap, circle_dist, dynamical_ball,
                    forward_orbit, partition_entropy, periodic_approximation,
                    return_times, shannon_bound_check,
                    zero_entropy_perturbation)


def test_markov_partition_cells(doubling):
    part = MarkovPartition(doubling, 3)
    assert part.cell_count == 8
    assert list(part.cell_index(np.array([0.0, 0.124, 0.126, 0.999]))) \
        == [0, 0, 1, 7]
    lo, hi = part.cell_interval(5)
    assert (lo, hi) == (Fraction(5, 8), Fraction(6, 8))
    # T maps cell j onto the depth-2 cell j mod 4
    assert part.image_cell(5) == 1
    with pytest.raises(PeriodTooLarge):
        MarkovPartition(doubling, 80)


def test_image_cell_needs_linear(perturbed):
    with pytest.raises(UnsupportedMap):
        MarkovPartition(perturbed, 2).image_cell(0)


def test_periodic_orbit_entropy_law(doubling):
    # a period-p orbit occupies p cells once depth separates the points,
    # so the depth-d term is log(p)/d and the minimum sits at max_depth
    orbit = forward_orbit(doubling, Fraction(1, 3), 2)
    est = partition_entropy(doubling, np.tile(orbit, 600), 40)
    assert est.value == pytest.approx(math.log(2) / 40)
    assert est.per_depth[0] == (1, pytest.approx(math.log(2)))


def test_all_equal_samples_have_zero_entropy(doubling):
    est = partition_entropy(doubling, np.full(500, 0.37), 12)
    assert est.value == 0.0


def test_entropy_per_depth_dominates_min(doubling, rng):
    est = partition_entropy(doubling, rng.random(5000), 10)
    assert all(h >= est.value for _, h in est.per_depth)


def test_uniform_matches_bernoulli_oracle(doubling):
    u = np.random.default_rng(3).random(200_000)
    est = partition_entropy(doubling, u, 12)
    assert abs(est.value - math.log(2)) / math.log(2) < 0.02


def test_insufficient_samples_gate(doubling, rng):
    # continuum-like: few samples, huge depth, one sample per cell
    with pytest.raises(InsufficientSamples):
        partition_entropy(doubling, rng.random(64), 40)
    # finite support passes at the same depth
    orbit = forward_orbit(doubling, Fraction(1, 7), 3)
    est = partition_entropy(doubling, np.tile(orbit, 400), 40)
    assert est.value == pytest.approx(math.log(3) / 40)


def test_return_times_deterministic_case(doubling):
    # orbit of 1/7 cycles {1/7, 2/7, 4/7}; the ball around 1/7 with radius
    # 1/16 contains no other orbit point, so returns land every 3 steps
    stats = return_times(doubling, Fraction(1, 7), Fraction(1, 7),
                         Q=2.0, N=3, N0=0, length=1000)
    assert stats.radius == 0.0625
    assert stats.return_times[:4] == (0, 3, 6, 9)
    assert stats.min_gap == 3
    assert stats.gap_bound == pytest.approx(2.0)
    assert stats.entropy_bound == pytest.approx(
        math.log(math.sqrt(2)) * math.log(2) / math.log(2))


def test_return_times_rejects_bad_base(doubling):
    with pytest.raises(ValueError):
        return_times(doubling, 0.1, 0.2, Q=1.0, N=2, N0=0, length=100)


def test_dynamical_ball_contracts(doubling):
    # points whose first L iterates track w are within lambda^L eps of w
    w, L, eps = 0.2, 8, 0.1
    ball = dynamical_ball(doubling, w, L, eps, grid_n=1 << 18)
    assert ball.size > 0
    spread = np.max(circle_dist(ball, w))
    assert spread <= doubling.lam ** L * eps + 2.0 / (1 << 18)


@given(st.lists(st.floats(0, 10, allow_nan=False), min_size=1, max_size=12))
def test_shannon_bound(a):
    lhs, rhs = shannon_bound_check(a)
    assert lhs <= rhs + 1e-12


def test_shannon_worked_examples():
    lhs, rhs = shannon_bound_check([1 / 8] * 8)
    assert lhs == pytest.approx(math.log(8))
    assert rhs == pytest.approx(1 + math.log(8))
    lhs, rhs = shannon_bound_check([1.0, 0.0, 0.0])
    assert lhs == 0.0
    assert rhs == pytest.approx(1 + math.log(3))
    lhs, rhs = shannon_bound_check([2.0, 1.0])
    assert lhs == pytest.approx(-2 * math.log(2))
    assert rhs == pytest.approx(1 + 3 * math.log(2))


def test_periodic_approximation_hits_invariant_target(doubling):
    sched = periodic_approximation(doubling, [1 / 3, 2 / 3], 6, 0.5)
    by_n = {row.n: row for row in sched.per_n}
    assert by_n[2].dist == pytest.approx(0.0, abs=1e-12)
    assert by_n[2].rate == float("inf")
    # the fixed point cannot reach the target set
    assert by_n[1].dist == pytest.approx(1 / 3, abs=1e-9)
    assert not sched.theta_within_bound   # 0.5 is not below min(e0, lam)


def test_periodic_approximation_slope_fit(doubling, cos_obs):
    # C is the worst ratio (-alpha - <f>) / <d>; for target {1/4, 3/4}
    # the orbit {1/3, 2/3} gives (1 + 1/2) / (1/12) = 18
    sched = periodic_approximation(doubling, [0.25, 0.75], 10, 0.5, cos_obs)
    assert sched.C == pytest.approx(18.0, abs=1e-9)


def test_zero_entropy_perturbation_budget(doubling, cos_obs):
    sched = periodic_approximation(doubling, [1 / 3, 2 / 3], 6, 0.5, cos_obs)
    out = zero_entropy_perturbation(cos_obs, sched, 2, beta=0.05, gamma=0.05)
    cert = out.certificates
    # dist 0 at n = 2 makes the rate infinite; the exponent falls back to 2n
    assert cert["substituted_exponent"]
    assert cert["budget"] == pytest.approx(0.05 * 0.5 ** 4)
    assert cert["sup_error"] < cert["budget"]
    xs = np.linspace(0, 1, 97)
    base = cos_obs.values(xs)
    assert np.all(out.values(xs) <= base + 1e-12)
    with pytest.raises(ValueError):
        zero_entropy_perturbation(cos_obs, sched, 2, beta=-1.0, gamma=0.05)
    with pytest.raises(ValueError):
        zero_entropy_perturbation(cos_obs, sched, 99, beta=0.0, gamma=0.05)
