import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ergmax import (NoConvergence, Observable, effective_observable,
                    maximize_over_orbits, parse_observable, read_grid_csv,
                    solve_subaction, verify_subaction, write_grid_csv)
from ergmax.lax import GridFunction, apply_lax


def _random_grid(rng, n, lip_scale):
    # closed piecewise-linear loop with controlled steepest slope
    steps = rng.uniform(-1.0, 1.0, n)
    steps -= steps.mean()
    vals = np.cumsum(steps) * (lip_scale / n)
    return GridFunction(n, vals - vals.max())


def test_solver_matches_bruteforce(doubling, cos_obs):
    res = maximize_over_orbits(doubling, cos_obs, 12)
    sub = solve_subaction(doubling, cos_obs, 1 << 12)
    assert sub.converged
    assert sub.residual < 1e-6
    assert abs(sub.alpha_est - res.alpha) < 1e-5


def test_subaction_properties(cos_eff, doubling, cos_obs):
    res = maximize_over_orbits(doubling, cos_obs, 12)
    # nonpositivity, calibration on the argmax, alpha agreement
    report = verify_subaction(cos_eff, res, 1e-5)
    assert report.passed, [(i.name, i.measured) for i in report.items]
    assert cos_eff.sup_violation <= 1e-9


def test_effective_average_telescopes(cos_eff, doubling, cos_obs):
    # <fbar> along any closed orbit is <f> + alpha, exactly up to roundoff
    from ergmax import orbit_average, prime_orbits
    for orbit in prime_orbits(doubling, 7)[::5]:
        lhs = cos_eff.orbit_average(orbit)
        rhs = orbit_average(cos_obs, orbit) + cos_eff.alpha
        assert abs(lhs - rhs) < 1e-12


@settings(deadline=None, max_examples=25)
@given(st.integers(0, 2 ** 31 - 1), st.floats(0.1, 20.0))
def test_lax_lipschitz_contraction(seed, lip_scale):
    m_obs = Observable.cosine(0.0)
    from ergmax import parse_map_spec
    m = parse_map_spec("linear:k=2")
    rng = np.random.default_rng(seed)
    n = 512
    u = _random_grid(rng, n, lip_scale)
    out = apply_lax(m, m_obs, u, 0.0)
    budget = m.lam * (m_obs.lip_bound + u.lip_estimate())
    assert out.lip_estimate() <= budget + 2 * (m_obs.lip_bound + u.lip_estimate()) / n


@settings(deadline=None, max_examples=25)
@given(st.integers(0, 2 ** 31 - 1), st.floats(-2.0, 2.0))
def test_lax_additive_equivariance(seed, c):
    from ergmax import parse_map_spec
    m = parse_map_spec("linear:k=2")
    obs = Observable.cosine(0.3)
    rng = np.random.default_rng(seed)
    u = _random_grid(rng, 256, 3.0)
    shifted = GridFunction(256, u.values + c)
    a = apply_lax(m, obs, u, 0.0).values + c
    b = apply_lax(m, obs, shifted, 0.0).values
    assert np.max(np.abs(a - b)) < 1e-12


@settings(deadline=None, max_examples=25)
@given(st.integers(0, 2 ** 31 - 1))
def test_lax_monotone(seed):
    from ergmax import parse_map_spec
    m = parse_map_spec("linear:k=2")
    obs = Observable.cosine(0.0)
    rng = np.random.default_rng(seed)
    u = _random_grid(rng, 256, 3.0)
    v = GridFunction(256, u.values + rng.uniform(0.0, 1.0, 256))
    assert np.all(apply_lax(m, obs, u, 0.0).values
                  <= apply_lax(m, obs, v, 0.0).values + 1e-12)


def test_no_convergence_refused(doubling, cos_obs):
    sub = solve_subaction(doubling, cos_obs, 1 << 10, 1e-14, max_iter=2)
    assert not sub.converged
    with pytest.raises(NoConvergence):
        effective_observable(doubling, cos_obs, sub)


def test_grid_csv_roundtrip(tmp_path, doubling, cos_obs):
    sub = solve_subaction(doubling, cos_obs, 256)
    path = tmp_path / "u.csv"
    write_grid_csv(str(path), sub.u, {"n": 256, "obs": cos_obs.text})
    grid, meta = read_grid_csv(str(path))
    assert grid.n == 256
    assert np.array_equal(grid.values, sub.u.values)
    assert meta["obs"] == cos_obs.text


def test_perturbed_map_subaction(perturbed):
    obs = parse_observable("cos(2*pi*x)")
    res = maximize_over_orbits(perturbed, obs, 10)
    sub = solve_subaction(perturbed, obs, 1 << 13)
    assert sub.converged
    assert abs(sub.alpha_est - res.alpha) < 1e-4
    eff = effective_observable(perturbed, obs, sub)
    assert eff.sup_violation <= 1e-6
