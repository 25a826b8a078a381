from fractions import Fraction

import numpy as np
import pytest

from ergmax import (DeltaTooLarge, calibrating_preorbit, circle_dist,
                    evaluate, mine_recurrences, read_pseudo_orbit_csv, shadow,
                    validate_pseudo_orbit, wrap01, write_pseudo_orbit_csv)


def test_validate_measures_defects(doubling):
    po = validate_pseudo_orbit(doubling, [0.3, 0.6, 0.2], periodic=True)
    assert po.periodic
    # the real defect is the wrap 0.4 -> 0.3; the middle step only carries
    # float noise (2*0.6 mod 1 is not exactly 0.2 in binary)
    assert po.defects[0] == 0.0 and po.defects[1] < 1e-15
    assert abs(po.defects[2] - 0.1) < 1e-12
    assert abs(po.delta - 0.1) < 1e-12
    assert po.jumps == (2,)
    assert abs(po.gamma - 0.1) < 1e-12


def test_worked_shadow_is_exactly_two_sevenths(doubling):
    po = validate_pseudo_orbit(doubling, [0.3, 0.6, 0.2], periodic=True)
    res = shadow(doubling, po)
    assert res.digits == (0, 1, 0)
    assert res.y == Fraction(2, 7)
    assert res.tracked == (Fraction(2, 7), Fraction(4, 7), Fraction(1, 7))
    assert res.eps_bound == pytest.approx(0.2)
    assert res.achieved_bound <= res.eps_bound
    assert res.orbit.period == 3


def test_shadow_rejects_oversized_delta(doubling):
    po = validate_pseudo_orbit(doubling, [0.1, 0.9], periodic=True)
    with pytest.raises(DeltaTooLarge):
        shadow(doubling, po)


def test_shadow_folds_fixedpoint_seam(doubling):
    # points hugging 1- track to the fixed point 0 through all-ones digits
    po = validate_pseudo_orbit(doubling, [0.998, 0.997, 0.995], periodic=True)
    res = shadow(doubling, po)
    assert res.y == Fraction(0)
    assert res.orbit.period == 1


def _noisy_true_orbit(m, rng, length, scale):
    orbit = [rng.random()]
    for _ in range(length - 1):
        orbit.append(float(evaluate(m, orbit[-1])))
    eta = scale / (m.k + 2 * np.pi * abs(m.a) + 1.0)
    return [wrap01(x + rng.uniform(-eta, eta)) for x in orbit]


def test_shadow_bound_randomized(doubling, tripling, perturbed, rng):
    # the acceptance suite runs 500 of these; a quick slice here
    maps = [doubling, tripling, perturbed]
    done = 0
    while done < 60:
        m = maps[done % 3]
        pts = _noisy_true_orbit(m, rng, int(rng.integers(2, 13)),
                                rng.uniform(1e-6, 0.15))
        po = validate_pseudo_orbit(m, pts, periodic=True)
        if po.delta >= (1.0 - m.lam) * m.e0:
            continue
        res = shadow(m, po)
        assert res.achieved_bound <= po.delta / (1.0 - m.lam) + 1e-10
        z = res.y
        for _ in range(len(pts)):
            z = evaluate(m, z)
        assert circle_dist(z, res.y) < 1e-10
        done += 1


def test_nonperiodic_segment_tracks_within_bound(doubling, rng):
    pts = _noisy_true_orbit(doubling, rng, 40, 0.05)
    po = validate_pseudo_orbit(doubling, pts, periodic=False)
    res = shadow(doubling, po)
    assert res.orbit is None
    assert res.achieved_bound <= po.delta / (1.0 - doubling.lam) + 1e-10
    # the tracked points really are one orbit segment
    for a, b in zip(res.tracked, res.tracked[1:]):
        assert circle_dist(evaluate(doubling, a), b) < 1e-9


def test_pseudo_orbit_csv_roundtrip(tmp_path, doubling):
    po = validate_pseudo_orbit(doubling, [0.3, 0.6, 0.2], periodic=True)
    path = tmp_path / "po.csv"
    write_pseudo_orbit_csv(str(path), po)
    back = read_pseudo_orbit_csv(str(path), doubling)
    assert back.periodic == po.periodic
    assert np.allclose(back.points, [0.3, 0.6, 0.2], atol=0.0)
    assert back.jumps == po.jumps
    assert back.delta == pytest.approx(po.delta)


def test_mine_recurrences_properties(doubling):
    found = mine_recurrences(doubling, "0.1234567", 4000, 1e-3, max_jumps=2)
    assert found
    for po in found:
        assert po.periodic
        assert po.delta <= 1e-3
        assert 1 <= len(po.jumps) <= 2
        assert len(po.points) >= 2
    # at least one two-jump splice shows up at this depth
    assert any(len(po.jumps) == 2 for po in found)


def test_mine_filter_keeps_near_calibrated_segments(doubling, cos_eff):
    loose = mine_recurrences(doubling, "0.6180339887498949", 4000, 1e-3,
                             max_jumps=1)
    tight = mine_recurrences(doubling, "0.6180339887498949", 4000, 1e-3,
                             max_jumps=1, eff=cos_eff, filter_tol=1e-2)
    assert len(tight) <= len(loose)
    for po in tight:
        avg = float(np.mean(cos_eff.values(np.array(po.points))))
        assert abs(avg) <= 1e-2 + 1e-9


def test_calibrating_preorbit_descends_to_maximizer(doubling, cos_eff, rng):
    for z in rng.random(5):
        po = calibrating_preorbit(doubling, cos_eff, z, 40)
        assert len(po.points) == 41
        assert max(po.residuals) < 1e-6
        assert circle_dist(po.points[-1], 0.0) < 1e-3
        # consecutive points really are preimages
        for cur, nxt in zip(po.points, po.points[1:]):
            assert circle_dist(evaluate(doubling, nxt), cur) < 1e-9
