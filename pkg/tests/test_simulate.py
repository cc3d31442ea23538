"""Trajectory simulator against exact and analytic oracles."""

from __future__ import annotations

import dataclasses
import math

import numpy as np
import pytest

from bdsmp.builders import SISParams, sis_model
from bdsmp.distributions import stationary_exact
from bdsmp.errors import RangeError
from bdsmp.model import IntensityModel, evaluate_at, from_linear_intensities
from bdsmp.reduction import (
    expected_absorption_from_one,
    numeric_window,
    reduce_boundary,
    return_time_explicit_numeric,
)
from bdsmp.simulate import (
    _sojourn,
    hitting_estimate,
    occupation_estimate,
    reduced_hitting_estimate,
    simulate_path,
)

# Absolute floor for occupation comparisons: states whose expected visit
# count over the horizon is near zero have degenerate batch-means SEs.
FLOOR = 1e-6


def alternator(family: str) -> IntensityModel:
    # Two states, unit rates, forced to swap every jump.
    return IntensityModel(
        N=1,
        g_plus=((1.0, 0.0), (0.0, 0.0)),
        g_minus=((0.0, 0.0), (1.0, 0.0)),
        sojourn_family=family,
    )


def sis20() -> IntensityModel:
    return sis_model(SISParams(N=20, contact_rate=0.5, recovery_rate=1.0))


def test_sojourn_samples():
    # Geometric: integer values from the inverse CDF of the first-success law.
    assert _sojourn(0.3, 0.5, True) == 1.0
    assert _sojourn(0.6, 0.5, True) == 2.0
    assert _sojourn(0.0, 0.25, True) == 1.0
    assert _sojourn(0.1, 1.0, True) == 1.0
    k = _sojourn(0.999, 0.1, True)
    assert k == float(int(k)) and k >= 1
    # Exponential: continuous inverse CDF.
    assert _sojourn(0.5, 2.0, False) == pytest.approx(-math.log(0.5) / 2.0)
    assert _sojourn(0.0, 3.0, False) == 0.0


def test_two_state_symmetric_occupation():
    r = simulate_path(alternator("exponential"), 0.5, horizon=2e4, seed=11)
    occ = occupation_estimate(r)
    for i in (0, 1):
        assert abs(occ[i] - 0.5) <= 3 * r.occupation_se[i] + FLOOR


def test_alternator_return_time_deterministic():
    # Unit-rate geometric clocks tick deterministically, so the round trip
    # 0 -> 1 -> 0 always takes exactly two time units.
    mean, se = hitting_estimate(alternator("geometric"), 0.5, 0, 0, 50, seed=3)
    assert mean == 2.0
    assert se == 0.0


def test_occupation_sums_to_one():
    r = simulate_path(sis20(), 0.05, horizon=5e3, seed=5)
    assert abs(float(r.occupation.sum()) - 1.0) <= 1e-12


def test_sis_occupation_matches_exact():
    im = sis20()
    r = simulate_path(im, 0.05, horizon=2e5, seed=7)
    pi = stationary_exact(from_linear_intensities(im, L=1), 0.05).probs
    for i in range(im.N + 1):
        assert abs(r.occupation[i] - pi[i]) <= 3 * r.occupation_se[i] + FLOOR


def test_sis_return_time_matches_formula():
    im = sis20()
    r = simulate_path(im, 0.05, horizon=2e5, seed=7)
    ev = evaluate_at(from_linear_intensities(im, L=1), 0.05)
    mean, se, count = r.mean_return[0]
    assert count > 10_000
    assert abs(mean - return_time_explicit_numeric(ev, 0)) <= 3 * se


def test_sis_absorption_episodes_match_formula():
    im = sis20()
    r = simulate_path(im, 0.05, horizon=2e5, seed=7)
    smp = from_linear_intensities(im, L=1)
    mean, se, count = r.mean_hit_0_from_1
    assert count > 10_000
    assert abs(mean - expected_absorption_from_one(smp, 0.05)) <= 3 * se


def test_bitwise_reproducibility():
    im = sis20()
    a = simulate_path(im, 0.05, horizon=1e4, seed=12345)
    b = simulate_path(im, 0.05, horizon=1e4, seed=12345)
    assert np.array_equal(a.occupation, b.occupation)
    assert np.array_equal(a.occupation_se, b.occupation_se)
    assert a.mean_return == b.mean_return
    assert a.mean_hit_0_from_1 == b.mean_hit_0_from_1
    c = simulate_path(im, 0.05, horizon=1e4, seed=12346)
    assert not np.array_equal(a.occupation, c.occupation)

    h1 = hitting_estimate(im, 0.05, 1, 0, 200, seed=9)
    h2 = hitting_estimate(im, 0.05, 1, 0, 200, seed=9)
    assert h1 == h2


def test_ergodicity_start_independence():
    im = sis_model(SISParams(N=10, contact_rate=0.5, recovery_rate=1.0))
    a = simulate_path(im, 0.05, horizon=1e5, seed=21, start=0)
    b = simulate_path(im, 0.05, horizon=1e5, seed=22, start=10)
    for i in range(11):
        tol = 3 * (a.occupation_se[i] + b.occupation_se[i]) + FLOOR
        assert abs(a.occupation[i] - b.occupation[i]) <= tol


def test_renewal_reward_identity():
    # occupation(i) * mean_return(i) recovers the mean sojourn at i.
    im = sis_model(SISParams(N=10, contact_rate=0.5, recovery_rate=1.0))
    eps = 0.05
    r = simulate_path(im, eps, horizon=1e5, seed=31)
    for i, (mean, se, count) in r.mean_return.items():
        if count < 1000:
            continue
        e_i = 1.0 / im.lam_total(i, eps)
        tol = 3 * (r.occupation_se[i] * mean + r.occupation[i] * se) + FLOOR
        assert abs(r.occupation[i] * mean - e_i) <= tol


def test_geometric_vs_exponential_small_rates():
    # With every total intensity well below one the integer clocks look
    # continuous: both families share the means 1/lam, so the long-run
    # occupations agree within noise.
    base = sis_model(SISParams(N=5, contact_rate=0.5, recovery_rate=1.0))
    scale = 0.04
    gp = tuple((a * scale, b * scale) for a, b in base.g_plus)
    gm = tuple((a * scale, b * scale) for a, b in base.g_minus)
    exp = IntensityModel(N=5, g_plus=gp, g_minus=gm, sojourn_family="exponential")
    geo = IntensityModel(N=5, g_plus=gp, g_minus=gm, sojourn_family="geometric")
    a = simulate_path(exp, 0.05, horizon=2e6, seed=41)
    b = simulate_path(geo, 0.05, horizon=2e6, seed=42)
    for i in range(6):
        tol = 3 * (a.occupation_se[i] + b.occupation_se[i]) + FLOOR
        assert abs(a.occupation[i] - b.occupation[i]) <= tol


def test_reduced_chain_hitting_agrees_with_full():
    im = sis20()
    eps = 0.05
    smp = from_linear_intensities(im, L=1)
    window = reduce_boundary(numeric_window(evaluate_at(smp, eps)), "low")
    assert (window.lo, window.hi) == (1, 20)
    rh, rse = reduced_hitting_estimate(window, 1, 2, replications=2000, seed=123)
    fh, fse = hitting_estimate(im, eps, 1, 2, replications=2000, seed=456)
    assert abs(rh - fh) <= 3 * math.hypot(rse, fse)


def test_simulate_range_errors():
    im = sis20()
    with pytest.raises(RangeError):
        simulate_path(im, 0.0, horizon=1e3, seed=1)
    with pytest.raises(RangeError):
        simulate_path(im, im.eps0 * 1.5, horizon=1e3, seed=1)
    with pytest.raises(RangeError):
        simulate_path(im, 0.05, horizon=0.0, seed=1)
    with pytest.raises(RangeError):
        simulate_path(im, 0.05, horizon=1e3, seed=1, start=21)
    with pytest.raises(RangeError):
        hitting_estimate(im, 0.05, 1, 25, 10, seed=1)
    with pytest.raises(RangeError):
        hitting_estimate(im, 0.05, 1, 0, 0, seed=1)


def test_geometric_returns_are_integers():
    geo = dataclasses.replace(alternator("geometric"), g_plus=((0.5, 0.0), (0.0, 0.0)))
    r = simulate_path(geo, 0.5, horizon=1e4, seed=8)
    mean, _, count = r.mean_return[0]
    # every return time is a sum of integer sojourns
    assert count > 100
    assert mean * count == pytest.approx(round(mean * count))
