import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bdsmp.errors import LengthMismatch, RangeError, ViolatesD, ViolatesF, ViolatesG
from bdsmp.laurent import expansion
from bdsmp.model import (
    IntensityModel,
    TransitionPair,
    classify_scenario,
    evaluate_at,
    from_expansions,
    from_linear_intensities,
)

from model_corpus import SCENARIOS, random_intensity_model, random_expansion_smp


def const_pair(a_plus=0.5, e=0.5):
    def c(v):
        return expansion(0, [v, 0.0])

    return TransitionPair(
        p_minus=c(1 - a_plus), p_plus=c(a_plus), e_minus=c(e), e_plus=c(e)
    )


def test_symmetric_two_state_is_h1():
    m = from_expansions(1, [const_pair(), const_pair()])
    assert m.scenario.tag == "H1" and not m.scenario.mirrored
    assert m.L == 1 and m.N == 1


def test_shifted_low_boundary_is_h2():
    p0 = TransitionPair(
        p_minus=expansion(0, [1.0, -1.0]),
        p_plus=expansion(1, [1.0, 0.0]),
        e_minus=expansion(0, [1.0, 0.0]),
        e_plus=expansion(1, [1.0, 0.0]),
        l_plus=1,
    )
    m = from_expansions(1, [p0, const_pair()])
    assert m.scenario.tag == "H2" and not m.scenario.mirrored


def test_mirrored_case_flagged():
    pN = TransitionPair(
        p_minus=expansion(1, [1.0, 0.0]),
        p_plus=expansion(0, [1.0, -1.0]),
        e_minus=expansion(1, [1.0, 0.0]),
        e_plus=expansion(0, [1.0, 0.0]),
        l_minus=1,
    )
    m = from_expansions(1, [const_pair(), pN])
    assert m.scenario.tag == "H2" and m.scenario.mirrored


def test_both_boundaries_shifted_is_h3():
    p0 = TransitionPair(
        p_minus=expansion(0, [1.0, -1.0]),
        p_plus=expansion(1, [1.0, 0.0]),
        e_minus=expansion(0, [1.0, 0.0]),
        e_plus=expansion(1, [1.0, 0.0]),
        l_plus=1,
    )
    pN = TransitionPair(
        p_minus=expansion(1, [2.0, 0.0]),
        p_plus=expansion(0, [1.0, -2.0]),
        e_minus=expansion(1, [1.0, 0.0]),
        e_plus=expansion(0, [1.0, 0.0]),
        l_minus=1,
    )
    m = from_expansions(2, [p0, const_pair(), pN])
    assert m.scenario.tag == "H3"


def test_broken_normalization_rejected():
    bad = TransitionPair(
        p_minus=expansion(0, [0.4, 0.0]),
        p_plus=expansion(0, [0.5, 0.0]),
        e_minus=expansion(0, [1.0, 0.0]),
        e_plus=expansion(0, [1.0, 0.0]),
    )
    with pytest.raises(ViolatesF):
        from_expansions(1, [bad, const_pair()])


def test_higher_order_sum_rule_enforced():
    bad = TransitionPair(
        p_minus=expansion(0, [0.5, 0.1]),
        p_plus=expansion(0, [0.5, 0.2]),  # order-1 coefficients sum to 0.3
        e_minus=expansion(0, [1.0, 0.0]),
        e_plus=expansion(0, [1.0, 0.0]),
    )
    with pytest.raises(ViolatesF):
        from_expansions(1, [bad, const_pair()])


def test_interior_shift_rejected():
    shifted = TransitionPair(
        p_minus=expansion(0, [1.0, -1.0]),
        p_plus=expansion(1, [1.0, 0.0]),
        e_minus=expansion(0, [1.0, 0.0]),
        e_plus=expansion(1, [1.0, 0.0]),
        l_plus=1,
    )
    with pytest.raises(ViolatesD):
        from_expansions(2, [const_pair(), shifted, const_pair()])


def test_shift_mismatch_between_p_and_e_rejected():
    bad = TransitionPair(
        p_minus=expansion(0, [1.0, -1.0]),
        p_plus=expansion(1, [1.0, 0.0]),
        e_minus=expansion(0, [1.0, 0.0]),
        e_plus=expansion(0, [1.0, 0.0]),  # should start at order 1 like p_plus
        l_plus=1,
    )
    with pytest.raises(ViolatesG):
        from_expansions(1, [bad, const_pair()])


def test_length_mismatch_rejected():
    long_pair = TransitionPair(
        p_minus=expansion(0, [0.5, 0.0, 0.0]),
        p_plus=expansion(0, [0.5, 0.0, 0.0]),
        e_minus=expansion(0, [1.0, 0.0, 0.0]),
        e_plus=expansion(0, [1.0, 0.0, 0.0]),
    )
    with pytest.raises(LengthMismatch):
        from_expansions(1, [const_pair(), long_pair])


def test_absorbing_outward_branch_rejected():
    dead_top = TransitionPair(
        p_minus=expansion(0, [0.0, 0.0]),
        p_plus=expansion(0, [1.0, 0.0]),
        e_minus=expansion(0, [0.0, 0.0]),
        e_plus=expansion(0, [1.0, 0.0]),
    )
    with pytest.raises(ViolatesD):
        from_expansions(1, [const_pair(), dead_top])


# -- intensity-derived models ------------------------------------------------


def test_constant_intensities_give_constant_expansions():
    m = IntensityModel(N=2, g_plus=((1, 0),) * 3, g_minus=((3, 0),) * 3)
    smp = from_linear_intensities(m, L=3)
    for pr in smp.pairs:
        assert pr.p_plus.coeffs == (0.25, 0.0, 0.0, 0.0)
        assert pr.p_minus.coeffs == (0.75, 0.0, 0.0, 0.0)
        assert pr.e_plus.coeffs == (0.0625, 0.0, 0.0, 0.0)
        assert pr.e_minus.coeffs == (0.1875, 0.0, 0.0, 0.0)


def test_linear_intensity_hand_expansion():
    # lam_plus = 1 + eps, lam_minus = 1: p_plus = (1+eps)/(2+eps)
    m = IntensityModel(N=1, g_plus=((1, 1), (1, 1)), g_minus=((1, 0), (1, 0)))
    smp = from_linear_intensities(m, L=3)
    p = smp.pairs[0].p_plus
    assert p.h == 0 and p.k == 3
    expect = (0.5, 0.25, -0.125, 0.0625)
    for got, want in zip(p.coeffs, expect):
        assert abs(got - want) < 1e-12


def test_zero_self_loop_branch_admitted():
    # top-boundary up-branch identically zero, as in the epidemic model
    m = IntensityModel(N=1, g_plus=((1, 0), (0, 0)), g_minus=((1, 0), (2, 0)))
    smp = from_linear_intensities(m, L=2)
    assert smp.pairs[1].p_plus.coeffs == (0.0, 0.0, 0.0)
    assert smp.pairs[1].e_plus.coeffs == (0.0, 0.0, 0.0)
    assert smp.pairs[1].p_minus.coeff(0) == 1.0
    assert smp.scenario.tag == "H1"


def test_gsum_violation_rejected():
    with pytest.raises(ViolatesD):
        IntensityModel(N=1, g_plus=((0, 1), (1, 0)), g_minus=((0, 1), (1, 0)))


def test_geometric_eps0_clamped():
    m = IntensityModel(
        N=1,
        g_plus=((0.5, 1.0), (0.25, 0)),
        g_minus=((0.25, 0), (0.5, 1.0)),
        sojourn_family="geometric",
        eps0=1.0,
    )
    # total intensity 0.75 + eps stays <= 1 only up to eps = 0.25
    assert abs(m.eps0 - 0.25) < 1e-12


def test_negative_branch_slope_clamps_eps0():
    m = IntensityModel(N=1, g_plus=((1, -2), (1, 0)), g_minus=((1, 0), (1, 0)))
    assert abs(m.eps0 - 0.5) < 1e-12


def test_descriptor_round_trip():
    m = IntensityModel(
        N=2,
        g_plus=((0.1, 2), (0.3, 4), (0.5, 6)),
        g_minus=((0.7, 0), (0.08, 0), (0.09, 0)),
        sojourn_family="geometric",
        eps0=0.01,
    )
    m2 = IntensityModel.from_descriptor(m.to_descriptor())
    assert m2 == m
    assert m2.digest() == m.digest()
    assert len(m.digest()) == 12


# -- evaluate_at -------------------------------------------------------------


def test_evaluate_constant_model():
    m = from_expansions(1, [const_pair(), const_pair()])
    ev = evaluate_at(m, 0.5)
    assert list(ev.p_plus) == [0.5, 0.5]
    assert list(ev.e_total) == [1.0, 1.0]
    assert ev.lam_plus is None


def test_evaluate_exact_intensities():
    m = IntensityModel(N=1, g_plus=((1, 1), (1, 1)), g_minus=((1, 0), (1, 0)))
    smp = from_linear_intensities(m, L=2)
    ev = evaluate_at(smp, 1.0)
    assert abs(ev.p_plus[0] - 2.0 / 3.0) < 1e-15
    assert abs(ev.lam_plus[0] - 2.0) < 1e-15


def test_evaluate_range_checks():
    m = from_expansions(1, [const_pair(), const_pair()])
    with pytest.raises(RangeError):
        evaluate_at(m, 0.0)
    with pytest.raises(RangeError):
        evaluate_at(m, 1.5)  # above eps0 = 1


def test_evaluate_rejects_broken_probabilities():
    # raw expansions that leave [0,1] at large eps
    p = TransitionPair(
        p_minus=expansion(0, [0.5, -2.0]),
        p_plus=expansion(0, [0.5, 2.0]),
        e_minus=expansion(0, [1.0, 0.0]),
        e_plus=expansion(0, [1.0, 0.0]),
    )
    m = from_expansions(1, [p, const_pair()])
    evaluate_at(m, 0.01)  # fine in the perturbation regime
    with pytest.raises(RangeError):
        evaluate_at(m, 0.9)


def test_expansion_error_shrinks_with_eps():
    m = IntensityModel(N=1, g_plus=((1, 1), (1, 1)), g_minus=((1, 0), (1, 0)))
    smp = from_linear_intensities(m, L=3)
    p = smp.pairs[0].p_plus
    ratios = []
    for eps in (1e-2, 1e-3, 5e-4):
        exact = (1 + eps) / (2 + eps)
        ratios.append(abs(exact - p.evaluate(eps)) / eps ** smp.L)
    assert ratios[0] >= ratios[1] >= ratios[2]


# -- randomized structural checks --------------------------------------------


@settings(max_examples=40, deadline=None)
@given(
    st.integers(0, 2 ** 32 - 1),
    st.integers(1, 8),
    st.integers(1, 4),
    st.sampled_from(SCENARIOS),
)
def test_random_intensity_models_validate(seed, N, L, scenario):
    rng = random.Random(seed)
    m = random_intensity_model(rng, N, scenario)
    smp = from_linear_intensities(m, L)
    assert smp.L == L
    want_tag = "H2" if scenario == "H2-mirrored" else scenario
    assert smp.scenario.tag == want_tag
    assert smp.scenario.mirrored == (scenario == "H2-mirrored")
    # condition F holds on the derived expansions: p_- + p_+ = 1 order-wise
    for pr in smp.pairs:
        s = pr.p_minus + pr.p_plus
        assert abs(s.coeff(0) - 1.0) < 1e-10
        for l in range(1, s.k + 1):
            assert abs(s.coeff(l)) < 1e-10
    ev = evaluate_at(smp, min(0.01, smp.eps0 / 2))
    assert (ev.p_plus >= -1e-9).all() and (ev.p_minus >= -1e-9).all()


@settings(max_examples=40, deadline=None)
@given(
    st.integers(0, 2 ** 32 - 1),
    st.integers(1, 8),
    st.integers(1, 4),
    st.sampled_from(SCENARIOS),
)
def test_random_expansion_models_validate(seed, N, L, scenario):
    rng = random.Random(seed)
    smp = random_expansion_smp(rng, N, L, scenario)
    want_tag = "H2" if scenario == "H2-mirrored" else scenario
    assert smp.scenario.tag == want_tag
    pairs = smp.pairs
    assert classify_scenario(smp.N, pairs) == smp.scenario
