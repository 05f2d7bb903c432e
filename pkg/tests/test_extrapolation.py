import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gbsmit.extrapolation import (
    ExtrapolationPlan,
    PoleCrossingError,
    PolePolynomials,
    displaced_prefactor,
    extrapolate,
    gamma_coefficients,
    improved_extrapolate,
    nonuniform_first_order,
    relative_variance,
    required_samples,
    variance_bounds,
)
from gbsmit.gaussian import (
    GaussianState,
    a_matrix,
    apply_interferometer,
    apply_loss,
    apply_uniform_loss,
    coherent_state,
    squeezed_vacuum_state,
    tmsv_state,
)
from gbsmit.interferometer import beamsplitter
from gbsmit.probability import pattern_probability, tmsv_exact_prob

TABLE_C = (1.0, 1.2, 1.4, 1.6, 1.8)


def tmsv_values(r, plan, pattern):
    return [pattern_probability(apply_uniform_loss(tmsv_state(r), float(e)), pattern) for e in plan.losses]


def test_gamma_known_values():
    np.testing.assert_allclose(gamma_coefficients(TABLE_C), [126, -420, 540, -315, 70], atol=1e-9)
    np.testing.assert_allclose(gamma_coefficients([1.0]), [1.0])
    np.testing.assert_allclose(gamma_coefficients([1.0, 2.0]), [2.0, -1.0])
    with pytest.raises(ValueError):
        gamma_coefficients([1.0, 1.0])


def test_gamma_residuals_random_plans():
    rng = np.random.default_rng(3)
    for _ in range(100):
        m = int(rng.integers(0, 9))
        c = np.concatenate([[1.0], 1.0 + np.cumsum(rng.uniform(0.05, 0.4, size=m))])
        g = gamma_coefficients(c)
        assert abs(g.sum() - 1) < 1e-9
        scale = np.abs(g).sum()
        for k in range(1, m + 1):
            assert abs(np.dot(g, c**k)) < 1e-9 * scale


def test_plan_validation_and_json():
    plan = ExtrapolationPlan(0.2, TABLE_C)
    assert plan.order == 4
    np.testing.assert_allclose(plan.losses, [0.2, 0.24, 0.28, 0.32, 0.36])
    back = ExtrapolationPlan.from_json(plan.to_json())
    assert back == plan
    np.testing.assert_allclose(back.gamma, plan.gamma)
    ignored = ExtrapolationPlan.from_json('{"epsilon": 0.2, "c": [1, 2], "gamma": [5, 6]}')
    np.testing.assert_allclose(ignored.gamma, [2, -1])
    with pytest.raises(ValueError):
        ExtrapolationPlan.from_json('{"epsilon": 0.2, "c": [1, 2], "order": 1}')
    for eps, c in [(0.2, (1.2, 1.4)), (0.2, (1.0, 1.4, 1.2)), (0.6, (1.0, 1.8)), (-0.1, (1.0,))]:
        with pytest.raises(ValueError):
            ExtrapolationPlan(eps, c)


def test_extrapolate_basic():
    plan = ExtrapolationPlan(0.2, TABLE_C)
    assert extrapolate([0.37] * 5, plan) == pytest.approx(0.37)
    with pytest.raises(ValueError):
        extrapolate([1.0, 2.0], plan)


def test_table_one_spot_values():
    plan2, plan5 = ExtrapolationPlan(0.2, TABLE_C), ExtrapolationPlan(0.5, TABLE_C)
    poles = PolePolynomials((1.0, 1.0))
    assert extrapolate(tmsv_values(1.0, plan2, (1, 1)), plan2) == pytest.approx(0.2429, abs=5e-5)
    assert extrapolate(tmsv_values(1.0, plan5, (0, 0)), plan5) == pytest.approx(0.8406, abs=5e-5)
    assert improved_extrapolate(tmsv_values(1.0, plan5, (1, 1)), plan5, poles, 2) == pytest.approx(0.2436, abs=5e-5)
    assert improved_extrapolate(tmsv_values(1.0, plan2, (2, 2)), plan2, poles, 4) == pytest.approx(0.1400, abs=5e-5)
    assert improved_extrapolate(tmsv_values(1.0, plan5, (0, 0)), plan5, poles, 0) == pytest.approx(0.4200, abs=5e-5)


@pytest.mark.parametrize("eps", [0.05, 0.2, 0.35, 0.5])
@pytest.mark.parametrize("n", [0, 1])
def test_improved_exact_for_low_photon_numbers(eps, n):
    plan = ExtrapolationPlan(eps, TABLE_C)
    poles = PolePolynomials((1.0, 1.0))
    est = improved_extrapolate(tmsv_values(1.0, plan, (n, n)), plan, poles, 2 * n)
    assert est == pytest.approx(tmsv_exact_prob(1.0, n), abs=1e-9)


def test_order_suppression():
    c = (1.0, 1.5, 2.0)
    m = len(c) - 1
    exact = tmsv_exact_prob(1.0, 1)
    errors = [abs(extrapolate(tmsv_values(1.0, ExtrapolationPlan(e, c), (1, 1)), ExtrapolationPlan(e, c)) - exact) for e in (0.05, 0.025, 0.0125)]
    for big, small in zip(errors, errors[1:]):
        assert big / small >= 2 ** (m + 0.5)


def test_improved_approaches_standard_for_small_eps():
    c = (1.0, 1.5, 2.0)
    poles = PolePolynomials((0.8, 0.8))
    diffs = []
    for e in (0.02, 0.01):
        plan = ExtrapolationPlan(e, c)
        v = tmsv_values(0.8, plan, (2, 2))
        diffs.append(abs(improved_extrapolate(v, plan, poles, 4) - extrapolate(v, plan)))
    assert diffs[1] < diffs[0] / 3


def test_pole_polynomials():
    poles = PolePolynomials((1.0, 0.0, 1.0, 0.5))
    assert poles.q(0.0) == 1 and poles.p(0.0) == 1
    assert len(poles.distinct) == 2
    t1, t5 = math.tanh(1.0), math.tanh(0.5)
    eps = 0.4
    assert poles.q(eps) == pytest.approx((1 - eps**2 * t1**2) * math.sqrt(1 - eps**2 * t5**2))
    assert poles.p(eps) == pytest.approx((1 - eps**2 * t1**2) * (1 - eps**2 * t5**2))
    assert poles.factor(eps, 3) == pytest.approx(poles.q(eps) * poles.p(eps) ** 3)
    poles.check([0.5, 0.9])
    big = PolePolynomials((20.0,))
    with pytest.raises(PoleCrossingError):
        big.check([0.9999999])


def test_negative_outputs_not_clamped():
    plan = ExtrapolationPlan(0.1, (1.0, 2.0))
    assert extrapolate([0.1, 0.3], plan) == pytest.approx(-0.1)


def test_displaced_prefactor_trivial():
    assert displaced_prefactor([0.3, 0.7], np.zeros(4), 0.4) == 1.0
    r = np.array([0.5])
    d = np.array([0.3 + 0.4j, 0.3 - 0.4j])
    st = GaussianState(squeezed_vacuum_state(r).sigma, d)
    direct = math.exp(-0.5 * np.real(d.conj() @ np.linalg.solve(st.sigma_q, d)))
    assert displaced_prefactor(r, d, 0.0) == pytest.approx(direct, abs=1e-14)
    lossy = apply_uniform_loss(st, 0.3)
    dl = lossy.disp
    direct = math.exp(-0.5 * np.real(dl.conj() @ np.linalg.solve(lossy.sigma_q, dl)))
    assert displaced_prefactor(r, d, 0.3) == pytest.approx(direct, abs=1e-14)


def test_coherent_prefactor_matches_vacuum_probability():
    # unit-intensity coherent state: P(0) is the prefactor itself
    d = np.array([1.0 + 0j, 1.0 + 0j])
    lossy = apply_uniform_loss(coherent_state([1.0]), 0.3)
    assert displaced_prefactor([0.0], d, 0.3) == pytest.approx(pattern_probability(lossy, (0,)), abs=1e-14)
    assert displaced_prefactor([0.0], d, 0.3) == pytest.approx(math.exp(-0.7), abs=1e-14)


def test_nonuniform_trivial():
    assert nonuniform_first_order(0.3, [[0.3, 0.3]], [[2.0, 2.0]]) == pytest.approx(0.3)
    # affine in each loss: P = P0 + a eps_a + b eps_b
    p0, a, b, ea, eb = 0.4, -0.7, -0.2, 0.05, 0.08
    base = p0 + a * ea + b * eb
    pert = [[p0 + a * 2 * ea + b * eb, p0 + a * ea + b * 3 * eb]]
    assert nonuniform_first_order(base, pert, [[2.0, 3.0]]) == pytest.approx(p0)
    with pytest.raises(ValueError):
        nonuniform_first_order(0.3, [[0.3]], [[1.0]])


def test_nonuniform_two_mode_circuit():
    inputs = squeezed_vacuum_state([0.6, 0.3])
    bs = beamsplitter(0.7, 0.2)

    def circuit(ea, eb):
        return apply_interferometer(apply_loss(inputs, [ea, eb]), bs)

    pattern = (1, 1)
    exact = pattern_probability(circuit(0.0, 0.0), pattern)
    base = pattern_probability(circuit(0.05, 0.05), pattern)
    pert = [[pattern_probability(circuit(0.1, 0.05), pattern), pattern_probability(circuit(0.05, 0.1), pattern)]]
    est = nonuniform_first_order(base, pert, [[2.0, 2.0]])
    assert abs(est - exact) < abs(base - exact) / 2


def test_variance_bounds():
    lo, hi = variance_bounds([0.3], [1.0], 0.02, 0.02)
    assert lo == pytest.approx(0.02) and hi == pytest.approx(0.02)
    g = gamma_coefficients(TABLE_C)
    assert float(np.sum(g**2)) == pytest.approx(588001)
    probs = [0.2] * 5
    lo, hi = variance_bounds(probs, g, 0.01, 0.01)
    assert lo == pytest.approx(588001 * 0.01) and hi == pytest.approx(lo)
    assert relative_variance(probs, g, [0.01] * 5) == pytest.approx(lo)
    lo, hi = variance_bounds([0.2, 0.25, 0.1], [3, -3, 1], 0.01, 0.03)
    assert lo <= relative_variance([0.2, 0.25, 0.1], [3, -3, 1], [0.02, 0.01, 0.03]) <= hi
    with pytest.raises(ValueError):
        variance_bounds([0.0, 0.0], [2, -1], 0.1, 0.1)


def test_required_samples():
    assert required_samples(0.5, 1.0, 1.0) == 1
    n = required_samples(0.2436, 0.01, 588001)
    assert 1e8 < n < 1e9
    p, target = 0.3, 1e-3
    n = required_samples(p, target, 1.0)
    assert (1 - p) / p / n <= target
    with pytest.raises(ValueError):
        required_samples(1.0, 0.1, 1.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 0.5), st.floats(0.1, 1.5))
def test_vacuum_probability_recovered_exactly(eps, r):
    plan = ExtrapolationPlan(eps, (1.0, 1.5))
    poles = PolePolynomials((r, r))
    st_ = apply_uniform_loss(tmsv_state(r), eps)
    np.testing.assert_allclose(a_matrix(st_), a_matrix(st_).T, atol=1e-12)
    assert improved_extrapolate(tmsv_values(r, plan, (0, 0)), plan, poles, 0) == pytest.approx(tmsv_exact_prob(r, 0), abs=1e-9)
