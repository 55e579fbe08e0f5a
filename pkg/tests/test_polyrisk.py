import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from pcrrisk.exceptions import DomainError
from pcrrisk.polyrisk import (
    PolyModel,
    Regime,
    alpha_star,
    classify,
    compare,
    fixed_point,
    h_kappa,
    q_kappa,
    q_kappa_stationary_point,
    risk,
    risk_curve,
    risk_over,
    risk_under,
    stieltjes_at,
)

# Frozen from the bisection oracle on the raw companion equation.
S_STAR_K2 = 0.221807797
M0_K2 = 0.0491986987
M0P_K2 = 0.00573788812


def test_model_validation():
    with pytest.raises(DomainError):
        PolyModel(kappa=0, beta=0.3)
    with pytest.raises(DomainError):
        PolyModel(kappa=1, beta=1.0)
    with pytest.raises(DomainError):
        PolyModel(kappa=1, beta=0.3, N=0)
    with pytest.raises(DomainError):
        PolyModel(kappa=1, beta=0.3, sigma=-1)


@pytest.mark.parametrize(
    "kappa, alpha, expected",
    [(2.0, 0.3, -0.7), (1.0, 0.3, math.log(0.3))],
)
def test_h_kappa_examples(kappa, alpha, expected):
    assert h_kappa(PolyModel(kappa, 0.3), alpha) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("kappa", [1.0, 2.0])
@pytest.mark.parametrize("alpha", [0.01, 0.05, 0.1, 0.2, 0.3])
def test_h_kappa_symbolic(kappa, alpha):
    assert h_kappa(PolyModel(kappa, 0.3), alpha) == pytest.approx(
        oracles.h_symbolic(kappa, 0.3, alpha), abs=1e-12
    )


def test_h_kappa_noise_shift_only_at_kappa_one():
    assert h_kappa(PolyModel(1.0, 0.3, sigma=0.5), 0.1) == pytest.approx(
        h_kappa(PolyModel(1.0, 0.3), 0.1) - 0.25
    )
    assert h_kappa(PolyModel(0.5, 0.3, sigma=0.5), 0.1) == h_kappa(PolyModel(0.5, 0.3), 0.1)


@pytest.mark.parametrize("kappa", [0.5, 1.0, 2.0, 3.0])
@pytest.mark.parametrize("beta", [0.1, 0.3, 0.5])
def test_scaled_h_decreasing(kappa, beta):
    # h itself need not be monotone for kappa < 1; alpha^(1-kappa) h is
    model = PolyModel(kappa, beta)
    grid = np.linspace(1e-3 * beta, beta, 50)
    values = [a ** (1 - kappa) * h_kappa(model, a) for a in grid]
    assert all(x > y for x, y in zip(values, values[1:]))


def test_alpha_star_kappa2_closed_form():
    assert alpha_star(PolyModel(2.0, 0.3)) == pytest.approx(1 - math.sqrt(0.7), abs=1e-10)


def test_alpha_star_kappa1_oracle():
    expected = oracles.bisect(lambda a: oracles.h_symbolic(1, 0.3, a), 1e-9, 0.3)
    assert alpha_star(PolyModel(1.0, 0.3)) == pytest.approx(expected, abs=1e-10)
    assert expected == pytest.approx(0.0872291702, abs=1e-9)


@pytest.mark.parametrize("kappa", [0.5, 1.0, 2.0, 3.0])
@pytest.mark.parametrize("beta", [0.1, 0.3, 0.5])
def test_minimum_risk_identity(kappa, beta):
    # at the optimum the risk equals N^(1-kappa) * beta * alpha*^(-kappa)
    model = PolyModel(kappa, beta)
    a = alpha_star(model)
    expected = model.scale * beta * a ** (-kappa)
    assert risk_under(model, a) == pytest.approx(expected, rel=1e-8)


@pytest.mark.parametrize("kappa", [0.5, 1.0, 2.0, 3.0])
def test_risk_under_is_u_shaped(kappa):
    model = PolyModel(kappa, 0.3)
    a = alpha_star(model)
    r = risk_under(model, a)
    for other in (0.5 * a, 0.9 * a, a + 0.5 * (0.3 - a), 0.299):
        assert risk_under(model, other) > r


def test_risk_under_example():
    assert risk_under(PolyModel(1.0, 0.3), 0.1) == pytest.approx(math.log(10) * 1.5, rel=1e-12)


def test_risk_under_alpha_zero():
    assert risk_under(PolyModel(2.0, 0.3, sigma=1.0), 0.0) == pytest.approx(1.0)
    assert risk_under(PolyModel(0.5, 0.3), 0.0) == pytest.approx(1000**0.5 * 2.0)
    with pytest.raises(DomainError):
        risk_under(PolyModel(1.0, 0.3), 0.0)
    with pytest.raises(DomainError):
        risk_under(PolyModel(1.0, 0.3), 0.3)


@pytest.mark.parametrize(
    "kappa, s, alpha, expected",
    [(2.0, 1.0, 1.0, 0.3 - math.pi / 4), (1.0, 0.2, 1.0, 1.5 - math.log(6))],
)
def test_q_kappa_examples(kappa, s, alpha, expected):
    assert q_kappa(PolyModel(kappa, 0.3), s, alpha) == pytest.approx(expected, abs=1e-12)


def test_q_kappa_domain():
    model = PolyModel(2.0, 0.3)
    with pytest.raises(DomainError):
        q_kappa(model, 1.0, 0.3)
    with pytest.raises(DomainError):
        q_kappa(model, 0.0, 0.5)


def test_fixed_point_frozen_values():
    fp = fixed_point(PolyModel(2.0, 0.3), 1.0)
    assert fp.s_star == pytest.approx(S_STAR_K2, rel=1e-8)
    assert fp.m0 == pytest.approx(M0_K2, rel=1e-8)
    assert fp.m0_prime == pytest.approx(M0P_K2, rel=1e-8)


@pytest.mark.parametrize("kappa", [0.5, 1.0, 2.0, 3.0])
@pytest.mark.parametrize("beta, alpha", [(0.1, 0.4), (0.3, 1.0), (0.5, 0.7)])
def test_fixed_point_matches_companion_oracle(kappa, beta, alpha):
    fp = fixed_point(PolyModel(kappa, beta), alpha)
    assert fp.m0 == pytest.approx(oracles.companion_m(kappa, beta, alpha), rel=1e-9)
    assert abs(oracles.companion_residual(kappa, beta, alpha, fp.m0)) * fp.m0 <= 1e-8
    assert fp.s_star < q_kappa_stationary_point(PolyModel(kappa, beta), alpha)


@settings(max_examples=40, deadline=None)
@given(
    st.sampled_from([0.5, 1.0, 2.0, 3.0]),
    st.floats(0.05, 0.6),
    st.floats(0.02, 1.0),
)
def test_fixed_point_invariants(kappa, beta, frac):
    alpha = beta + 0.01 + frac * (1 - beta - 0.01)
    model = PolyModel(kappa, beta)
    fp = fixed_point(model, alpha)
    assert abs(q_kappa(model, fp.s_star, alpha)) <= 1e-9
    assert fp.m0 == pytest.approx((alpha * fp.s_star) ** kappa, rel=1e-10)
    assert fp.m0 > 0 and fp.m0_prime > 0


@pytest.mark.parametrize(
    "kappa, beta, alpha",
    [(2.0, 0.3, 1.0), (1.0, 0.3, 0.6), (3.0, 0.1, 0.5), (0.5, 0.5, 1.0), (1.0, 0.1, 0.2)],
)
def test_derivative_matches_finite_difference(kappa, beta, alpha):
    model = PolyModel(kappa, beta)
    fp = fixed_point(model, alpha)
    eps = 1e-6
    fd = (fp.m0 - stieltjes_at(model, alpha, -eps)) / eps
    assert fd == pytest.approx(fp.m0_prime, rel=1e-4)


def test_stieltjes_at_matches_oracle_off_zero():
    model = PolyModel(2.0, 0.3)
    m = stieltjes_at(model, 0.8, -0.05)
    assert m == pytest.approx(oracles.companion_m(2.0, 0.3, 0.8, z=-0.05), rel=1e-9)
    with pytest.raises(DomainError):
        stieltjes_at(model, 0.8, 0.1)


def test_risk_at_one_frozen():
    assert risk_over(PolyModel(2.0, 0.3), 1.0) == pytest.approx(0.00609772226, rel=1e-8)
    assert risk_over(PolyModel(1.0, 0.3), 1.0) == pytest.approx(2.06456825, rel=1e-8)
    assert risk_over(PolyModel(2.0, 0.3, sigma=1.0), 1.0) == pytest.approx(2.37662438, rel=1e-8)


@pytest.mark.parametrize("kappa", [0.5, 1.0, 2.0])
def test_risk_diverges_at_threshold(kappa):
    model = PolyModel(kappa, 0.3)
    below = [risk(model, 0.3 - d) for d in (1e-2, 1e-3, 1e-4)]
    above = [risk(model, 0.3 + d) for d in (1e-2, 1e-3, 1e-4)]
    assert below[0] < below[1] < below[2]
    assert above[0] < above[1] < above[2]
    assert below[2] > 100 * risk(model, alpha_star(model))
    ratios = [risk_under(model, 0.3 - e) / risk_over(model, 1.0) for e in (0.04, 0.02, 0.01)]
    assert ratios[0] < ratios[1] < ratios[2]
    with pytest.raises(DomainError):
        risk(model, 0.3)


@pytest.mark.parametrize("kappa", [0.5, 2.0, 3.0])
def test_scale_law_in_N(kappa):
    small, big = PolyModel(kappa, 0.3, N=500), PolyModel(kappa, 0.3, N=1000)
    for alpha in (0.1, 0.6, 1.0):
        assert risk(big, alpha) / risk(small, alpha) == pytest.approx(2 ** (1 - kappa), rel=1e-10)


def test_compare_noiseless():
    cmp = compare(PolyModel(2.0, 0.3))
    assert cmp.alpha_star == pytest.approx(0.163339973, abs=1e-9)
    assert cmp.risk_at_alpha_star == pytest.approx(0.0112444002, rel=1e-8)
    assert cmp.interpolation_wins
    assert cmp.s_star > cmp.alpha_star
    assert cmp.verdict == "interpolating regime wins"


def test_compare_kappa1_interpolation_wins():
    cmp = compare(PolyModel(1.0, 0.3))
    assert cmp.risk_at_alpha_star == pytest.approx(3.43921648, rel=1e-8)
    assert cmp.interpolation_wins


def test_compare_noise_dominated():
    cmp = compare(PolyModel(2.0, 0.3, sigma=1.0))
    assert cmp.alpha_star == 0.0
    assert cmp.risk_at_alpha_star == pytest.approx(1.0)
    assert not cmp.interpolation_wins
    assert cmp.verdict.startswith("noise dominated")


def test_classify():
    assert classify(0.1, 0.3) is Regime.UNDER
    assert classify(0.295, 0.3) is Regime.EXCLUDED
    assert classify(0.5, 0.3) is Regime.OVER


def test_risk_curve():
    model = PolyModel(2.0, 0.3)
    pts = risk_curve(model, [1.0, 0.0, 0.1, 0.3, 0.5])
    assert [p.alpha for p in pts] == [0.0, 0.1, 0.3, 0.5, 1.0]
    assert [p.regime for p in pts] == [Regime.UNDER, Regime.UNDER, Regime.EXCLUDED, Regime.OVER, Regime.OVER]
    assert math.isnan(pts[2].risk)
    assert pts[4].risk == pytest.approx(0.00609772226, rel=1e-8)
    assert math.isnan(risk_curve(PolyModel(1.0, 0.3), [0.0])[0].risk)
    with pytest.raises(DomainError):
        risk_curve(model, [1.5])
    near = risk_curve(PolyModel(1.0, 0.3), np.linspace(0.2, 0.289, 10))
    assert all(a.risk < b.risk for a, b in zip(near, near[1:]))
    assert risk_curve(model, [0.3])[0].regime is Regime.EXCLUDED


def test_over_regime_decreasing_after_threshold():
    model = PolyModel(2.0, 0.3)
    values = [risk_over(model, a) for a in np.linspace(0.32, 1.0, 15)]
    assert all(x > y for x, y in zip(values, values[1:]))
