"""Tests for the CEV <-> squared-Bessel dictionary and its hitting laws.

Reference values marked "frozen" were computed with 30-digit multiprecision
arithmetic from the defining formulas and pasted here as literals.
"""

import math

import numpy as np
import pytest
from scipy import integrate, stats

from bessel_credit import bessel_cev as bc
from bessel_credit.specfun import gamma_tail


# ---------------------------------------------------------------------------
# dictionary mapping


def test_square_root_model_maps_to_dimension_zero():
    # elasticity 1/2: dimension 0, power 1, start equal to the spot itself
    m = bc.cev_to_bessel(bc.CevParams(spot=1.7, rate=0.03, sigma=0.4, elasticity=0.5))
    assert m.bessel.dimension == pytest.approx(0.0, abs=1e-15)
    assert m.power == pytest.approx(1.0, abs=1e-15)
    assert m.bessel.start == pytest.approx(1.7, rel=1e-15)


def test_clock_driftless_limit():
    # rate == 0, elasticity 1/2, sigma 0.2: clock(1) = (1-a)^2 sigma^2 = 0.01
    m = bc.cev_to_bessel(bc.CevParams(spot=1.0, rate=0.0, sigma=0.2, elasticity=0.5))
    assert m.clock(1.0) == pytest.approx(0.01, rel=1e-15)
    assert m.clock_rate(2.3) == pytest.approx(0.01, rel=1e-15)


def test_clock_frozen_value():
    # frozen from a 30-digit evaluation of the exponential-ramp clock
    m = bc.cev_to_bessel(bc.CevParams(spot=1.0, rate=0.03, sigma=0.3, elasticity=0.8))
    assert m.clock(2.0) == pytest.approx(0.0071142870726272059, rel=1e-15)


def test_clock_continuous_in_rate_at_zero():
    # the expm1 branch must join the exact rate==0 branch to full precision
    for alpha in (0.3, 0.5, 0.8, 1.5):
        lo = bc.cev_to_bessel(bc.CevParams(1.0, 0.0, 0.4, alpha))
        hi = bc.cev_to_bessel(bc.CevParams(1.0, 1e-12, 0.4, alpha))
        for t in (0.5, 2.0, 10.0):
            assert hi.clock(t) == pytest.approx(lo.clock(t), rel=1e-10)
            assert hi.clock_rate(t) == pytest.approx(lo.clock_rate(t), rel=1e-10)


def test_clock_positive_all_regimes():
    for alpha in (-0.5, 0.2, 0.5, 0.9, 1.3, 2.0):
        for rate in (-0.05, 0.0, 0.05):
            m = bc.cev_to_bessel(bc.CevParams(1.2, rate, 0.35, alpha))
            for t in (0.1, 1.0, 25.0):
                assert m.clock(t) > 0.0
                assert m.clock_rate(t) > 0.0


def test_clock_derivative_consistent():
    m = bc.cev_to_bessel(bc.CevParams(1.0, 0.07, 0.5, 0.6))
    h = 1e-6
    for t in (0.5, 3.0):
        fd = (m.clock(t + h) - m.clock(t - h)) / (2.0 * h)
        assert m.clock_rate(t) == pytest.approx(fd, rel=1e-8)


def test_lognormal_boundary_rejected():
    with pytest.raises(ValueError):
        bc.cev_to_bessel(bc.CevParams(1.0, 0.05, 0.2, 1.0))


def test_param_validation():
    with pytest.raises(ValueError):
        bc.CevParams(-1.0, 0.05, 0.2, 0.5)
    with pytest.raises(ValueError):
        bc.CevParams(1.0, 0.05, -0.2, 0.5)
    with pytest.raises(ValueError):
        bc.SquaredBesselSpec(dimension=1.0, start=-0.1)


def test_boundary_classification():
    mk = lambda a: bc.CevParams(1.0, 0.05, 0.3, a)
    assert bc.boundary_classification(mk(0.3)) is bc.BoundaryClass.REACHED_REFLECTING
    assert bc.boundary_classification(mk(0.5)) is bc.BoundaryClass.REACHED_REFLECTING
    assert bc.boundary_classification(mk(0.7)) is bc.BoundaryClass.REACHED_ABSORBING
    assert bc.boundary_classification(mk(1.0)) is bc.BoundaryClass.UNREACHABLE
    assert bc.boundary_classification(mk(1.8)) is bc.BoundaryClass.UNREACHABLE


# ---------------------------------------------------------------------------
# default probability


REF = bc.CevParams(spot=1.0, rate=0.05, sigma=0.5, elasticity=0.5)


def test_default_probability_frozen():
    # frozen 30-digit evaluations of the regularized upper gamma closed form
    assert bc.default_probability(REF, 1.0) == pytest.approx(
        0.00027419621431391437, rel=1e-13)
    assert bc.default_probability(REF, 5.0) == pytest.approx(
        0.16392854199153211, rel=1e-13)


def test_default_probability_square_root_is_exponential():
    # elasticity 1/2 collapses to exp(-zeta_T)
    m = bc.cev_to_bessel(REF)
    for T in (0.5, 1.0, 5.0):
        assert bc.default_probability(REF, T) == pytest.approx(
            math.exp(-m.zeta(T)), rel=1e-13)


def test_default_probability_long_horizon_limit():
    p = bc.CevParams(spot=1.3, rate=0.04, sigma=0.45, elasticity=0.7)
    lim = bc.default_probability_limit(p)
    assert lim == pytest.approx(0.7287884761796226, rel=1e-13)  # frozen
    assert bc.default_probability(p, 4000.0) == pytest.approx(lim, rel=1e-10)
    # zero/negative drift defaults almost surely
    assert bc.default_probability_limit(
        bc.CevParams(1.0, 0.0, 0.5, 0.5)) == 1.0


def test_default_probability_monotonicity():
    base = dict(spot=1.0, rate=0.03, sigma=0.4, elasticity=0.6)
    probe = lambda **kw: bc.default_probability(
        bc.CevParams(**{**base, **kw}), 3.0)
    spots = [probe(spot=s) for s in (0.5, 0.8, 1.0, 1.5, 2.5)]
    assert all(a >= b for a, b in zip(spots, spots[1:]))
    alphas = [probe(elasticity=a) for a in (0.1, 0.3, 0.5, 0.7, 0.9)]
    assert all(a >= b for a, b in zip(alphas, alphas[1:]))
    vols = [probe(sigma=v) for v in (0.2, 0.3, 0.5, 0.8)]
    assert all(a <= b for a, b in zip(vols, vols[1:]))
    horizons = [bc.default_probability(bc.CevParams(**base), t)
                for t in (0.5, 1.0, 2.0, 5.0, 20.0)]
    assert all(a <= b for a, b in zip(horizons, horizons[1:]))


def test_default_probability_domain():
    with pytest.raises(ValueError):
        bc.default_probability(bc.CevParams(1.0, 0.05, 0.3, 1.2), 1.0)
    with pytest.raises(ValueError):
        bc.default_probability(REF, 0.0)


# ---------------------------------------------------------------------------
# default-time density


def test_density_integrates_to_probability():
    for p, T in ((REF, 1.0), (REF, 5.0),
                 (bc.CevParams(1.2, 0.02, 0.6, 0.75), 3.0)):
        val, err = integrate.quad(
            lambda s: bc.default_time_density(p, s), 0.0, T,
            epsabs=1e-12, epsrel=1e-12, limit=200)
        assert err < 1e-9
        assert val == pytest.approx(bc.default_probability(p, T), abs=1e-8)


def test_density_frozen_value():
    assert bc.default_time_density(REF, 1.0) == pytest.approx(
        0.0021931127779393365, rel=1e-13)


def test_density_square_root_closed_form():
    # independent hand-derived expression for elasticity 1/2:
    # f(t) = exp(-zeta_t) * 2 r^2 S0 e^{-rt} / (sigma^2 (1-e^{-rt})^2)
    S0, r, sig = REF.spot, REF.rate, REF.sigma
    for t in (0.25, 1.0, 4.0, 12.0):
        zeta = 2.0 * r * S0 / (sig * sig * -math.expm1(-r * t))
        hand = (math.exp(-zeta) * 2.0 * r * r * S0 * math.exp(-r * t)
                / (sig * sig * math.expm1(-r * t) ** 2))
        assert bc.default_time_density(REF, t) == pytest.approx(hand, abs=1e-10)


# ---------------------------------------------------------------------------
# hitting-time sampler


def test_hitting_sampler_dimension_zero_survival():
    # dimension 0 from start 1: P(T0 > t) = 1 - exp(-1/(2t)); check at t=1
    spec = bc.SquaredBesselSpec(dimension=0.0, start=1.0)
    rng = np.random.default_rng(20240811)
    n = 200_000
    draws = bc.hitting_time_sampler(spec, rng, size=n)
    p_hat = np.mean(draws > 1.0)
    p = 1.0 - math.exp(-0.5)
    se = math.sqrt(p * (1.0 - p) / n)
    assert abs(p_hat - p) < 3.0 * se


def test_hitting_sampler_scaling_in_start():
    # T0 scales linearly in the starting point: quantiles double when x doubles
    rng1 = np.random.default_rng(7)
    rng2 = np.random.default_rng(7)
    a = bc.hitting_time_sampler(bc.SquaredBesselSpec(0.5, 1.0), rng1, size=50_000)
    b = bc.hitting_time_sampler(bc.SquaredBesselSpec(0.5, 2.0), rng2, size=50_000)
    qa = np.quantile(a, [0.1, 0.25, 0.5, 0.75, 0.9])
    qb = np.quantile(b, [0.1, 0.25, 0.5, 0.75, 0.9])
    np.testing.assert_allclose(qb, 2.0 * qa, rtol=1e-12)


def test_hitting_sampler_dimension_one_ks():
    # dimension 1: P(T0 <= t) = gamma_tail(1/2, x/(2t)); KS at the 1% level
    x = 1.6
    rng = np.random.default_rng(99)
    draws = bc.hitting_time_sampler(bc.SquaredBesselSpec(1.0, x), rng, size=100_000)
    res = stats.kstest(draws, lambda t: np.vectorize(
        lambda s: gamma_tail(0.5, x / (2.0 * s)))(t))
    assert res.pvalue > 0.01


def test_hitting_sampler_domain():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        bc.hitting_time_sampler(bc.SquaredBesselSpec(2.0, 1.0), rng)
    with pytest.raises(ValueError):
        bc.hitting_time_sampler(bc.SquaredBesselSpec(2.5, 1.0), rng)
    with pytest.raises(ValueError):
        bc.hitting_time_sampler(bc.SquaredBesselSpec(1.0, 0.0), rng)


# ---------------------------------------------------------------------------
# martingale defect (elasticity > 1)


def test_martingality_default_frozen():
    p = bc.CevParams(spot=1.0, rate=0.05, sigma=0.4, elasticity=1.5)
    assert bc.martingality_default(p, 2.0) == pytest.approx(
        0.0026249131597535841, rel=1e-13)


def test_martingality_default_shape():
    p = bc.CevParams(spot=1.4, rate=0.03, sigma=0.6, elasticity=1.8)
    ts = [1e-6, 0.1, 0.5, 1.0, 2.0, 5.0, 40.0]
    vals = [bc.martingality_default(p, t) for t in ts]
    assert vals[0] < 1e-12  # vanishes at short horizons
    assert all(0.0 <= v <= p.spot for v in vals)
    assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_martingality_default_dual_dimension_identity():
    # defect == spot * P(dual-dimension squared Bessel hits 0 by clock(t)),
    # the dual dimension being 4 - dimension
    p = bc.CevParams(spot=1.0, rate=0.05, sigma=0.4, elasticity=1.5)
    m = bc.cev_to_bessel(p)
    dual = bc.SquaredBesselSpec(dimension=4.0 - m.bessel.dimension,
                                start=m.bessel.start)
    for t in (0.5, 2.0, 10.0):
        hit = bc.absorbed_mass(dual, m.clock(t))
        assert bc.martingality_default(p, t) == pytest.approx(
            p.spot * hit, abs=1e-10)


def test_martingality_default_dual_sampler():
    # same identity, now against the dual-dimension hitting-time sampler
    p = bc.CevParams(spot=1.0, rate=0.05, sigma=0.4, elasticity=1.5)
    m = bc.cev_to_bessel(p)
    dual = bc.SquaredBesselSpec(4.0 - m.bessel.dimension, m.bessel.start)
    rng = np.random.default_rng(555)
    n = 400_000
    draws = bc.hitting_time_sampler(dual, rng, size=n)
    t = 2.0
    p_hat = np.mean(draws <= m.clock(t))
    se = math.sqrt(max(p_hat * (1 - p_hat), 1e-12) / n)
    assert abs(p.spot * p_hat - bc.martingality_default(p, t)) < 3.0 * se + 1e-6


def test_martingality_default_domain():
    with pytest.raises(ValueError):
        bc.martingality_default(bc.CevParams(1.0, 0.05, 0.3, 0.8), 1.0)
    with pytest.raises(ValueError):
        bc.martingality_default(bc.CevParams(1.0, 0.05, 0.3, 1.0), 1.0)


# ---------------------------------------------------------------------------
# absorbed marginal: continuous part + atom


@pytest.mark.parametrize("dim,start,t", [
    (0.5, 1.0, 0.7),
    (0.0, 2.0, 1.5),
    (-1.0, 1.3, 0.9),
    (1.5, 0.8, 2.0),
])
def test_absorbed_marginal_total_mass(dim, start, t):
    spec = bc.SquaredBesselSpec(dimension=dim, start=start)
    cont, err = integrate.quad(
        lambda y: bc.stopped_marginal_density(spec, t, y), 0.0, np.inf,
        epsabs=1e-13, epsrel=1e-13, limit=400)
    assert err < 1e-11
    assert cont + bc.absorbed_mass(spec, t) == pytest.approx(1.0, abs=1e-10)


def test_unrestricted_marginal_dimension_ge2():
    # dimension >= 2: no atom, the density alone carries all the mass and
    # matches the noncentral chi-square scaling  Y_t ~ t * ncx2(dim, start/t)
    spec = bc.SquaredBesselSpec(dimension=3.0, start=1.2)
    t = 0.8
    cont, _ = integrate.quad(lambda y: bc.stopped_marginal_density(spec, t, y),
                             0.0, np.inf, epsabs=1e-13, limit=400)
    assert cont == pytest.approx(1.0, abs=1e-10)
    y = 2.0
    ref = stats.ncx2.pdf(y / t, 3.0, 1.2 / t) / t
    assert bc.stopped_marginal_density(spec, t, y) == pytest.approx(ref, rel=1e-11)


def test_absorbed_marginal_atom_matches_hitting_law():
    spec = bc.SquaredBesselSpec(dimension=0.5, start=1.0)
    # the atom is exactly the hitting-time distribution function
    for t in (0.3, 1.0, 4.0):
        assert bc.absorbed_mass(spec, t) == pytest.approx(
            gamma_tail(0.75, 0.5 / t), rel=1e-14)


def test_zeta_canonical_matches_printed_arrangement():
    # zeta(t) = r*S0^{2(1-a)} / ((1-a) sigma^2 (1 - e^{2(a-1) r t}))
    p = bc.CevParams(spot=1.1, rate=0.04, sigma=0.35, elasticity=0.65)
    m = bc.cev_to_bessel(p)
    a, r, s = p.elasticity, p.rate, p.sigma
    for t in (0.5, 2.0, 9.0):
        printed = (r * p.spot ** (2 * (1 - a))
                   / ((1 - a) * s * s * -math.expm1(2 * (a - 1) * r * t)))
        assert m.zeta(t) == pytest.approx(printed, rel=1e-13)
