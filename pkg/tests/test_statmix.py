import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from localdirac import DegenerateError, DensityError, MomentSequence, NumericalFailure, gaussian_moments
from localdirac.statmix import (
    REFERENCE_MIXTURE,
    LocalGaussianMixture,
    analytic_moments,
    check_nonnegative,
    convolved_moments,
    density,
    empirical_moments,
    estimate,
    likelihood_score,
    sample,
    sample_config,
)

TRUTH = np.array([-1.0, 2.0, 0.6])


def _key(est):
    o = np.argsort(np.real(est.xis))
    return np.array([est.xis[o[0]].real, est.xis[o[1]].real, est.weights[o[0]].real])


# -- density ----------------------------------------------------------------------------


def test_plain_gaussian_mixture_density():
    lg = LocalGaussianMixture([-1.0, 1.5], ([0.0], [0.0, 0.0]), [0.3, 0.7], sd=0.8)
    x = np.linspace(-5, 5, 11)
    phi = lambda u: np.exp(-0.5 * (u / 0.8) ** 2) / (0.8 * math.sqrt(2 * math.pi))  # noqa: E731
    np.testing.assert_allclose(density(lg, x), 0.3 * phi(x + 1) + 0.7 * phi(x - 1.5), rtol=1e-14)


def test_derivative_terms_match_finite_differences():
    lg = LocalGaussianMixture([0.4], ([0.3, -0.2],), [1.0])
    x = np.linspace(-4, 4, 81)
    h = 1e-4
    phi = lambda u: np.exp(-0.5 * u * u) / math.sqrt(2 * math.pi)  # noqa: E731
    d1 = (phi(x - 0.4 + h) - phi(x - 0.4 - h)) / (2 * h)
    d2 = (phi(x - 0.4 + h) - 2 * phi(x - 0.4) + phi(x - 0.4 - h)) / h**2
    np.testing.assert_allclose(density(lg, x), phi(x - 0.4) + 0.3 * d1 - 0.2 * d2, atol=1e-7)


def test_reference_density_nonnegative():
    x = np.linspace(-15, 15, 60001)
    assert density(REFERENCE_MIXTURE, x).min() >= 0
    assert check_nonnegative(REFERENCE_MIXTURE) >= 0


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.3, 3))
def test_density_integrates_to_one(a1, a2, sd):
    lg = LocalGaussianMixture([0.5], ([a1, a2],), [1.0], sd=sd)
    x = np.linspace(-20 * sd, 20 * sd, 40001)
    assert np.trapezoid(density(lg, x), x) == pytest.approx(1.0, abs=1e-9)


def test_mixture_validation():
    with pytest.raises(ValueError):
        LocalGaussianMixture([0.0, 1.0], ([0.1], [0.2]), [0.5, 0.6])
    with pytest.raises(ValueError):
        LocalGaussianMixture([0.0], ([0.1],), [1.0], sd=0)
    with pytest.raises(ValueError):
        LocalGaussianMixture([0.0, 1.0], ([0.1],), [0.5, 0.5])


# -- moments ------------------------------------------------------------------------------


@given(st.integers(0, 10), st.floats(-2, 2), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(0.5, 2))
def test_convolution_identity(d, xi, a1, a2, sd):
    lg = LocalGaussianMixture([xi, 1.0], ([a1, a2], [0.2]), [0.4, 0.6], sd=sd)
    a = analytic_moments(lg, d).values
    b = convolved_moments(lg, d).values
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12 * np.abs(a).max())


def test_analytic_moments_against_quadrature():
    x = np.linspace(-15, 15, 300001)
    dens = density(REFERENCE_MIXTURE, x)
    m = analytic_moments(REFERENCE_MIXTURE, 6).values
    for n in range(7):
        assert m[n] == pytest.approx(np.trapezoid(x**n * dens, x), rel=1e-8, abs=1e-8)


def test_constant_sample():
    np.testing.assert_allclose(empirical_moments(np.full(10, 1.5), 4).values, 1.5 ** np.arange(5))


def test_normal_sample_second_moment():
    xs = np.random.default_rng(0).normal(size=100_000)
    m = empirical_moments(xs, 2)
    assert m.values[0] == 1
    assert m.values[2] == pytest.approx(1.0, abs=0.03)


def test_empirical_moment_errors():
    with pytest.raises(ValueError):
        empirical_moments([], 3)
    with pytest.raises(ValueError):
        empirical_moments([1.0], -1)


# -- sampling ------------------------------------------------------------------------------


def test_plain_mixture_sample_mean():
    lg = LocalGaussianMixture([-1.0, 2.0], ([0.0], [0.0]), [0.3, 0.7])
    n = 20_000
    xs = sample(lg, n, seed=1)
    mean = 0.3 * -1 + 0.7 * 2
    sd = math.sqrt(1 + 0.3 * 0.7 * 9)
    assert abs(xs.mean() - mean) <= 4 * sd / math.sqrt(n)


def test_reference_sample_first_moment():
    xs = sample(REFERENCE_MIXTURE, 20_000, seed=0)
    assert xs.size == 20_000
    assert xs.mean() == pytest.approx(analytic_moments(REFERENCE_MIXTURE, 1).values[1], abs=0.05)


def test_sample_seed_determinism():
    a = sample(REFERENCE_MIXTURE, 500, seed=4)
    assert np.array_equal(a, sample(REFERENCE_MIXTURE, 500, seed=4))
    assert not np.array_equal(a, sample(REFERENCE_MIXTURE, 500, seed=5))


def test_negative_density_rejected():
    lg = LocalGaussianMixture([0.0], ([2.0],), [1.0])
    assert check_nonnegative(lg) < 0
    with pytest.raises(DensityError) as err:
        sample(lg, 10)
    assert err.value.diagnostics["component"] == 0


def test_sample_argument_checks():
    with pytest.raises(ValueError):
        sample(REFERENCE_MIXTURE, -1)
    with pytest.raises(ValueError):
        sample(REFERENCE_MIXTURE, 10, inflate=1.0)


# -- estimation ----------------------------------------------------------------------------


def test_analytic_estimate_exact():
    est = estimate(analytic_moments(REFERENCE_MIXTURE, 8), 2, 2)
    assert est.mixture is not None
    o = np.argsort(est.xis)
    np.testing.assert_allclose(est.xis[o], [-1, 2], atol=1e-8)
    np.testing.assert_allclose(est.weights[o], [0.6, 0.4], atol=1e-8)
    np.testing.assert_allclose(est.alphas[o[0]], [0.1, 0.4], atol=1e-8)
    np.testing.assert_allclose(est.alphas[o[1]], [-0.2, 0.6], atol=1e-8)


@given(st.floats(-2, 2), st.floats(0.5, 2))
def test_single_gaussian_reduces_to_mean(mu, sd):
    lg = LocalGaussianMixture([mu], ([],), [1.0], sd=sd)
    est = estimate(analytic_moments(lg, 2), 1, 0, sd=sd)
    assert est.xis[0] == pytest.approx(mu, abs=1e-10)


def test_explicit_base_moments():
    lg = LocalGaussianMixture([-0.5, 1.0], ([0.2], [-0.1]), [0.5, 0.5], sd=0.7)
    est = estimate(analytic_moments(lg, 6), 2, 1, base_moments=gaussian_moments(0.7, 6))
    np.testing.assert_allclose(np.sort(est.xis), [-0.5, 1.0], atol=1e-8)


def test_base_moments_must_be_normalized():
    with pytest.raises(ValueError):
        estimate(analytic_moments(REFERENCE_MIXTURE, 8), 2, 2, base_moments=MomentSequence(np.full(9, 2.0)))


def test_vanishing_weight_is_degenerate():
    # a pure derivative component: λ_{j,0} = 0 makes α undefined
    from localdirac import local_dirac_moments, mgf_convolve, mixture_of

    mix = mixture_of([-1.0, 1.0], [[1.0, 0.2], [0.0, 0.3]])
    m = mgf_convolve(gaussian_moments(1.0, 6), local_dirac_moments(mix, 6))
    with pytest.raises(DegenerateError):
        estimate(m, 2, 1)


def test_likelihood_score_prefers_truth():
    xs = sample(REFERENCE_MIXTURE, 5000, seed=2)
    score = likelihood_score(xs)
    mix = REFERENCE_MIXTURE.dirac_mixture()
    good = score(mix.xis, [c.lambdas for c in mix.components])
    shifted = score(mix.xis + 0.5, [c.lambdas for c in mix.components])
    assert good < shifted
    assert score(np.array([1j, 2.0]), [np.array([0.5]), np.array([0.5])]) == math.inf


def test_sample_estimate_close_to_truth():
    xs = sample(REFERENCE_MIXTURE, 20_000, seed=0)
    est = estimate(empirical_moments(xs, 8), 2, 2, cfg=sample_config(seed=0), sample_xs=xs)
    assert np.all(np.abs(_key(est) - TRUTH) <= 0.15)


def test_error_shrinks_with_sample_size():
    medians = []
    for n in (1_000, 10_000, 100_000):
        errs = []
        for seed in range(20):
            xs = sample(REFERENCE_MIXTURE, n, seed=seed)
            try:
                est = estimate(empirical_moments(xs, 8), 2, 2, cfg=sample_config(seed=seed), sample_xs=xs)
                errs.append(float(np.max(np.abs(_key(est) - TRUTH))))
            except NumericalFailure:
                errs.append(math.inf)
        medians.append(np.median(errs))
    assert medians[0] > medians[1] > medians[2]
