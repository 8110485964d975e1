from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from localdirac import (
    CumulantSequence,
    MomentSequence,
    ParetoParams,
    cumulants_to_moments,
    gaussian_moments,
    local_dirac_moments,
    mgf_convolve,
    mgf_deconvolve,
    mixture_of,
    moments_to_cumulants,
    pareto_moments,
    pareto_reparametrize,
)
from localdirac.moments import falling_factorial

finite = st.floats(-2, 2, allow_nan=False)


# -- local Dirac moments ------------------------------------------------------


def test_single_first_order_component():
    m = local_dirac_moments(mixture_of([2.0], [[1.0, 1.0]]), 4)
    assert m.values.tolist() == [1, 3, 8, 20, 48]


def test_pure_dirac_powers():
    m = local_dirac_moments(mixture_of([5.0], [[1.0, 0.0]]), 2)
    assert m.values.tolist() == [1, 5, 25]


def test_bernoulli_half():
    m = local_dirac_moments(mixture_of([0.0, 1.0], [[0.5, 0], [0.5, 0]]), 3)
    assert m.values.tolist() == [1, 0.5, 0.5, 0.5]


@given(xi=finite, lam=st.lists(finite, min_size=1, max_size=4), d=st.integers(0, 8))
def test_moments_match_symbolic_derivatives(xi, lam, d):
    # <Λ(∂)δ_ξ, X^i> = Σ_k λ_k (d/dx)^k x^i at ξ; compare against numpy polynomial derivatives
    m = local_dirac_moments(mixture_of([xi], [lam]), d).values
    for i in range(d + 1):
        mono = np.polynomial.Polynomial.basis(i)
        want = sum(c * mono.deriv(k)(xi) if k <= i else 0.0 for k, c in enumerate(lam))
        assert m[i] == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_degree_validation():
    with pytest.raises(ValueError):
        local_dirac_moments(mixture_of([1.0], [[1.0]]), -1)
    with pytest.raises(ValueError):
        MomentSequence([])
    with pytest.raises(ValueError):
        MomentSequence([2.0, 1.0], normalized=True)


def test_falling_factorial():
    assert falling_factorial(5, 2) == 20
    assert falling_factorial(3, 0) == 1
    assert falling_factorial(2, 3) == 0


# -- cumulants -----------------------------------------------------------------


def test_centred_variance():
    k = moments_to_cumulants(MomentSequence([1.0, 0.0, 2.5]))
    assert k.values.tolist() == [0.0, 2.5]


def test_cumulants_of_first_order_example():
    k = moments_to_cumulants(MomentSequence([1.0, 3.0, 8.0, 20.0]))
    assert k.values.tolist() == [3.0, -1.0, 2.0]
    m = cumulants_to_moments(CumulantSequence([3.0, -1.0, 2.0]))
    assert m.values.tolist() == [1.0, 3.0, 8.0, 20.0]


def test_zero_cumulants_give_point_mass_at_zero():
    m = cumulants_to_moments(CumulantSequence(np.zeros(6)))
    assert m.values.tolist() == [1, 0, 0, 0, 0, 0, 0]


def test_unnormalized_input_rejected():
    with pytest.raises(ValueError):
        moments_to_cumulants(MomentSequence([2.0, 1.0, 1.0]))


def _printed_cumulants(m):
    m1, m2, m3, m4, m5 = m
    return [
        m1,
        m2 - m1**2,
        m3 - 3 * m1 * m2 + 2 * m1**3,
        m4 - 4 * m1 * m3 - 3 * m2**2 + 12 * m1**2 * m2 - 6 * m1**4,
        m5 - 5 * m1 * m4 - 10 * m2 * m3 + 20 * m1**2 * m3 + 30 * m1 * m2**2 - 60 * m1**3 * m2 + 24 * m1**5,
    ]


@given(st.lists(st.integers(-9, 9), min_size=5, max_size=5))
def test_degree_five_formulas_on_integer_probes(ms):
    # small integers keep every float operation exact
    got = moments_to_cumulants(MomentSequence([1.0, *map(float, ms)])).values
    want = _printed_cumulants([Fraction(v) for v in ms])
    assert [Fraction(float(g)) for g in got] == want


def test_degree_five_formulas_coefficientwise():
    # degrees in (m_1..m_5) are at most (5, 2, 1, 1, 1); agreement on a tensor grid
    # with one more point per variable forces every coefficient to agree
    import itertools

    grid = [range(-3, 3), range(-1, 2), range(2), range(2), range(2)]
    for pt in itertools.product(*grid):
        got = moments_to_cumulants(MomentSequence([1.0, *map(float, pt)])).values
        assert [Fraction(float(v)) for v in got] == _printed_cumulants([Fraction(v) for v in pt])


@given(st.lists(finite, min_size=1, max_size=12))
def test_cumulant_round_trip(ms):
    # relative to the working scale: cumulants can dwarf the moments they come from
    m = MomentSequence([1.0, *ms])
    k = moments_to_cumulants(m)
    back = cumulants_to_moments(k).values
    scale = max(np.abs(m.values).max(), np.abs(k.values).max())
    np.testing.assert_allclose(back, m.values, rtol=0, atol=1e-12 * scale)


@given(q=finite, xi=st.lists(finite, min_size=2, max_size=2), a=finite)
def test_translation_moves_only_first_cumulant(q, xi, a):
    lam = [[0.4, a], [0.6, -a]]
    k0 = moments_to_cumulants(local_dirac_moments(mixture_of(xi, lam), 8)).values
    k1 = moments_to_cumulants(local_dirac_moments(mixture_of(np.add(xi, q), lam), 8)).values
    scale = max(1.0, np.abs(k0).max())
    assert k1[0] == pytest.approx(k0[0] + q, abs=1e-10 * scale)
    np.testing.assert_allclose(k1[1:], k0[1:], atol=1e-9 * scale)


# -- convolution ---------------------------------------------------------------


def test_convolve_with_point_mass_is_identity():
    a = MomentSequence([1.0, 2.0, -3.0, 4.0])
    delta = MomentSequence([1.0, 0, 0, 0])
    assert mgf_convolve(a, delta).values.tolist() == a.values.tolist()
    assert mgf_deconvolve(a, delta).values.tolist() == a.values.tolist()


def test_gaussian_sum_variance_adds():
    g = gaussian_moments(1.0, 4)
    assert g.values.tolist() == [1, 0, 1, 0, 3]
    assert mgf_convolve(g, g).values.tolist() == [1, 0, 2, 0, 12]


@given(st.lists(st.tuples(finite, finite, finite), min_size=7, max_size=7))
def test_convolution_commutative_associative(rows):
    a, b, c = (MomentSequence([1.0, *col[1:]]) for col in zip(*rows))
    ab = mgf_convolve(a, b).values
    np.testing.assert_allclose(ab, mgf_convolve(b, a).values, rtol=1e-12, atol=1e-12)
    left = mgf_convolve(mgf_convolve(a, b), c).values
    right = mgf_convolve(a, mgf_convolve(b, c)).values
    np.testing.assert_allclose(left, right, rtol=1e-12, atol=1e-11 * np.abs(left).max())


@given(st.lists(st.tuples(finite, finite), min_size=6, max_size=6))
def test_deconvolution_inverts_convolution(rows):
    a = MomentSequence([1.0, *[r[0] for r in rows[1:]]])
    b = MomentSequence([r[1] for r in rows])
    back = mgf_deconvolve(mgf_convolve(a, b), a).values
    scale = max(1.0, np.abs(mgf_convolve(a, b).values).max())
    np.testing.assert_allclose(back, b.values, atol=1e-12 * scale)


def test_deconvolution_needs_nonzero_leading_moment():
    with pytest.raises(ValueError):
        mgf_deconvolve(MomentSequence([1.0, 1.0]), MomentSequence([0.0, 1.0]))


def test_convolution_degree_mismatch():
    with pytest.raises(ValueError):
        mgf_convolve(MomentSequence([1.0, 0.0]), MomentSequence([1.0]))


def test_gaussian_convolved_with_local_dirac_matches_quadrature():
    # with <δ'_ξ, f> = f'(ξ) the moments of φ * (ξ, (1, a)) are E(ξ+Z)^n + a n E(ξ+Z)^(n-1)
    xi, a, d = 0.7, 0.3, 6
    conv = mgf_convolve(gaussian_moments(1.0, d), local_dirac_moments(mixture_of([xi], [[1.0, a]]), d))
    x = np.linspace(-14, 14, 200001)
    phi = np.exp(-0.5 * (x - xi) ** 2) / np.sqrt(2 * np.pi)
    for n in range(d + 1):
        integrand = x**n * phi
        if n:
            integrand = integrand + a * n * x ** (n - 1) * phi
        assert conv.values[n] == pytest.approx(np.trapezoid(integrand, x), rel=1e-9, abs=1e-9)


# -- Pareto --------------------------------------------------------------------


def test_pareto_examples():
    m = pareto_moments(ParetoParams(5.0, 1.0), 2).values
    np.testing.assert_allclose(m, [1, 5 / 4, 5 / 3], rtol=1e-15)
    assert pareto_moments(ParetoParams(2.5, 3.0), 0).values.tolist() == [1.0]


def test_pareto_pole_rejected():
    with pytest.raises(ValueError):
        pareto_moments(ParetoParams(2.0, 1.0), 3)


@given(alpha=st.floats(-3, 3).filter(lambda a: abs(a) > 0.05),
       xi=st.floats(0.2, 3))
def test_pareto_reparametrization_inverts_local_dirac(alpha, xi):
    p = pareto_reparametrize(alpha, xi)
    d = 8
    try:
        pm = pareto_moments(p, d).values
    except ValueError:
        return  # reparametrized shape hit a pole
    ld = local_dirac_moments(mixture_of([xi], [[1.0, alpha]]), d).values
    ok = np.abs(ld) > 1e-6 * np.abs(ld).max()
    np.testing.assert_allclose((pm * ld)[ok], 1.0, rtol=1e-10)
