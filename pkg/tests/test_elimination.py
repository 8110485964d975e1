import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from localdirac import DegenerateError, InsufficientMomentsError, MomentSequence, local_dirac_moments, mixture_of, recover
from localdirac.elimination import (
    TwoMixCumulants,
    eval_g_s,
    g_s_poly,
    g_s_roots,
    p_from_s,
    recover_two_component,
    tuple_to_cumulants,
    two_mix_moments,
)

BERNOULLI = TwoMixCumulants(0.5, 0.25, 0.0, -0.125, 0.0)


def _random_tuple(rng):
    while True:
        xi1, xi2 = rng.uniform(-2, 2, size=2)
        if abs(xi1 - xi2) >= 0.5:
            break
    return xi1, xi2, rng.uniform(0.2, 0.8), *rng.uniform(-1, 1, size=2)


def _tuple_error(c, truth):
    xi1, xi2, lam, a1, a2 = truth
    est = np.array([c.xi1, c.xi2, c.lam, c.alpha1, c.alpha2], dtype=complex)
    swapped = np.array([c.xi2, c.xi1, 1 - c.lam, c.alpha2, c.alpha1], dtype=complex)
    t = np.array(truth)
    return min(np.max(np.abs(est - t)), np.max(np.abs(swapped - t))) / max(1.0, np.abs(t).max())


def _relative_g(k, s):
    terms = g_s_poly(k) * s ** np.arange(4, -1, -1)
    return abs(terms.sum()) / np.abs(terms).sum()


def test_forward_moments_formula():
    m = two_mix_moments(2.0, 0.0, 1.0, 1.0, 0.0, 4)
    assert m.tolist() == [1, 3, 8, 20, 48]
    # ξ = 0 with a derivative: only m_1 sees α
    assert two_mix_moments(0.0, 1.0, 0.5, 0.4, 0.0, 3).tolist() == [1, 0.5 + 0.2, 0.5, 0.5]


def test_leading_coefficient():
    k = TwoMixCumulants(0.3, 1.7, -0.4, 0.9, 2.0)
    assert g_s_poly(k)[0] == pytest.approx(4 * 1.7**3 + 0.16)


def test_bernoulli_root():
    assert eval_g_s(1.0, BERNOULLI) == pytest.approx(0.0, abs=1e-15)


def test_bernoulli_cumulants_from_moments():
    k = TwoMixCumulants.from_moments(MomentSequence([1, 0.5, 0.5, 0.5, 0.5, 0.5]))
    np.testing.assert_allclose(k.as_tuple(), BERNOULLI.as_tuple(), atol=1e-15)


def test_bernoulli_p_relation_is_degenerate():
    # a symmetric pair with α = 0 makes the linear coefficient vanish
    with pytest.raises(DegenerateError):
        p_from_s(1.0, BERNOULLI)


def test_constructed_degeneracy():
    # centred data (k_1 = 0) with k_3 = s·k_2
    with pytest.raises(DegenerateError, match="degenerate"):
        p_from_s(2.0, TwoMixCumulants(0.0, 1.0, 2.0, 0.0, 0.0))


@pytest.mark.parametrize("seed", range(25))
def test_g_s_vanishes_at_true_sum(seed):
    truth = _random_tuple(np.random.default_rng(seed))
    k = tuple_to_cumulants(*truth)
    assert _relative_g(k, truth[0] + truth[1]) <= 1e-8


@pytest.mark.parametrize("seed", range(25))
def test_p_from_true_sum(seed):
    xi1, xi2, lam, a1, a2 = _random_tuple(np.random.default_rng(100 + seed))
    k = tuple_to_cumulants(xi1, xi2, lam, a1, a2)
    assert p_from_s(xi1 + xi2, k) == pytest.approx(xi1 * xi2, rel=1e-8, abs=1e-8)


def test_g_s_transcription_against_forward_identity():
    # on the parametrised family the hardcoded quartic must vanish at s = ξ_1 + ξ_2
    # for every choice of the five parameters, including integer probes
    for xi1, xi2, lam, a1, a2 in [(0, 1, 0.6, 0.1, -0.2), (-1, 2, 0.25, 1, 1), (3, -2, 0.5, -1, 2), (1, 2, 0.1, 0, 3)]:
        k = tuple_to_cumulants(xi1, xi2, lam, a1, a2)
        assert _relative_g(k, xi1 + xi2) <= 1e-12


def test_reference_instance_ranked_first():
    truth = (0.0, 1.0, 0.6, 0.1, -0.2)
    m = MomentSequence(two_mix_moments(*truth, 6))
    cands = recover_two_component(m)
    assert _tuple_error(cands[0], truth) <= 1e-9
    assert cands[0].residual_m6 <= 1e-10


def test_plain_diracs_recovered_exactly():
    m = MomentSequence(two_mix_moments(-0.5, 1.5, 0.3, 0.0, 0.0, 6))
    best = recover_two_component(m)[0]
    assert _tuple_error(best, (-0.5, 1.5, 0.3, 0.0, 0.0)) <= 1e-12


@pytest.mark.parametrize("seed", range(20))
def test_candidate_count_and_truth_in_list(seed):
    truth = _random_tuple(np.random.default_rng(200 + seed))
    cands = recover_two_component(MomentSequence(two_mix_moments(*truth, 6)))
    from_quartic = [c for c in cands if not (c.alpha1 == 0 and c.alpha2 == 0)]
    assert len(from_quartic) <= 4
    assert min(_tuple_error(c, truth) for c in cands) <= 1e-8


@pytest.mark.parametrize("seed", range(15))
def test_agrees_with_general_recovery(seed):
    xi1, xi2, lam, a1, a2 = _random_tuple(np.random.default_rng(300 + seed))
    m = MomentSequence(two_mix_moments(xi1, xi2, lam, a1, a2, 6))
    best = recover_two_component(m)[0]
    res = recover(m, 2, 1).mixture.sorted()
    e = sorted([(best.xi1, best.lam, best.lam * best.alpha1), (best.xi2, 1 - best.lam, (1 - best.lam) * best.alpha2)],
               key=lambda t: np.real(t[0]))
    for comp, (xi, w0, w1) in zip(res.components, e):
        assert comp.xi == pytest.approx(xi, rel=1e-6, abs=1e-6)
        np.testing.assert_allclose(comp.lambdas, [w0, w1], rtol=1e-6, atol=1e-6)


def test_statistical_filter_keeps_real_weights():
    m = MomentSequence(two_mix_moments(-1.0, 1.0, 0.4, 0.3, -0.1, 6))
    for c in recover_two_component(m, statistical=True):
        assert not isinstance(c.xi1, complex)
        assert 0 <= c.lam <= 1


def test_degree_checks():
    with pytest.raises(InsufficientMomentsError):
        recover_two_component(MomentSequence([1.0, 0.5, 0.5, 0.5, 0.5, 0.5]))
    with pytest.raises(ValueError):
        recover_two_component(MomentSequence([2.0, 1, 1, 1, 1, 1, 1]))
    with pytest.raises(InsufficientMomentsError):
        TwoMixCumulants.from_moments(MomentSequence([1.0, 0.5]))


def test_deflated_roots():
    # vanishing leading coefficient: k_2 = k_3 = 0
    k = TwoMixCumulants(0.0, 0.0, 0.0, 1.0, 1.0)
    assert g_s_roots(k).size < 4


@given(st.floats(-2, 2), st.floats(0.1, 2), st.floats(0.2, 0.8), st.floats(-1, 1), st.floats(-1, 1))
def test_swap_symmetry(xi1, gap, lam, a1, a2):
    xi2 = xi1 + gap
    m = two_mix_moments(xi1, xi2, lam, a1, a2, 6)
    n = two_mix_moments(xi2, xi1, 1 - lam, a2, a1, 6)
    np.testing.assert_allclose(m, n, rtol=1e-12, atol=1e-12 * np.abs(m).max())


def test_local_dirac_moments_agree():
    mix = mixture_of([0.0, 1.0], [[0.6, 0.06], [0.4, -0.08]])
    np.testing.assert_allclose(local_dirac_moments(mix, 6).values, two_mix_moments(0, 1, 0.6, 0.1, -0.2, 6), atol=1e-15)
