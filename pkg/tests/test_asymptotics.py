import itertools
import math

import numpy as np
import pytest

from wexfam.asymptotics import (
    EvaluationError,
    MomentVector,
    _equal_pair,
    delta_covariance,
    empirical_moments,
    g1,
    g2,
    numerical_jacobian,
    quadrature_moments,
    theorem1_moments,
)
from wexfam.estimation import estimate_equal, observation_terms, summary_stats
from wexfam.generators import builtin, power_generator
from wexfam.model import ModelParams, NativeParams, sample
from wexfam.specialfn import DomainError, SeedStream

EULER = 0.5772156649015329
GRID = list(itertools.product((0.5, 1.0, 3.0, 5.0), (0.5, 1.0, 2.0), (-2.0, -1.0, 1.0, 2.0)))


def test_g_on_summary_stats(lindley):
    st = summary_stats(lindley, [1.0, math.e])
    fit = estimate_equal(lindley, [1.0, math.e])
    assert g1(st) == pytest.approx(fit.sigma_hat, rel=1e-15)
    assert g2(st) == pytest.approx(fit.mu_hat, rel=1e-15)
    assert g1(st.as_vector()) == g1(st)


@pytest.mark.parametrize("mu, sigma, s", [(1, 1, 1), (3, 0.5, 2), (5, 2, -1)])
def test_fixed_point_examples(mu, sigma, s):
    m = theorem1_moments(mu, sigma, s)
    assert g1(m) == pytest.approx(sigma, rel=1e-12)
    assert g2(m) == pytest.approx(mu, rel=1e-12)


def test_exact_moment_values():
    m = theorem1_moments(1, 1, 1)
    # psi(1) - log 1 + 1/2 = 1/2 - gamma
    assert m.e1 == pytest.approx(EULER - 0.5, rel=1e-14)
    assert m.e1 == pytest.approx(0.0772157, abs=1e-7)
    assert m.e4 == pytest.approx(-0.0772157, abs=1e-7)
    assert m.e6 == 1.5
    assert m.e2 == pytest.approx(-2 * m.e1, rel=1e-14)


@pytest.mark.parametrize("mu, sigma, s", GRID)
def test_fixed_point_grid(mu, sigma, s):
    m = theorem1_moments(mu, sigma, s)
    assert abs(g1(m) - sigma) <= 1e-9 * sigma
    assert abs(g2(m) - mu) <= 1e-9 * mu
    assert m.e2 == pytest.approx(-(s + 1) * m.e1, rel=1e-13, abs=1e-300)
    assert m.e4 == pytest.approx(-s * m.e1, rel=1e-13)


@pytest.mark.parametrize("mu, sigma, s", GRID[::5])
def test_closed_form_moments_match_quadrature(mu, sigma, s):
    exact = np.asarray(theorem1_moments(mu, sigma, s))
    quad = np.asarray(quadrature_moments(mu, sigma, s))
    assert np.all(np.abs(exact - quad) <= 1e-11 * np.maximum(1.0, np.abs(quad)))


def test_exact_moments_reject_bad_input():
    with pytest.raises(DomainError):
        theorem1_moments(1, 1, 0)
    with pytest.raises(DomainError):
        theorem1_moments(-1, 1, 1)


def test_g_undefined_points():
    with pytest.raises(EvaluationError):
        g1([0, 0, 0, 0, 0, 0])
    with pytest.raises(EvaluationError):
        g2([0, 0, 0, 0, 0, 0])
    # constant-sample coordinates: valid sigma, vanishing mu denominator
    zero_den = [0, 0, 0, 0, 0, 1.0]
    assert g1(zero_den) > 0
    with pytest.raises(EvaluationError):
        g2(zero_den)
    with pytest.raises(ValueError):
        g1([1, 2, 3])


def test_moment_vector_protocols():
    m = MomentVector(1, 2, 3, 4, 5, 6)
    assert list(m) == [1, 2, 3, 4, 5, 6]
    assert np.array_equal(np.asarray(m), np.arange(1, 7.0))


def test_empirical_moments_within_three_standard_errors():
    mu, sigma, s = 2.0, 1.0, 2.0
    gen = power_generator(s)
    terms = observation_terms(gen, sample(gen, ModelParams(mu, sigma), 1_000_000, SeedStream(31)))
    emp = terms.mean(axis=0)
    se = terms.std(axis=0, ddof=1) / math.sqrt(terms.shape[0])
    exact = np.asarray(theorem1_moments(mu, sigma, s))
    assert np.all(np.abs(emp - exact) <= 3 * se), (emp - exact) / se
    # the linear relations hold observation by observation
    np.testing.assert_allclose(terms[:, 1], -(s + 1) * terms[:, 0], rtol=1e-12, atol=1e-300)
    np.testing.assert_allclose(terms[:, 3], -s * terms[:, 0], rtol=1e-12, atol=1e-300)


def test_empirical_moments_lindley_and_determinism(lindley):
    m = empirical_moments(lindley, ModelParams(1, 1), 1_000_000, SeedStream(41))
    assert m.e6 == pytest.approx(1.5, abs=0.01)
    a = empirical_moments(lindley, ModelParams(2, 1), 1000, SeedStream(3, 1))
    b = empirical_moments(lindley, ModelParams(2, 1), 1000, SeedStream(3, 1))
    assert a == b


def test_jacobian_of_linear_map():
    mat = np.array([[1.0, 2.0, -3.0], [0.5, 0.0, 4.0]])
    np.testing.assert_allclose(numerical_jacobian(lambda v: mat @ v, [1.0, -2.0, 3.0]), mat, rtol=1e-9)


def test_jacobian_second_order_convergence():
    x = np.asarray(theorem1_moments(2.0, 1.0, -1.0))
    steps = [4e-3, 2e-3, 1e-3]
    jacs = [numerical_jacobian(_equal_pair, x, rel_step=h, abs_step=h) for h in steps]
    d1 = np.abs(jacs[0] - jacs[1])
    d2 = np.abs(jacs[1] - jacs[2])
    big = d1 > 1e-8 * np.abs(jacs[2]).max()
    ratios = d1[big] / d2[big]
    assert big.sum() >= 6
    # halving h divides an O(h^2) error by 4
    assert np.all((ratios > 3.5) & (ratios < 4.5)), ratios


def _lindley_sample(n, stream):
    gen = builtin("weighted_lindley")
    return gen, sample(gen, NativeParams("weighted_lindley", 2.0, 1.0).to_model(), n, stream)


@pytest.mark.parametrize("variant", ["equal", "distinct"])
def test_delta_covariance_symmetric_psd(variant):
    gen, y = _lindley_sample(500, SeedStream(51))
    cov = delta_covariance(gen, y, variant)
    assert cov.shape == (2, 2)
    assert np.max(np.abs(cov - cov.T)) <= 1e-12 * np.abs(cov).max()
    assert np.linalg.eigvalsh(cov).min() >= -1e-10


def test_delta_covariance_preconditions(lindley):
    with pytest.raises(DomainError):
        delta_covariance(lindley, np.arange(1.0, 6.0))


def test_delta_covariance_scales_as_one_over_n():
    ratios = []
    for i in range(50):
        gen, y = _lindley_sample(40_000, SeedStream(52, i))
        big = np.diag(delta_covariance(gen, y))
        small = np.diag(delta_covariance(gen, y[:10_000]))
        ratios.append(big / small)
    med = np.median(np.array(ratios), axis=0)
    assert np.all((med >= 0.15) & (med <= 0.35)), med


def test_delta_covariance_matches_monte_carlo_spread():
    mus, sigmas, var_mu, var_sigma = [], [], [], []
    for i in range(500):
        gen, y = _lindley_sample(1000, SeedStream(53, i))
        fit = estimate_equal(gen, y)
        cov = delta_covariance(gen, y)
        mus.append(fit.mu_hat)
        sigmas.append(fit.sigma_hat)
        var_mu.append(cov[0, 0])
        var_sigma.append(cov[1, 1])
    for est, var in ((mus, var_mu), (sigmas, var_sigma)):
        ratio = np.median(var) / np.var(est, ddof=1)
        assert 1 / 1.5 <= ratio <= 1.5, ratio
