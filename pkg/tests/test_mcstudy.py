import math

import numpy as np
import pytest
from scipy import optimize

from wexfam import mcstudy
from wexfam.estimation import estimate, estimate_distinct, estimate_equal
from wexfam.generators import builtin
from wexfam.mcstudy import (
    BootstrapError,
    ConfigError,
    StudyConfig,
    bias_reduced,
    bootstrap_bias_reduce,
    ml_oracle,
    rb,
    rmse,
    run_study,
    score,
)
from wexfam.model import NativeParams, sample
from wexfam.specialfn import DomainError, SeedStream


def _lindley_sample(n, stream, phi=2.0, lam=1.0, variant="equal"):
    gen = builtin("weighted_lindley")
    return gen, sample(gen, NativeParams(gen.name, phi, lam).to_model(variant), n, stream)


def test_bias_reduced_arithmetic():
    assert bias_reduced(2.0, [2.2, 2.2]) == pytest.approx(1.8, rel=1e-15)
    assert bias_reduced(3.0, [3.0] * 5) == 3.0
    reps = np.random.default_rng(0).normal(size=(50, 2))
    theta = np.array([1.5, -0.5])
    np.testing.assert_array_equal(bias_reduced(theta, reps), 2 * theta - reps.mean(axis=0))


@pytest.mark.parametrize(
    "est, theta, expected",
    [([1, 1, 1], 1, 0.0), ([0.8, 1.2], 1, 0.0), ([2, 2], 1, 1.0)],
)
def test_rb_examples(est, theta, expected):
    assert rb(est, theta) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize(
    "est, theta, expected",
    [([1, 1, 1], 1, 0.0), ([0.8, 1.2], 1, 0.2), ([3], 1, 2.0)],
)
def test_rmse_examples(est, theta, expected):
    assert rmse(est, theta) == pytest.approx(expected, rel=1e-15, abs=1e-15)


def test_rb_rejects_zero_theta():
    with pytest.raises(DomainError):
        rb([1.0], 0.0)


def test_bootstrap_identity_when_replicates_match(monkeypatch):
    gen, y = _lindley_sample(30, SeedStream(1))
    hat = estimate_equal(gen, y)

    def constant(variant, stats, tol):
        m = stats.shape[0]
        return np.full(m, hat.sigma_hat), np.full(m, hat.mu_hat), np.zeros(m, dtype=int)

    monkeypatch.setattr(mcstudy, "_fit_rows", constant)
    star, hat2 = bootstrap_bias_reduce(gen, "equal", y, 20, SeedStream(2))
    assert star.native_pair[0] == pytest.approx(hat2.native_pair[0], rel=1e-14)
    assert star.native_pair[1] == pytest.approx(hat2.native_pair[1], rel=1e-14)
    assert star.extra["bootstrap_redraws"] == 0


def test_bootstrap_matches_explicit_loop():
    """Vectorised resampling equals refitting each resample one at a time."""
    gen, y = _lindley_sample(40, SeedStream(3))
    B = 25
    star, hat = bootstrap_bias_reduce(gen, "equal", y, B, SeedStream(4))
    idx = SeedStream(4).rng.integers(0, y.size, size=(B, y.size))
    fits = [estimate_equal(gen, y[row]).native_pair for row in idx]
    expected = 2 * np.array(hat.native_pair) - np.mean(fits, axis=0)
    np.testing.assert_allclose(star.native_pair, expected, rtol=1e-12)
    assert star.native.first == star.native_pair[0]


def test_bootstrap_redraws_degenerate_resamples(lindley):
    # a two-point sample yields constant resamples half the time
    star, hat = bootstrap_bias_reduce(lindley, "distinct", [1.0, math.e], 50, SeedStream(5))
    assert star.extra["bootstrap_redraws"] > 0
    assert star.extra["bootstrap_draws"] == 50 + star.extra["bootstrap_redraws"]
    assert math.isfinite(star.mu_hat)


def test_bootstrap_failure(monkeypatch):
    gen, y = _lindley_sample(30, SeedStream(6))

    def degenerate(variant, stats, tol):
        m = stats.shape[0]
        return np.full(m, np.nan), np.full(m, np.nan), np.ones(m, dtype=int)

    monkeypatch.setattr(mcstudy, "_fit_rows", degenerate)
    with pytest.raises(BootstrapError, match="resamples drawn"):
        bootstrap_bias_reduce(gen, "equal", y, 10, SeedStream(7))


def test_bootstrap_is_deterministic():
    gen, y = _lindley_sample(50, SeedStream(8))
    a, _ = bootstrap_bias_reduce(gen, "equal", y, 30, SeedStream(9))
    b, _ = bootstrap_bias_reduce(gen, "equal", y, 30, SeedStream(9))
    assert a.native_pair == b.native_pair


def _config(**kw):
    base = dict(
        family="weighted_lindley",
        variant="equal",
        true_native=[[1.0, 1.0], [3.0, 1.0]],
        sample_sizes=[20, 50],
        n_replications=12,
        n_bootstrap=10,
        master_seed=2024,
    )
    base.update(kw)
    return StudyConfig.from_dict(base)


def test_study_is_deterministic_across_threads():
    cfg = _config()
    one = run_study(cfg, parallelism=1)
    eight = run_study(cfg, parallelism=8)
    again = run_study(cfg, parallelism=8)
    assert one.numeric_fields() == eight.numeric_fields() == again.numeric_fields()
    assert len(one.rows) == 2 * 2 * 2
    row = one.row(50, "phi", 1)
    assert row.true_value == 3.0 and row.n_valid + row.degenerate_count == 12


def test_study_seed_changes_results():
    assert run_study(_config(master_seed=1)).numeric_fields() != run_study(_config(master_seed=2)).numeric_fields()


def test_study_rows_match_manual_replicates():
    cfg = _config(true_native=[1.0, 1.0], sample_sizes=[30], n_replications=5)
    report = run_study(cfg)
    gen = builtin("weighted_lindley")
    params = cfg.true_native[0].to_model()
    raw = []
    for r in range(5):
        s = SeedStream(cfg.master_seed, (0, 0, r))
        raw.append(estimate(gen, sample(gen, params, 30, s.child(0))).native_pair)
    raw = np.array(raw)
    assert report.row(30, "phi").raw_rb == pytest.approx(rb(raw[:, 0], 1.0), rel=1e-14)
    assert report.row(30, "lambda").raw_rmse == pytest.approx(rmse(raw[:, 1], 1.0), rel=1e-14)


def test_degenerate_only_cell(monkeypatch):
    monkeypatch.setattr(mcstudy, "sample", lambda gen, params, n, stream: np.full(n, 2.0))
    report = run_study(_config(true_native=[1.0, 1.0], sample_sizes=[10], n_replications=1))
    for row in report.rows:
        assert row.degenerate_count == 1
        assert row.n_valid == 0
        assert row.flagged
        assert row.raw_rb is None and row.corrected_rmse is None


def test_nakagami_study_runs():
    cfg = _config(family="weighted_nakagami", true_native=[2.0, 1.5], sample_sizes=[40], n_replications=4)
    report = run_study(cfg)
    assert [r.parameter for r in report.rows] == ["m", "Omega"]


@pytest.mark.parametrize(
    "bad",
    [
        {"family": "weighted_gompertz"},
        {"variant": "both"},
        {"sample_sizes": [1]},
        {"n_replications": 0},
        {"n_bootstrap": 0},
        {"true_native": [[-1.0, 1.0]]},
        {"true_native": []},
        {"master_seed": -3},
        {"colour": "blue"},
    ],
)
def test_config_validation(bad):
    with pytest.raises((ConfigError, DomainError)):
        _config(**bad)


def test_config_round_trip():
    cfg = _config()
    assert StudyConfig.from_dict(cfg.to_dict()) == cfg
    single = _config(true_native={"first": 2.0, "second": 1.0})
    assert single.true_native == (NativeParams("weighted_lindley", 2.0, 1.0),)
    with pytest.raises(ConfigError, match="missing"):
        StudyConfig.from_dict({"family": "weighted_lindley"})


@pytest.mark.parametrize("variant", ["equal", "distinct"])
def test_ml_oracle_stationary(variant):
    gen, y = _lindley_sample(500, SeedStream(10), variant=variant)
    init = estimate(gen, y, variant)
    fit = ml_oracle(gen, variant, y, init)
    assert np.max(np.abs(score(gen, variant, y, fit.mu_hat, fit.sigma_hat))) <= 1e-10


def test_ml_oracle_agrees_with_generic_optimiser(lindley):
    """Independent check: maximise the log-likelihood with a derivative-free method."""
    from wexfam.model import ModelParams, log_pdf

    gen, y = _lindley_sample(300, SeedStream(11))
    fit = ml_oracle(gen, "equal", y, estimate_equal(gen, y))

    def nll(v):
        return -np.sum(log_pdf(gen, ModelParams(math.exp(v[0]), math.exp(v[1])), y))

    res = optimize.minimize(nll, [0.0, 0.0], method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12})
    assert math.exp(res.x[0]) == pytest.approx(fit.mu_hat, rel=1e-5)
    assert math.exp(res.x[1]) == pytest.approx(fit.sigma_hat, rel=1e-5)


def test_ml_oracle_distinct_sigma_is_closed_form():
    gen, y = _lindley_sample(1000, SeedStream(12), variant="distinct")
    init = estimate_distinct(gen, y)
    fit = ml_oracle(gen, "distinct", y, init)
    assert fit.sigma_hat == pytest.approx(1 / fit.stats.y6, rel=1e-8)


def test_ml_oracle_close_to_closed_form_at_large_n():
    diffs = []
    for i in range(20):
        gen, y = _lindley_sample(100_000, SeedStream(13, i))
        closed = estimate_equal(gen, y)
        ml = ml_oracle(gen, "equal", y, closed)
        diffs.append(abs(closed.native.first - ml.native.first) / ml.native.first)
    assert np.median(diffs) <= 0.05


def test_ml_oracle_iteration_limit():
    from wexfam.mcstudy import OracleError

    gen, y = _lindley_sample(200, SeedStream(14))
    init = estimate_equal(gen, y)
    far = type(init)(**{**init.__dict__, "mu_hat": 50 * init.mu_hat, "native_pair": None})
    with pytest.raises(OracleError):
        ml_oracle(gen, "equal", y, far, max_iter=1)
    assert ml_oracle(gen, "equal", y, far).extra["iterations"] > 1
