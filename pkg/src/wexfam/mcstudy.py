"""Bootstrap bias reduction and the Monte Carlo study harness.

The bias-reduced estimate of a parameter is ``2*theta_hat - mean(theta_b)``
over ``B`` nonparametric bootstrap refits.  :func:`run_study` repeats
sample-fit-correct ``N`` times per (sample size, true parameter) cell and
summarises the raw and corrected estimates by relative bias and RMSE.

Every replicate draws from its own :class:`~wexfam.specialfn.SeedStream`
addressed by ``(size index, point index, replicate)``, so a report depends
only on its :class:`StudyConfig`, never on thread scheduling.
"""

from __future__ import annotations

import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import specialfn
from .estimation import (
    DEGENERACY_TOL,
    DegenerateSampleError,
    FitResult,
    closed_form_distinct,
    closed_form_equal,
    estimate,
    observation_terms,
    summary_stats,
)
from .generators import LINDLEY_FAMILIES, NAKAGAMI_FAMILIES, Generator, builtin
from .model import VARIANTS, NativeParams, sample
from .specialfn import DomainError, SeedStream

__all__ = [
    "BootstrapError",
    "OracleError",
    "ConfigError",
    "StudyConfig",
    "StudyRow",
    "StudyReport",
    "bias_reduced",
    "bootstrap_bias_reduce",
    "rb",
    "rmse",
    "run_study",
    "ml_oracle",
    "score",
]

log = logging.getLogger(__name__)

DEGENERATE_FLAG_FRACTION = 0.05


class BootstrapError(ArithmeticError):
    """Too many bootstrap resamples were degenerate."""


class OracleError(ArithmeticError):
    """The Newton likelihood solver failed to converge."""


class ConfigError(ValueError):
    """A study configuration is malformed."""


def bias_reduced(theta_hat, replicates):
    """``2*theta_hat - mean(replicates)`` along the first axis of ``replicates``."""
    replicates = np.asarray(replicates, dtype=float)
    return 2.0 * np.asarray(theta_hat, dtype=float) - replicates.mean(axis=0)


def _fit_rows(variant, stats, tol):
    """Vectorised closed-form fits from an ``(m, 6)`` array of functionals."""
    y1, y2, y3, y4, y5, y6 = stats.T
    if variant == "equal":
        return closed_form_equal(1.0 + y1 + y2 + y3 - y4, y4, y5, y6, tol)
    return closed_form_distinct(y1, y2, y4, y5, y6, tol)


def _native_array(family, mu, sigma):
    if family in LINDLEY_FAMILIES:
        return np.stack([mu, sigma * mu], axis=-1)
    if family in NAKAGAMI_FAMILIES:
        return np.stack([mu, 1.0 / sigma], axis=-1)
    return np.stack([mu, sigma], axis=-1)


def _from_native(family, pair):
    first, second = pair
    if family in LINDLEY_FAMILIES:
        return first, second / first
    if family in NAKAGAMI_FAMILIES:
        return first, 1.0 / second
    return first, second


def bootstrap_bias_reduce(
    gen: Generator,
    variant: str,
    sample_,
    B: int,
    stream: SeedStream,
    tol: float = DEGENERACY_TOL,
) -> tuple[FitResult, FitResult]:
    """Bootstrap bias-reduced estimate ``(theta_star, theta_hat)``.

    The correction is applied to the native parameters (``(phi, lambda)``
    or ``(m, Omega)``) of named families and to ``(mu, sigma)`` otherwise.
    Degenerate resamples are redrawn; more than ``10*B`` resamples in
    total raises :class:`BootstrapError`.
    """
    if B < 1:
        raise DomainError("B must be at least 1")
    theta_hat = estimate(gen, sample_, variant, tol)
    terms = observation_terms(gen, sample_)
    n = terms.shape[0]
    rng = stream.rng

    mu_b = np.empty(B)
    sigma_b = np.empty(B)
    todo = np.arange(B)
    drawn = 0
    while todo.size:
        if drawn + todo.size > 10 * B:
            raise BootstrapError(
                f"bootstrap failed: {drawn} resamples drawn, {todo.size} of {B} still degenerate"
            )
        idx = rng.integers(0, n, size=(todo.size, n))
        drawn += todo.size
        sigma, mu, status = _fit_rows(variant, terms[idx].mean(axis=1), tol)
        ok = status == 0
        mu_b[todo[ok]] = mu[ok]
        sigma_b[todo[ok]] = sigma[ok]
        todo = todo[~ok]

    boot = _native_array(gen.name, mu_b, sigma_b)
    star_pair = bias_reduced(np.array(theta_hat.native_pair), boot)
    mu_star, sigma_star = _from_native(gen.name, star_pair)
    native = None
    if gen.name in LINDLEY_FAMILIES + NAKAGAMI_FAMILIES and np.all(star_pair > 0):
        native = NativeParams(gen.name, float(star_pair[0]), float(star_pair[1]))
    theta_star = FitResult(
        mu_hat=float(mu_star),
        sigma_hat=float(sigma_star),
        variant=variant,
        family=gen.name,
        n=n,
        stats=theta_hat.stats,
        native=native,
        native_pair=(float(star_pair[0]), float(star_pair[1])),
        extra={"bootstrap_draws": drawn, "bootstrap_redraws": drawn - B},
    )
    return theta_star, theta_hat


def rb(estimates, theta: float) -> float:
    """Relative bias ``|mean(estimates) - theta| / |theta|``."""
    if theta == 0:
        raise DomainError("relative bias is undefined for theta = 0")
    est = np.asarray(estimates, dtype=float)
    if est.size == 0:
        raise DomainError("no estimates")
    return abs((math.fsum(est) / est.size - theta) / theta)


def rmse(estimates, theta: float) -> float:
    """Root mean squared error of ``estimates`` about ``theta``."""
    est = np.asarray(estimates, dtype=float)
    if est.size == 0:
        raise DomainError("no estimates")
    return math.sqrt(math.fsum((est - theta) ** 2) / est.size)


@dataclass(frozen=True)
class StudyConfig:
    """A Monte Carlo study over sample sizes and true parameter points.

    ``true_native`` holds one or more ``(first, second)`` native parameter
    points of ``family``.
    """

    family: str
    variant: str
    true_native: tuple[NativeParams, ...]
    sample_sizes: tuple[int, ...]
    n_replications: int
    n_bootstrap: int
    master_seed: int = 0
    parallelism: int = 1

    FIELDS = (
        "family",
        "variant",
        "true_native",
        "sample_sizes",
        "n_replications",
        "n_bootstrap",
        "master_seed",
        "parallelism",
    )

    def __post_init__(self):
        if self.family not in LINDLEY_FAMILIES + NAKAGAMI_FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}")
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}")
        if not self.true_native:
            raise ConfigError("true_native must list at least one parameter point")
        if not self.sample_sizes or any(int(n) != n or n < 2 for n in self.sample_sizes):
            raise ConfigError("sample_sizes must be integers >= 2")
        if self.n_replications < 1 or self.n_bootstrap < 1:
            raise ConfigError("n_replications and n_bootstrap must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be a 64-bit unsigned integer")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "StudyConfig":
        """Build from a parsed JSON document; unknown keys are rejected."""
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        unknown = set(data) - set(cls.FIELDS)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(sorted(unknown))}")
        missing = {"family", "variant", "true_native", "sample_sizes", "n_replications", "n_bootstrap"} - set(data)
        if missing:
            raise ConfigError(f"missing configuration keys: {', '.join(sorted(missing))}")
        family = data["family"]
        points = data["true_native"]
        if isinstance(points, dict) or (
            isinstance(points, (list, tuple)) and len(points) == 2 and all(isinstance(v, (int, float)) for v in points)
        ):
            points = [points]
        try:
            native = tuple(
                NativeParams(family, float(p["first"]), float(p["second"]))
                if isinstance(p, dict)
                else NativeParams(family, float(p[0]), float(p[1]))
                for p in points
            )
            return cls(
                family=family,
                variant=data["variant"],
                true_native=native,
                sample_sizes=tuple(int(n) for n in data["sample_sizes"]),
                n_replications=int(data["n_replications"]),
                n_bootstrap=int(data["n_bootstrap"]),
                master_seed=int(data.get("master_seed", 0)),
                parallelism=int(data.get("parallelism", 1)),
            )
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise ConfigError(f"invalid configuration: {exc}") from exc

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.FIELDS}
        d["true_native"] = [[p.first, p.second] for p in self.true_native]
        d["sample_sizes"] = list(self.sample_sizes)
        return d


@dataclass(frozen=True)
class StudyRow:
    n: int
    point_index: int
    true_first: float
    true_second: float
    parameter: str
    true_value: float
    raw_rb: Optional[float]
    corrected_rb: Optional[float]
    raw_rmse: Optional[float]
    corrected_rmse: Optional[float]
    degenerate_count: int
    n_valid: int
    flagged: bool
    wall_clock_seconds: float


@dataclass
class StudyReport:
    config: StudyConfig
    rows: list[StudyRow] = field(default_factory=list)

    def row(self, n: int, parameter: str, point_index: int = 0) -> StudyRow:
        for r in self.rows:
            if r.n == n and r.parameter == parameter and r.point_index == point_index:
                return r
        raise KeyError((n, parameter, point_index))

    def numeric_fields(self) -> list[tuple]:
        """Every reported value except wall-clock time (for determinism checks)."""
        return [
            tuple(v for k, v in asdict(r).items() if k != "wall_clock_seconds") for r in self.rows
        ]


def _replicate(gen, params, variant, n, B, stream):
    """One Monte Carlo replicate: ``(raw_pair, corrected_pair)`` or ``None`` if degenerate."""
    y = sample(gen, params, n, stream.child(0))
    try:
        star, hat = bootstrap_bias_reduce(gen, variant, y, B, stream.child(1))
    except (DegenerateSampleError, BootstrapError):
        return None
    return hat.native_pair, star.native_pair


def run_study(config: StudyConfig, parallelism: Optional[int] = None) -> StudyReport:
    """Run every (sample size, parameter point) cell of ``config``.

    ``parallelism`` overrides ``config.parallelism``; it never changes the
    numbers in the report.
    """
    gen = builtin(config.family)
    workers = parallelism or config.parallelism
    report = StudyReport(config)
    N, B = config.n_replications, config.n_bootstrap
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for i_n, n in enumerate(config.sample_sizes):
            for i_p, point in enumerate(config.true_native):
                params = point.to_model(config.variant)
                streams = [SeedStream(config.master_seed, (i_n, i_p, r)) for r in range(N)]
                t0 = time.perf_counter()
                if workers == 1:
                    results = [_replicate(gen, params, config.variant, n, B, s) for s in streams]
                else:
                    results = list(
                        pool.map(lambda s: _replicate(gen, params, config.variant, n, B, s), streams)
                    )
                seconds = time.perf_counter() - t0
                valid = [r for r in results if r is not None]
                degenerate = N - len(valid)
                flagged = degenerate > DEGENERATE_FLAG_FRACTION * N
                if flagged:
                    log.warning("cell n=%d point=%d: %d/%d degenerate replicates", n, i_p, degenerate, N)
                raw = np.array([r[0] for r in valid]).reshape(-1, 2)
                cor = np.array([r[1] for r in valid]).reshape(-1, 2)
                truth = (point.first, point.second)
                for k, name in enumerate(point.names):
                    has = len(valid) > 0
                    report.rows.append(
                        StudyRow(
                            n=n,
                            point_index=i_p,
                            true_first=point.first,
                            true_second=point.second,
                            parameter=name,
                            true_value=truth[k],
                            raw_rb=rb(raw[:, k], truth[k]) if has else None,
                            corrected_rb=rb(cor[:, k], truth[k]) if has else None,
                            raw_rmse=rmse(raw[:, k], truth[k]) if has else None,
                            corrected_rmse=rmse(cor[:, k], truth[k]) if has else None,
                            degenerate_count=degenerate,
                            n_valid=len(valid),
                            flagged=flagged,
                            wall_clock_seconds=seconds,
                        )
                    )
                log.info("cell n=%d point=%d done in %.3fs", n, i_p, seconds)
    return report


def score(gen: Generator, variant: str, sample_, mu: float, sigma: float) -> np.ndarray:
    """Per-observation log-likelihood score ``(d/dmu, d/dsigma)`` at ``p = 1``."""
    st = summary_stats(gen, sample_)
    t = gen(np.asarray(sample_, dtype=float))
    mean_log_t = math.fsum(np.log(t)) / t.size
    return _score(st.y6, mean_log_t, 1 if variant == "equal" else 0, mu, sigma)


def _score(y6, mean_log_t, d, mu, sigma):
    s_mu = 1.0 + math.log(mu) + math.log(sigma) - specialfn.digamma(mu) - sigma * y6 + mean_log_t
    s_sigma = (mu + 1.0) / sigma - 1.0 / (sigma + d) - mu * y6
    return np.array([s_mu, s_sigma])


def ml_oracle(
    gen: Generator,
    variant: str,
    sample_,
    init: FitResult,
    gtol: float = 1e-10,
    max_iter: int = 200,
) -> FitResult:
    """Maximum likelihood ``(mu, sigma)`` by Newton's method from ``init``.

    A reference solution for checking the closed-form estimators; not used
    by them.
    """
    if variant not in VARIANTS:
        raise DomainError(f"variant must be one of {VARIANTS}")
    d = 1 if variant == "equal" else 0
    st = summary_stats(gen, sample_)
    t = gen(np.asarray(sample_, dtype=float))
    mean_log_t = math.fsum(np.log(t)) / t.size
    x = np.array([init.mu_hat, init.sigma_hat], dtype=float)
    if not np.all(x > 0):
        raise OracleError("initial point must be positive")
    g = _score(st.y6, mean_log_t, d, *x)
    it = 0
    while np.max(np.abs(g)) > gtol:
        if it == max_iter:
            raise OracleError(f"no convergence in {max_iter} Newton iterations")
        it += 1
        mu, sigma = x
        cross = 1.0 / sigma - st.y6
        hess = np.array(
            [
                [1.0 / mu - specialfn.trigamma(mu), cross],
                [cross, -(mu + 1.0) / sigma**2 + 1.0 / (sigma + d) ** 2],
            ]
        )
        step = np.linalg.solve(hess, -g)
        lam = 1.0
        while True:
            cand = x + lam * step
            if np.all(cand > 0):
                g_new = _score(st.y6, mean_log_t, d, *cand)
                if np.max(np.abs(g_new)) < np.max(np.abs(g)) or lam < 1e-12:
                    break
            lam /= 2.0
            if lam < 1e-12:
                raise OracleError("line search failed")
        x, g = cand, g_new
    mu, sigma = float(x[0]), float(x[1])
    native = None
    if gen.name in LINDLEY_FAMILIES + NAKAGAMI_FAMILIES:
        native = NativeParams.from_model(gen.name, mu, sigma)
    return FitResult(
        mu_hat=mu,
        sigma_hat=sigma,
        variant=variant,
        family=gen.name,
        n=st.n,
        stats=st,
        native=native,
        extra={"iterations": it, "score": g},
    )


def default_threads() -> int:
    return os.cpu_count() or 1
