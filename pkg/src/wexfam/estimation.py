"""Closed-form estimators of ``(mu, sigma)``.

Both variants are built on seven sample functionals of ``Y_i**p``:

    Y1 = mean log Y                       Y4 = mean (T'/T)(Y**p) Y**p log Y
    Y2 = mean (T''/T')(Y**p) Y**p log Y   Y5 = mean T'(Y**p) Y**p log Y
    Y3 = mean (T'/(1+T))(Y**p) Y**p log Y Y6 = mean T(Y**p)
    Z  = 1/p + Y1 + Y2 + Y3 - Y4

For the ``"equal"`` variant ``sigma_hat`` is the positive root of

    Z*Y6*s**2 - (Z*(1 - Y6) + Y5)*s - (Z - Y4) = 0

and ``mu_hat = Z / (sigma_hat*Y5 - Y4)``.  For ``"distinct"``,
``sigma_hat = 1/Y6`` and ``mu_hat = Y6*(1 + Y1 + Y2 - Y4) / (Y5 - Y6*Y4)``.
Everything is evaluated at ``p = 1`` unless a profile in ``p`` is requested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import specialfn
from .generators import LINDLEY_FAMILIES, NAKAGAMI_FAMILIES, Generator
from .model import VARIANTS, NativeParams
from .specialfn import DomainError

__all__ = [
    "DataError",
    "DegenerateSampleError",
    "DEGENERACY_TOL",
    "SummaryStats",
    "FitResult",
    "observation_terms",
    "summary_stats",
    "closed_form_equal",
    "closed_form_distinct",
    "estimate",
    "estimate_equal",
    "estimate_distinct",
    "profile_estimators",
    "p_equation_residual",
    "quadratic_residual",
    "score_residual",
    "to_native",
    "specialized_stats",
]

DEGENERACY_TOL = 1e-12


class DataError(ValueError):
    """An observation is unusable; ``index`` is its 0-based position."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DegenerateSampleError(ArithmeticError):
    """The closed-form estimator is undefined for this sample."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


@dataclass(frozen=True)
class SummaryStats:
    """The sample functionals ``Z, Y1..Y6`` at power ``p``.

    ``y1``-``y3`` are ``None`` when produced by :func:`specialized_stats`,
    whose per-family formulas only expose ``Z, Y4, Y5, Y6``.
    """

    p: float
    n: int
    z_bar: float
    y1: Optional[float]
    y2: Optional[float]
    y3: Optional[float]
    y4: float
    y5: float
    y6: float

    def as_vector(self) -> np.ndarray:
        """``(Y1, ..., Y6)`` as a float array."""
        return np.array([self.y1, self.y2, self.y3, self.y4, self.y5, self.y6], dtype=float)


@dataclass
class FitResult:
    mu_hat: float
    sigma_hat: float
    variant: str
    family: str
    n: int
    stats: SummaryStats
    native: Optional[NativeParams] = None
    covariance: Optional[np.ndarray] = None
    quadratic_residual: Optional[float] = None
    denominator: float = math.nan
    native_pair: Optional[tuple[float, float]] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        # the pair survives even when it is not a valid NativeParams
        # (a bias-corrected estimate may leave the parameter space)
        if self.native_pair is None:
            if self.native is not None:
                self.native_pair = (self.native.first, self.native.second)
            else:
                self.native_pair = (self.mu_hat, self.sigma_hat)


def _validated_sample(gen: Generator, sample) -> np.ndarray:
    y = np.asarray(sample, dtype=float).ravel()
    if y.size == 0:
        raise DataError("sample is empty")
    bad = ~(np.isfinite(y) & gen.in_domain(y) & (y > 0))
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise DataError(f"observation {i} ({y[i]!r}) lies outside the domain of {gen.name}", i)
    return y


def observation_terms(gen: Generator, sample, p: float = 1.0) -> np.ndarray:
    """Per-observation summands of ``Y1..Y6`` as an ``(n, 6)`` array.

    At ``p = 1`` row ``i`` is the vector ``(Y1*, ..., Y6*)`` evaluated at
    observation ``i``.
    """
    if not (math.isfinite(p) and p > 0):
        raise DomainError(f"power p must be positive, got {p!r}")
    y = _validated_sample(gen, sample)
    log_y = np.log(y)
    yp = y if p == 1 else y**p
    t, t1, t2 = gen.evaluate(yp)
    w = yp * log_y
    return np.column_stack([log_y, t2 / t1 * w, t1 / (1.0 + t) * w, t1 / t * w, t1 * w, t])


def _mean(col) -> float:
    return math.fsum(col) / len(col)


def summary_stats(gen: Generator, sample, p: float = 1.0) -> SummaryStats:
    """Evaluate ``Z, Y1..Y6`` with error-free (order-independent) summation."""
    terms = observation_terms(gen, sample, p)
    y1, y2, y3, y4, y5, y6 = (_mean(terms[:, k]) for k in range(6))
    z = 1.0 / p + y1 + y2 + y3 - y4
    return SummaryStats(float(p), terms.shape[0], z, y1, y2, y3, y4, y5, y6)


_EQUAL_FAILURES = {
    1: "Z*Y6 <= tolerance (leading coefficient of the sigma quadratic vanishes)",
    2: "negative discriminant in the sigma quadratic",
    3: "sigma_hat is not positive",
    4: "sigma_hat*Y5 - Y4 vanishes",
    5: "mu_hat is not positive and finite",
}

_DISTINCT_FAILURES = {
    1: "Y6 is not positive",
    4: "Y5 - Y6*Y4 vanishes",
    5: "mu_hat is not positive and finite",
}


def _equal_raw(z, y4, y5, y6, tol):
    """Positive root of the sigma quadratic and the matching mu, unfiltered.

    Status 1/2/4 flag a vanishing leading coefficient, a negative
    discriminant and a vanishing mu denominator; other entries are 0.
    """
    z, y4, y5, y6 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (z, y4, y5, y6)))
    a = z * y6
    b = z * (1.0 - y6) + y5
    c = z - y4
    disc = b * b + 4.0 * a * c
    status = np.zeros(z.shape, dtype=np.int64)
    scale = np.maximum.reduce([np.abs(a), np.abs(b), np.abs(c)])
    status[a <= tol * scale] = 1
    status[(status == 0) & (disc < 0)] = 2
    with np.errstate(all="ignore"):
        sigma = (b + np.sqrt(disc)) / (2.0 * a)
        sy5 = sigma * y5
        den = sy5 - y4
        status[(status == 0) & (np.abs(den) <= tol * np.maximum(np.abs(sy5), np.abs(y4)))] = 4
        mu = z / den
    return sigma, mu, status


def closed_form_equal(z, y4, y5, y6, tol: float = DEGENERACY_TOL):
    """Vectorised equal-variant estimator on the functionals.

    Returns ``(sigma, mu, status)``; ``status`` is 0 where the estimate is
    valid and otherwise a failure code (see ``_EQUAL_FAILURES``).  Invalid
    entries of ``sigma``/``mu`` are NaN.
    """
    sigma, mu, status = _equal_raw(z, y4, y5, y6, tol)
    status[(status == 0) & ~(sigma > 0)] = 3
    status[(status == 0) & ~(np.isfinite(mu) & (mu > 0))] = 5
    sigma = np.where(status == 0, sigma, np.nan)
    mu = np.where(status == 0, mu, np.nan)
    return sigma, mu, status


def closed_form_distinct(y1, y2, y4, y5, y6, tol: float = DEGENERACY_TOL):
    """Vectorised distinct-variant estimator; same return contract as :func:`closed_form_equal`."""
    y1, y2, y4, y5, y6 = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (y1, y2, y4, y5, y6))
    )
    status = np.zeros(y6.shape, dtype=np.int64)
    status[~(y6 > 0)] = 1
    with np.errstate(all="ignore"):
        sigma = 1.0 / y6
        y6y4 = y6 * y4
        den = y5 - y6y4
        status[(status == 0) & (np.abs(den) <= tol * np.maximum(np.abs(y5), np.abs(y6y4)))] = 4
        mu = y6 * (1.0 + y1 + y2 - y4) / den
    status[(status == 0) & ~(np.isfinite(mu) & (mu > 0))] = 5
    sigma = np.where(status == 0, sigma, np.nan)
    mu = np.where(status == 0, mu, np.nan)
    return sigma, mu, status


def quadratic_residual(stats: SummaryStats, sigma: float) -> float:
    """Residual of the sigma quadratic at ``sigma``, relative to its largest term."""
    z, y4, y5, y6 = stats.z_bar, stats.y4, stats.y5, stats.y6
    terms = (z * y6 * sigma**2, -(z * (1.0 - y6) + y5) * sigma, -(z - y4))
    return abs(math.fsum(terms)) / max(abs(v) for v in terms)


def score_residual(stats: SummaryStats, mu: float, sigma: float) -> float:
    """``(mu+1)/sigma - 1/(sigma+1) - mu*Y6``: the per-observation sigma score (equal variant)."""
    return (mu + 1.0) / sigma - 1.0 / (sigma + 1.0) - mu * stats.y6


def to_native(family: str, mu_hat: float, sigma_hat: float) -> NativeParams:
    """Map ``(mu, sigma)`` to ``(phi, lambda)`` or ``(m, Omega)``."""
    return NativeParams.from_model(family, float(mu_hat), float(sigma_hat))


def _native_or_none(gen: Generator, mu, sigma):
    if gen.name in LINDLEY_FAMILIES + NAKAGAMI_FAMILIES:
        return to_native(gen.name, mu, sigma)
    return None


def _check_size(y):
    if y.size < 2:
        raise DegenerateSampleError(
            "at least two observations are required (a single observation always "
            "zeroes the mu_hat denominator)",
            "n < 2",
        )


def estimate_equal(gen: Generator, sample, tol: float = DEGENERACY_TOL) -> FitResult:
    """Closed-form estimates for the mixture (``a = b``) variant.

    Raises
    ------
    DataError
        If an observation lies outside the generator domain.
    DegenerateSampleError
        If the sample makes the closed form undefined; ``condition`` names
        the failing check.
    """
    y = _validated_sample(gen, sample)
    _check_size(y)
    st = summary_stats(gen, y)
    sigma, mu, status = closed_form_equal(st.z_bar, st.y4, st.y5, st.y6, tol)
    if status:
        msg = _EQUAL_FAILURES[int(status)]
        raise DegenerateSampleError(f"degenerate sample: {msg}", msg)
    sigma, mu = float(sigma), float(mu)
    return FitResult(
        mu_hat=mu,
        sigma_hat=sigma,
        variant="equal",
        family=gen.name,
        n=st.n,
        stats=st,
        native=_native_or_none(gen, mu, sigma),
        quadratic_residual=quadratic_residual(st, sigma),
        denominator=sigma * st.y5 - st.y4,
    )


def estimate_distinct(gen: Generator, sample, tol: float = DEGENERACY_TOL) -> FitResult:
    """Closed-form estimates for the single-component (``a != b``) variant."""
    y = _validated_sample(gen, sample)
    _check_size(y)
    st = summary_stats(gen, y)
    sigma, mu, status = closed_form_distinct(st.y1, st.y2, st.y4, st.y5, st.y6, tol)
    if status:
        msg = _DISTINCT_FAILURES[int(status)]
        raise DegenerateSampleError(f"degenerate sample: {msg}", msg)
    sigma, mu = float(sigma), float(mu)
    return FitResult(
        mu_hat=mu,
        sigma_hat=sigma,
        variant="distinct",
        family=gen.name,
        n=st.n,
        stats=st,
        native=_native_or_none(gen, mu, sigma),
        denominator=st.y5 - st.y6 * st.y4,
    )


def estimate(gen: Generator, sample, variant: str = "equal", tol: float = DEGENERACY_TOL) -> FitResult:
    if variant not in VARIANTS:
        raise DomainError(f"variant must be one of {VARIANTS}, got {variant!r}")
    fit = estimate_equal if variant == "equal" else estimate_distinct
    return fit(gen, sample, tol)


def profile_estimators(gen: Generator, sample, p: float, tol: float = DEGENERACY_TOL):
    """``(sigma_hat(p), mu_hat(p))`` for the power-transformed equal variant."""
    if not (math.isfinite(p) and p > 0):
        raise DomainError(f"power p must be positive, got {p!r}")
    y = _validated_sample(gen, sample)
    _check_size(y)
    st = summary_stats(gen, y, p)
    sigma, mu, status = closed_form_equal(st.z_bar, st.y4, st.y5, st.y6, tol)
    if status:
        msg = _EQUAL_FAILURES[int(status)]
        raise DegenerateSampleError(f"degenerate sample at p={p:g}: {msg}", msg)
    return float(sigma), float(mu)


def p_equation_residual(gen: Generator, sample, p: float, tol: float = DEGENERACY_TOL) -> float:
    """Left minus right side of the estimating equation for ``p``.

    ``[log mu(p) - digamma(mu(p))] - [sigma(p)*Y6(p) - 1 - log sigma(p) - mean log T(Y**p)]``
    with both profile estimators substituted for ``mu`` and ``sigma``.
    """
    sigma, mu = profile_estimators(gen, sample, p, tol)
    y = np.asarray(sample, dtype=float).ravel()
    t = gen(y**p)
    y6 = _mean(t)
    mean_log_t = _mean(np.log(t))
    lhs = math.log(mu) - specialfn.digamma(mu)
    rhs = sigma * y6 - 1.0 + math.log(1.0 / sigma) - mean_log_t
    return lhs - rhs


# Per-family closed forms of (Z, Y4, Y5, Y6) at p = 1, written out directly.
def _lindley(y, ly):
    return 1 + y * ly / (1 + y), ly, y * ly, y


def _inverse_lindley(y, ly):
    yi = 1 / y
    return 1 - yi * ly / (1 + yi), -ly, -yi * ly, yi


def _exp_lindley(y, ly):
    y4 = y * ly / ((y + 1) * np.log1p(y))
    z = 1 + ly - y * ly / (y + 1) + y * ly / ((y + 1) * (1 + np.log1p(y))) - y4
    return z, y4, y * ly / (y + 1), np.log1p(y)


def _log_lindley(y, ly):
    ey = np.exp(y)
    y4 = ey * y * ly / np.expm1(y)
    return 1 + ly + 2 * y * ly - y4, y4, ey * y * ly, np.expm1(y)


def _nakagami(y, ly):
    y2 = y * y
    return 1 + 2 * y2 * ly / (1 + y2), 2 * ly, 2 * y2 * ly, y2


def _inverse_nakagami(y, ly):
    y2 = 1 / (y * y)
    return 1 - 2 * y2 * ly / (1 + y2), -2 * ly, -2 * y2 * ly, y2


def _exp_nakagami(y, ly):
    y2 = y * y
    y4 = 2 * y2 * ly / ((y2 + 1) * np.log1p(y2))
    z = (
        1
        + ly
        - (y2 - 1) * ly / (y2 + 1)
        + 2 * y2 * ly / ((y2 + 1) * (1 + np.log1p(y2)))
        - y4
    )
    return z, y4, 2 * y2 * ly / (y2 + 1), np.log1p(y2)


def _log_nakagami(y, ly):
    y2 = y * y
    e2 = np.exp(y2)
    y4 = 2 * e2 * y2 * ly / np.expm1(y2)
    return 1 + 2 * ly + 4 * y2 * ly - y4, y4, 2 * e2 * y2 * ly, np.expm1(y2)


_SPECIALIZED = {
    "weighted_lindley": _lindley,
    "weighted_inverse_lindley": _inverse_lindley,
    "weighted_exp_lindley": _exp_lindley,
    "weighted_log_lindley": _log_lindley,
    "weighted_nakagami": _nakagami,
    "weighted_inverse_nakagami": _inverse_nakagami,
    "weighted_exp_nakagami": _exp_nakagami,
    "weighted_log_nakagami": _log_nakagami,
}


def specialized_stats(family: str, sample) -> SummaryStats:
    """``Z, Y4, Y5, Y6`` at ``p = 1`` from the per-family closed forms.

    These bypass the generic generator machinery and serve as an independent
    check of :func:`summary_stats`.
    """
    try:
        terms = _SPECIALIZED[family]
    except KeyError:
        raise KeyError(f"no specialised statistics for family {family!r}") from None
    y = np.asarray(sample, dtype=float).ravel()
    if y.size == 0:
        raise DataError("sample is empty")
    bad = ~(np.isfinite(y) & (y > 0))
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise DataError(f"observation {i} ({y[i]!r}) must be positive", i)
    z, y4, y5, y6 = (np.broadcast_to(v, y.shape) for v in terms(y, np.log(y)))
    return SummaryStats(1.0, y.size, _mean(z), None, None, None, _mean(y4), _mean(y5), _mean(y6))
