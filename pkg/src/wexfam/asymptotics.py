"""Large-sample behaviour of the equal-variant estimators.

The estimators are smooth functions of the six sample means
``(Y1, ..., Y6)``: ``sigma_hat = g1(Y)`` and ``mu_hat = g2(Y)``.  This module
evaluates ``g1``/``g2``, the exact moment vector ``E(Y1*, ..., Y6*)`` for
power generators ``T(x) = x**-s``, and the delta-method covariance of
``(mu_hat, sigma_hat)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from . import specialfn
from .estimation import (
    DEGENERACY_TOL,
    _equal_raw,
    closed_form_distinct,
    estimate,
    observation_terms,
)
from .generators import Generator
from .model import ModelParams, sample
from .specialfn import DomainError, SeedStream

__all__ = [
    "EvaluationError",
    "MomentVector",
    "g1",
    "g2",
    "theorem1_moments",
    "quadrature_moments",
    "empirical_moments",
    "numerical_jacobian",
    "delta_covariance",
]


class EvaluationError(ArithmeticError):
    """A functional is undefined at the requested point."""


@dataclass(frozen=True)
class MomentVector:
    """Six coordinates ``(E Y1*, ..., E Y6*)`` or their sample analogues."""

    e1: float
    e2: float
    e3: float
    e4: float
    e5: float
    e6: float

    def __array__(self, dtype=None, copy=None):
        return np.array([self.e1, self.e2, self.e3, self.e4, self.e5, self.e6], dtype=dtype)

    def __iter__(self):
        return iter((self.e1, self.e2, self.e3, self.e4, self.e5, self.e6))


def _coords(m) -> np.ndarray:
    if hasattr(m, "as_vector"):
        m = m.as_vector()
    v = np.asarray(m, dtype=float)
    if v.shape != (6,):
        raise ValueError(f"expected six coordinates, got shape {v.shape}")
    return v


def _g(m, tol=0.0):
    y1, y2, y3, y4, y5, y6 = _coords(m)
    z = 1.0 + y1 + y2 + y3 - y4
    sigma, mu, status = _equal_raw(z, y4, y5, y6, tol)
    return float(sigma), float(mu), int(status)


def g1(m) -> float:
    """``sigma_hat`` as a function of the six coordinates.

    Accepts a :class:`MomentVector`, a
    :class:`~wexfam.estimation.SummaryStats` or any length-6 sequence.
    """
    sigma, _, status = _g(m)
    if status in (1, 2):
        raise EvaluationError("g1 undefined: zero denominator or negative discriminant")
    return sigma


def g2(m) -> float:
    """``mu_hat`` as a function of the six coordinates (uses :func:`g1`)."""
    _, mu, status = _g(m)
    if status:
        raise EvaluationError("g2 undefined: g1*y5 - y4 vanishes or g1 is undefined")
    return mu


def theorem1_moments(mu: float, sigma: float, s: float) -> MomentVector:
    """Exact ``E(Y*)`` for the equal variant with ``T(x) = x**-s``."""
    if not (mu > 0 and sigma > 0 and math.isfinite(mu) and math.isfinite(sigma)):
        raise DomainError("mu and sigma must be positive and finite")
    if s == 0 or not math.isfinite(s):
        raise DomainError("s must be finite and nonzero")
    psi = specialfn.digamma(mu)
    log_rate = math.log(mu * sigma)
    bracket = psi - log_rate + 1.0 / (mu * (sigma + 1.0))
    bracket_mu = psi - log_rate + 1.0 / mu
    e6 = (1.0 + (mu + 1.0) / (mu * sigma)) / (sigma + 1.0)
    return MomentVector(
        e1=-bracket / s,
        e2=(s + 1.0) / s * bracket,
        e3=bracket_mu / (sigma + 1.0),
        e4=bracket,
        e5=e6 * bracket_mu + 1.0 / (mu * sigma * (sigma + 1.0)),
        e6=e6,
    )


def _gamma_expectation(fn, shape, rate):
    """``E fn(Z)`` for ``Z ~ Gamma(shape, rate)`` by quadrature in ``u = log z``."""
    lo = math.log(stats.gamma.ppf(1e-300, shape) or 1e-300) - math.log(rate)
    hi = math.log(stats.gamma.isf(1e-20, shape)) - math.log(rate)
    norm = shape * math.log(rate) - math.lgamma(shape)

    def integrand(u):
        z = math.exp(u)
        return fn(z) * math.exp(norm + shape * u - rate * z)

    edges = np.linspace(lo, hi, 17)
    return math.fsum(
        integrate.quad(integrand, a, b, epsabs=0.0, epsrel=1e-12, limit=100)[0]
        for a, b in zip(edges[:-1], edges[1:])
    )


def quadrature_moments(mu: float, sigma: float, s: float) -> MomentVector:
    """``E(Y*)`` for ``T(x) = x**-s`` by numerical integration.

    An independent check of :func:`theorem1_moments` that does not use
    digamma.  With ``Z = T(X)`` every coordinate is a function of ``Z``,
    and ``Z`` is a two-component gamma mixture.
    """
    if s == 0 or not math.isfinite(s):
        raise DomainError("s must be finite and nonzero")
    rate = mu * sigma
    w = 1.0 / (sigma + 1.0)

    def mix(fn):
        return (1.0 - w) * _gamma_expectation(fn, mu, rate) + w * _gamma_expectation(fn, mu + 1.0, rate)

    log_z = mix(math.log)
    e1 = -log_z / s
    return MomentVector(
        e1=e1,
        e2=-(s + 1.0) * e1,
        e3=mix(lambda z: z / (1.0 + z) * math.log(z)),
        e4=log_z,
        e5=mix(lambda z: z * math.log(z)),
        e6=mix(lambda z: z),
    )


def empirical_moments(gen: Generator, params: ModelParams, n: int, stream: SeedStream) -> MomentVector:
    """Sample means of the six ``Y*`` functionals over ``n`` fresh draws."""
    terms = observation_terms(gen, sample(gen, params, n, stream))
    return MomentVector(*(math.fsum(terms[:, k]) / n for k in range(6)))


def numerical_jacobian(f, x, rel_step: float = 1e-5, abs_step: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian of vector function ``f`` at ``x``.

    Coordinate ``k`` uses ``h = max(abs_step, rel_step * |x_k|)``.
    """
    x = np.asarray(x, dtype=float)
    f0 = np.atleast_1d(np.asarray(f(x), dtype=float))
    jac = np.empty((f0.size, x.size))
    for k in range(x.size):
        h = max(abs_step, rel_step * abs(x[k]))
        up, dn = x.copy(), x.copy()
        up[k] += h
        dn[k] -= h
        jac[:, k] = (np.asarray(f(up), dtype=float) - np.asarray(f(dn), dtype=float)) / (
            up[k] - dn[k]
        )
    return jac


def _equal_pair(v):
    sigma, mu, status = _g(v)
    if status:
        raise EvaluationError("estimator functionals undefined near the sample moments")
    return np.array([mu, sigma])


def _distinct_pair(v):
    y1, y2, _, y4, y5, y6 = v
    sigma, mu, status = closed_form_distinct(y1, y2, y4, y5, y6, tol=0.0)
    if status:
        raise EvaluationError("estimator functionals undefined near the sample moments")
    return np.array([float(mu), float(sigma)])


def delta_covariance(gen: Generator, sample_, variant: str = "equal", tol: float = DEGENERACY_TOL):
    """Plug-in delta-method covariance of ``(mu_hat, sigma_hat)``.

    Returns ``A @ S @ A.T / n`` where ``S`` is the sample covariance
    (divisor ``n - 1``) of the per-observation ``Y*`` vectors and ``A`` the
    2x6 Jacobian of ``(g2, g1)`` at the sample means.
    """
    y = np.asarray(sample_, dtype=float).ravel()
    if y.size < 10:
        raise DomainError("delta covariance needs at least 10 observations")
    estimate(gen, y, variant, tol)  # raise early on degenerate samples
    terms = observation_terms(gen, y)
    means = np.array([math.fsum(terms[:, k]) / y.size for k in range(6)])
    fn = _equal_pair if variant == "equal" else _distinct_pair
    jac = numerical_jacobian(fn, means)
    if not np.all(np.isfinite(jac)):
        raise EvaluationError("non-finite Jacobian of the estimator functionals")
    cov = jac @ np.cov(terms, rowvar=False, ddof=1) @ jac.T / y.size
    return 0.5 * (cov + cov.T)
