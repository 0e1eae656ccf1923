"""Density, mixture decomposition and exact sampler of the family.

For a generator ``T`` the density is

    f(x) = (mu*sigma)**(mu+1) / ((sigma+d) * Gamma(mu+1))
           * (1 + d*T(x)) * |T'(x)| / T(x) * exp(-mu*sigma*T(x) + mu*log T(x))

with ``d = 1`` for the ``"equal"`` variant and ``d = 0`` for ``"distinct"``.
All densities are evaluated in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specialfn
from .generators import (
    LINDLEY_FAMILIES,
    NAKAGAMI_FAMILIES,
    Generator,
    RangeError,
    inverse,
)
from .specialfn import DomainError, SeedStream

__all__ = [
    "VARIANTS",
    "ModelParams",
    "NativeParams",
    "pdf",
    "log_pdf",
    "mixture_components",
    "pdf_power",
    "sample",
]

VARIANTS = ("equal", "distinct")


@dataclass(frozen=True)
class ModelParams:
    """Family member ``(mu, sigma)`` with its variant flag."""

    mu: float
    sigma: float
    variant: str = "equal"

    def __post_init__(self):
        for name in ("mu", "sigma"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive and finite, got {v!r}")
        if self.variant not in VARIANTS:
            raise DomainError(f"variant must be one of {VARIANTS}, got {self.variant!r}")

    @property
    def delta(self) -> int:
        return 1 if self.variant == "equal" else 0

    @property
    def mixing_weight(self) -> float:
        """Probability of the second mixture component, ``d / (sigma + d)``."""
        return self.delta / (self.sigma + self.delta)


@dataclass(frozen=True)
class NativeParams:
    """Parameters on the scale each named family is usually written in.

    Lindley-type families use ``(phi, lambda)`` with ``mu = phi`` and
    ``sigma = lambda / phi``; Nakagami-type families use ``(m, Omega)`` with
    ``mu = m`` and ``sigma = 1 / Omega``.
    """

    family: str
    first: float
    second: float

    def __post_init__(self):
        if self.family not in LINDLEY_FAMILIES + NAKAGAMI_FAMILIES:
            raise KeyError(f"no native parameterisation for family {self.family!r}")
        for name in ("first", "second"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive and finite, got {v!r}")

    @property
    def names(self) -> tuple[str, str]:
        return ("phi", "lambda") if self.family in LINDLEY_FAMILIES else ("m", "Omega")

    def to_model(self, variant: str = "equal") -> ModelParams:
        if self.family in LINDLEY_FAMILIES:
            return ModelParams(self.first, self.second / self.first, variant)
        return ModelParams(self.first, 1.0 / self.second, variant)

    @classmethod
    def from_model(cls, family: str, mu: float, sigma: float) -> "NativeParams":
        if family in LINDLEY_FAMILIES:
            return cls(family, mu, sigma * mu)
        if family in NAKAGAMI_FAMILIES:
            return cls(family, mu, 1.0 / sigma)
        raise KeyError(f"no native parameterisation for family {family!r}")


def _prepare(gen: Generator, x):
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)):
        raise DomainError("density arguments must be finite")
    inside = gen.in_domain(x)
    # placeholder keeps T finite where the density is defined to be 0
    return x, inside, np.where(inside, x, _interior_point(gen))


def _interior_point(gen: Generator) -> float:
    lo, hi = gen.domain
    if lo < 1.0 < hi:
        return 1.0
    if math.isfinite(lo) and math.isfinite(hi):
        return (lo + hi) / 2
    return lo + 1.0 if math.isfinite(lo) else hi - 1.0


def _log_kernel(gen: Generator, xs, shape, log_rate):
    """``log |T'|/T + shape*log T - rate*T`` (the part shared by all densities)."""
    t, t1, _ = gen.evaluate(xs)
    log_t = np.log(t)
    return np.log(np.abs(t1)) - log_t + shape * log_t - math.exp(log_rate) * t, t


def log_pdf(gen: Generator, params: ModelParams, x):
    """Log density; ``-inf`` outside the domain."""
    x, inside, xs = _prepare(gen, x)
    mu, sigma, d = params.mu, params.sigma, params.delta
    log_rate = math.log(mu * sigma)
    const = (mu + 1) * log_rate - math.log(sigma + d) - specialfn.log_gamma(mu + 1)
    kern, t = _log_kernel(gen, xs, mu, log_rate)
    out = const + kern + (np.log1p(t) if d else 0.0)
    out = np.where(inside, out, -np.inf)
    return float(out) if out.ndim == 0 else out


def pdf(gen: Generator, params: ModelParams, x):
    """Density ``f(x)``; 0 outside the domain.

    Raises
    ------
    RangeError
        If the density is not finite at ``x`` (e.g. a pole at the domain edge).
    """
    with np.errstate(over="ignore"):
        out = np.exp(log_pdf(gen, params, x))
    if np.any(np.isinf(out)):
        raise RangeError("density is not finite at the requested point")
    return out


def mixture_components(gen: Generator, params: ModelParams, x):
    """Return ``(f1, f2, weight)`` with ``pdf = (1-weight)*f1 + weight*f2``.

    ``f_j`` is the density of ``T^{-1}(Z_j)`` with
    ``Z_j ~ Gamma(mu + j - 1, scale=1/(mu*sigma))``.
    """
    x, inside, xs = _prepare(gen, x)
    mu, sigma = params.mu, params.sigma
    log_rate = math.log(mu * sigma)
    comps = []
    for j in (1, 2):
        shape = mu + j - 1
        kern, _ = _log_kernel(gen, xs, shape, log_rate)
        logf = shape * log_rate - specialfn.log_gamma(shape) + kern
        f = np.where(inside, np.exp(logf), 0.0)
        comps.append(float(f) if f.ndim == 0 else f)
    return comps[0], comps[1], params.mixing_weight


def pdf_power(gen: Generator, params: ModelParams, p: float, y):
    """Density of ``Y = X**(1/p)`` where ``X`` has density :func:`pdf`."""
    if not (math.isfinite(p) and p > 0):
        raise DomainError(f"power p must be positive, got {p!r}")
    y = np.asarray(y, dtype=float)
    if np.any(~np.isfinite(y)):
        raise DomainError("density arguments must be finite")
    inside = gen.in_domain(y) & (y > 0)
    ys = np.where(inside, y, 1.0)
    with np.errstate(over="ignore"):
        logf = math.log(p) + (p - 1) * np.log(ys) + log_pdf(gen, params, ys**p)
        out = np.where(inside, np.exp(logf), 0.0)
    if np.any(np.isinf(out)):
        raise RangeError("density is not finite at the requested point")
    return float(out) if out.ndim == 0 else out


def sample(gen: Generator, params: ModelParams, n: int, stream: SeedStream) -> np.ndarray:
    """Draw ``n`` observations through the Bernoulli-gamma representation.

    Each draw consumes one uniform (the branch indicator ``B``, drawn even
    when its probability is 0) and then one gamma variate of shape
    ``mu + B``; the vector of ``n`` indicators is drawn before the ``n``
    gamma variates.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"sample size must be a positive integer, got {n!r}")
    n = int(n)
    b = specialfn.bernoulli_variate(params.mixing_weight, stream, size=n)
    z = specialfn.gamma_variate(params.mu + b, 1.0 / (params.mu * params.sigma), stream, size=n)
    return np.asarray(inverse(gen, z), dtype=float).reshape(n)
