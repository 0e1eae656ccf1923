import math

import numpy as np
import pytest
from scipy import integrate, stats

from wexfam.generators import inverse

TAIL = 1e-15

# criterion lines collected by test_acceptance.py, printed after the run
ACCEPTANCE_LINES = []


def record(number, passed, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def x_window(gen, params, tail=TAIL):
    """Support interval holding all but ~2*tail of the mass of both components."""
    scale = 1.0 / (params.mu * params.sigma)
    z_lo = stats.gamma.ppf(tail, params.mu, scale=scale)
    z_hi = stats.gamma.isf(tail, params.mu + 1, scale=scale)
    xs = np.sort(np.atleast_1d(inverse(gen, np.array([z_lo, z_hi]))))
    return float(xs[0]), float(xs[1])


def integrate_log_space(density, lo, hi, pieces=40):
    """Integrate ``density`` over ``(lo, hi)`` after substituting ``x = exp(u)``."""
    edges = np.linspace(math.log(lo), math.log(hi), pieces + 1)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(lambda u: density(math.exp(u)) * math.exp(u), a, b,
                                epsabs=1e-14, epsrel=1e-12, limit=200)
        total += val
    return total


def quadrature_cdf(density, lo, hi, points=3000):
    """Return a callable CDF on ``(lo, hi)`` built from piecewise quadrature."""
    u = np.linspace(math.log(lo), math.log(hi), points)
    pieces = [
        integrate.quad(lambda t: density(math.exp(t)) * math.exp(t), a, b, epsabs=1e-15)[0]
        for a, b in zip(u[:-1], u[1:])
    ]
    cum = np.concatenate([[0.0], np.cumsum(pieces)])

    def cdf(x):
        return np.interp(np.log(np.asarray(x, dtype=float)), u, cum, left=0.0, right=1.0)

    return cdf


@pytest.fixture
def lindley():
    from wexfam.generators import builtin

    return builtin("weighted_lindley")
