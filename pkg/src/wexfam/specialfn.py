"""Special functions and seeded random variates.

``log_gamma`` and ``digamma`` validate their domain and defer to
:mod:`scipy.special`; variates come from :class:`numpy.random.Generator`
instances addressed by :class:`SeedStream`.
"""

from __future__ import annotations

import numpy as np
import scipy.special as sc

__all__ = [
    "DomainError",
    "SeedStream",
    "log_gamma",
    "digamma",
    "trigamma",
    "gamma_variate",
    "bernoulli_variate",
]


class DomainError(ValueError):
    """An argument lies outside the domain of a function."""


def _positive_finite(x, name):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"{name} must be positive and finite, got {x!r}")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def log_gamma(x):
    """Natural log of the gamma function for ``x > 0`` (scalar or array)."""
    return _out(sc.gammaln(_positive_finite(x, "x")))


def digamma(x):
    """Digamma function psi(x) = d/dx log Gamma(x) for ``x > 0``."""
    return _out(sc.digamma(_positive_finite(x, "x")))


def trigamma(x):
    # only the Newton likelihood oracle needs this
    return _out(sc.polygamma(1, _positive_finite(x, "x")))


class SeedStream:
    """A reproducible source of random variates.

    The stream is identified by ``(master_seed, stream_index)``; equal
    identifiers give identical variate sequences, and distinct indices are
    independent substreams of the same master seed (via
    :class:`numpy.random.SeedSequence` spawn keys, so the mapping does not
    depend on creation order).

    Parameters
    ----------
    master_seed : int
        Non-negative integer, at most 64 bits.
    stream_index : int or tuple of int
        Substream address. A tuple addresses nested substreams, e.g.
        ``(size_index, point_index, replicate)``.
    """

    __slots__ = ("master_seed", "stream_index", "_rng")

    def __init__(self, master_seed: int, stream_index: int | tuple[int, ...] = 0):
        master_seed = int(master_seed)
        if not 0 <= master_seed < 2**64:
            raise DomainError("master_seed must be a 64-bit unsigned integer")
        key = (stream_index,) if np.isscalar(stream_index) else tuple(stream_index)
        key = tuple(int(k) for k in key)
        if any(k < 0 for k in key):
            raise DomainError("stream_index must be non-negative")
        self.master_seed = master_seed
        self.stream_index = key[0] if len(key) == 1 else key
        seq = np.random.SeedSequence(master_seed, spawn_key=key)
        self._rng = np.random.Generator(np.random.PCG64(seq))

    def __repr__(self):
        return f"SeedStream({self.master_seed}, {self.stream_index!r})"

    def child(self, *index: int) -> "SeedStream":
        """Substream of this stream addressed by ``index``."""
        key = self.stream_index if isinstance(self.stream_index, tuple) else (self.stream_index,)
        return SeedStream(self.master_seed, key + tuple(index))

    @property
    def rng(self) -> np.random.Generator:
        return self._rng


def gamma_variate(shape, scale, stream: SeedStream, size=None):
    """Gamma draws with mean ``shape*scale`` and variance ``shape*scale**2``.

    ``shape`` may be an array (broadcast against ``size``); one variate is
    consumed per output element.
    """
    shape = _positive_finite(shape, "shape")
    scale = _positive_finite(scale, "scale")
    out = stream.rng.gamma(shape, scale, size=size)
    return float(out) if np.ndim(out) == 0 else out


def bernoulli_variate(q, stream: SeedStream, size=None):
    """Return 1 with probability ``q`` and 0 otherwise."""
    q = float(q)
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"q must lie in [0, 1], got {q!r}")
    u = stream.rng.random(size=size)
    out = np.asarray(u < q, dtype=np.int64)
    return int(out) if np.ndim(out) == 0 else out
