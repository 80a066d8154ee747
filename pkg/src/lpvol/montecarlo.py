"""Monte Carlo estimates of sections and projections from their probabilistic forms.

A_{n,p}(a) = G(1+1/p) E 1/|sum_j a_j R_j xi_j|,  xi_j uniform on S^2,
             R_j with density proportional to t^p exp(-t^p) on [0, inf)
P_{n,q}(a) = G(1/q) E|sum_j a_j X_j|,  X_j with density proportional to
             |t|^(p-2) exp(-|t|^p), p = q/(q-1)

Substituting u = t^p turns both radial laws into powers of Gamma variates:
R = G^(1/p) with G ~ Gamma(1 + 1/p) and |X| = G^(1/p) with G ~ Gamma(1/q).
Gamma variates come from the Marsaglia-Tsang squeeze method.

Every substream owns a Philox generator spawned from one SeedSequence, and
substreams are reduced in a fixed order, so results depend only on
(seed, streams, samples).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .exceptions import DomainError
from .kernels import conjugate
from .volumes import Direction

_CHUNK = 1 << 16  # draws per vectorised batch


@dataclass(frozen=True)
class McConfig:
    samples: int = 1_000_000
    seed: int = 0
    streams: int = 4

    def __post_init__(self):
        if self.samples < 1000:
            raise DomainError("at least 1000 samples are required")
        if self.streams < 1:
            raise DomainError("streams must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must be an unsigned 64-bit integer")


@dataclass
class McEstimate:
    mean: float
    std_error: float
    samples: int


def make_generators(seed: int, streams: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(streams)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


# --------------------------------------------------------------------------
# samplers


def gamma_variates(shape: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Gamma(shape, 1) variates by Marsaglia-Tsang, boosted for shape < 1."""
    if shape <= 0:
        raise DomainError("gamma shape must be positive")
    if shape < 1.0:
        boost = rng.random(size) ** (1.0 / shape)
        return gamma_variates(shape + 1.0, size, rng) * boost
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(size)
    filled = 0
    while filled < size:
        need = size - filled
        # acceptance is above 95%, so a small overdraw usually finishes in one pass
        m = int(need * 1.1) + 16
        x = rng.standard_normal(m)
        v = 1.0 + c * x
        ok = v > 0
        x, v = x[ok], v[ok] ** 3
        u = rng.random(x.size)
        x2 = x * x
        accept = u < 1.0 - 0.0331 * x2 * x2
        slow = ~accept
        accept[slow] = np.log(u[slow]) < 0.5 * x2[slow] + d * (1.0 - v[slow] + np.log(v[slow]))
        got = d * v[accept]
        take = min(got.size, need)
        out[filled:filled + take] = got[:take]
        filled += take
    return out


def sample_radial(p: float, rng: np.random.Generator, size: int | None = None):
    """Draws from the density t^p exp(-t^p) / c_p on [0, inf), c_p = G(1+1/p)/p."""
    if not p >= 1.0:
        raise DomainError("p must be >= 1")
    n = 1 if size is None else size
    r = gamma_variates(1.0 + 1.0 / p, n, rng) ** (1.0 / p)
    return float(r[0]) if size is None else r


def sample_signed(q: float, rng: np.random.Generator, size: int | None = None):
    """Symmetric draws from the density |t|^(p-2) exp(-|t|^p) / d_q, d_q = (2/p) G(1/q)."""
    if not 1.0 < q <= 2.0:
        raise DomainError("q must lie in (1, 2]")
    p = conjugate(q)
    n = 1 if size is None else size
    mag = gamma_variates(1.0 / q, n, rng) ** (1.0 / p)
    sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    x = sign * mag
    return float(x[0]) if size is None else x


def sample_sphere3(rng: np.random.Generator, size: int | None = None):
    """Uniform points on the unit sphere in R^3."""
    n = 1 if size is None else size
    g = rng.standard_normal((n, 3))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g[0] if size is None else g


# --------------------------------------------------------------------------
# estimators


def _run(per_draw, mc: McConfig) -> McEstimate:
    """Mean and standard error of ``per_draw(rng, size)`` over all substreams."""
    gens = make_generators(mc.seed, mc.streams)
    base, extra = divmod(mc.samples, mc.streams)
    total = 0.0
    total_sq = 0.0
    for i, rng in enumerate(gens):
        todo = base + (1 if i < extra else 0)
        while todo > 0:
            m = min(todo, _CHUNK)
            y = per_draw(rng, m)
            total += math.fsum(y)
            total_sq += math.fsum(y * y)
            todo -= m
    n = mc.samples
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0) * n / (n - 1)
    return McEstimate(mean, math.sqrt(var / n), n)


def _active(a: Direction):
    coords = a.as_array()
    return coords[coords != 0.0]


def mc_section(n: int, p: float, a: Direction, mc: McConfig = McConfig()) -> McEstimate:
    """Monte Carlo estimate of A_{n,p}(a)."""
    if a.n != n:
        raise DomainError("direction dimension does not match n")
    coef = _active(a)
    scale = specfun.gamma(1.0 + 1.0 / p)

    def per_draw(rng, m):
        acc = np.zeros((m, 3))
        for c in coef:
            acc += (c * sample_radial(p, rng, m))[:, None] * sample_sphere3(rng, m)
        return scale / np.linalg.norm(acc, axis=1)

    return _run(per_draw, mc)


def mc_projection(n: int, q: float, a: Direction, mc: McConfig = McConfig()) -> McEstimate:
    """Monte Carlo estimate of P_{n,q}(a)."""
    if a.n != n:
        raise DomainError("direction dimension does not match n")
    coef = _active(a)
    scale = specfun.gamma(1.0 / q)

    def per_draw(rng, m):
        acc = np.zeros(m)
        for c in coef:
            acc += c * sample_signed(q, rng, m)
        return scale * np.abs(acc)

    return _run(per_draw, mc)
