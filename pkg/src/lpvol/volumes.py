"""Normalised hyperplane sections and projections of l_p^n unit balls.

section A_{n,p}(a) = G(1+1/p) (2/pi) int_0^inf prod_j gamma_p(a_j s) ds
projection P_{n,q}(a) = G(1/q) (2/pi) int_0^inf (1 - prod_j delta_q(a_j s)) / s^2 ds

Coordinates of ``a`` with equal modulus are grouped, so the diagonal
directions a^(k) cost one kernel evaluation per quadrature node whatever k is.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import kernels, specfun
from .exceptions import DomainError
from .kernels import KernelParams
from .quadrature import QuadConfig, integrate_oscillatory_product

VOLUME_CONFIG = QuadConfig(abs_tol=1e-10, rel_tol=1e-8)
P_MAX = 200.0
_SMALL_S = 1e-3


@dataclass(frozen=True)
class Direction:
    """Unit vector in R^n, either explicit or the diagonal family a^(k)."""

    n: int
    coords: tuple | None = None
    k: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("dimension must be positive")
        if (self.coords is None) == (self.k is None):
            raise DomainError("give exactly one of coords or k")
        if self.k is not None:
            if not 1 <= self.k <= self.n:
                raise DomainError(f"diag({self.k}) needs 1 <= k <= n = {self.n}")
        else:
            if len(self.coords) != self.n:
                raise DomainError("coordinate count does not match n")
            norm = math.sqrt(math.fsum(c * c for c in self.coords))
            if abs(norm - 1.0) > 1e-12:
                raise DomainError(f"direction is not a unit vector (norm {norm!r})")

    @classmethod
    def diag(cls, n: int, k: int) -> "Direction":
        return cls(n=n, k=k)

    @classmethod
    def from_vector(cls, values, tol: float = 1e-6) -> "Direction":
        """Explicit direction, renormalised when already within ``tol`` of unit length."""
        v = np.asarray(values, dtype=float)
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > tol:
            raise DomainError(f"vector norm {norm} is not within {tol} of 1")
        return cls(n=v.size, coords=tuple(float(x) for x in v / norm))

    def groups(self) -> list[tuple[float, int]]:
        """Distinct nonzero |a_j| with their multiplicities."""
        if self.k is not None:
            return [(1.0 / math.sqrt(self.k), self.k)]
        counts = Counter(abs(c) for c in self.coords if c != 0.0)
        return sorted(counts.items(), reverse=True)

    def as_array(self) -> np.ndarray:
        if self.k is not None:
            out = np.zeros(self.n)
            out[: self.k] = 1.0 / math.sqrt(self.k)
            return out
        return np.array(self.coords)

    def label(self) -> str:
        if self.k is not None:
            return f"diag:{self.k}"
        return "vec:" + ",".join(f"{c:.17g}" for c in self.coords)


@dataclass
class VolumeEstimate:
    value: float
    err_estimate: float
    method: str  # "quadrature", "closed_form" or "monte_carlo"
    n: int
    index: float
    converged: bool = True
    evals: int = 0
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.err_estimate < 0:
            raise ValueError("err_estimate must be non-negative")


# --------------------------------------------------------------------------
# closed forms


def closed_form_a2(kind: str, index: float) -> float:
    """Normalised volume in direction a^(2): 2^(1/2 - 1/index)."""
    if kind == "section":
        if index == math.inf:
            return math.sqrt(2.0)
        if not index >= 1.0:
            raise DomainError(f"section exponent must be >= 1, got {index}")
    elif kind == "projection":
        if not 1.0 < index <= 2.0:
            raise DomainError(f"projection index must lie in (1, 2], got {index}")
    else:
        raise DomainError(f"unknown kind {kind!r}")
    return 2.0 ** (0.5 - 1.0 / index)


def section_ratio(p: float) -> float:
    """sqrt(3/pi * 2^(2/p) G(1+1/p)^3 / G(1+3/p)); p = inf gives sqrt(3/pi)."""
    if p == math.inf:
        return math.sqrt(3.0 / math.pi)
    log_h = (2.0 / p) * math.log(2.0) + 3.0 * specfun.log_gamma(1.0 + 1.0 / p) \
        - specfun.log_gamma(1.0 + 3.0 / p)
    return math.sqrt(3.0 / math.pi * math.exp(log_h))


def projection_ratio(q: float) -> float:
    """sqrt(2^(2/q) / pi * G(1/q) G(2 - 1/q))."""
    log_h = (2.0 / q) * math.log(2.0) + specfun.log_gamma(1.0 / q) + specfun.log_gamma(2.0 - 1.0 / q)
    return math.sqrt(math.exp(log_h) / math.pi)


def limit_ratio(kind: str, index: float) -> float:
    """Large-n limit of volume(a^(n)) / volume(a^(2))."""
    if kind == "section":
        if not index > 2.0:
            raise DomainError(f"section limit needs p > 2, got {index}")
        return section_ratio(index)
    if kind == "projection":
        if not 1.0 < index <= 2.0:
            raise DomainError(f"projection limit needs q in (1, 2], got {index}")
        return projection_ratio(index)
    raise DomainError(f"unknown kind {kind!r}")


# --------------------------------------------------------------------------
# envelopes of the products


def _diag_tail(coeffs, k, extra_power):
    """int_U^inf min(1, min_j (c_j sqrt(k) / s)^j)^k s^-extra_power ds, as a function of U."""

    def tail(u):
        best = math.inf
        for c, j in coeffs:
            s0 = c * math.sqrt(k)
            e = j * k + extra_power
            if e <= 1:
                continue
            if u >= s0:
                t = math.exp(j * k * math.log(s0) + (1 - e) * math.log(u) - math.log(e - 1))
            elif extra_power == 0:
                t = (s0 - u) + s0 / (e - 1)
            else:
                t = (1.0 / u - 1.0 / s0) + 1.0 / (s0 * (e - 1))
            best = min(best, t)
        return best

    return tail


def _product_envelope(coeffs, groups, extra_power):
    def envelope(s):
        s = np.asarray(s, dtype=float)
        out = np.ones_like(s)
        for a, m in groups:
            x = a * s
            with np.errstate(divide="ignore", over="ignore"):
                single = np.ones_like(s)
                for c, j in coeffs:
                    single = np.minimum(single, (c / x) ** j)
            out = out * single ** m
        return out * s ** -float(extra_power) if extra_power else out

    return envelope


def _check_common(n, a):
    if n < 2:
        raise DomainError("dimension n must be at least 2")
    if a.n != n:
        raise DomainError(f"direction has dimension {a.n}, expected {n}")


# --------------------------------------------------------------------------
# sections


def section_volume(n: int, p: float, a: Direction, config: QuadConfig = VOLUME_CONFIG,
                   kernel_config: QuadConfig = kernels.KERNEL_CONFIG) -> VolumeEstimate:
    """A_{n,p}(a) by quadrature of the gamma_p product."""
    _check_common(n, a)
    if not 1.0 <= p <= P_MAX:
        raise DomainError(f"section exponent must lie in [1, {P_MAX}], got {p}")
    groups = a.groups()
    if len(groups) == 1 and groups[0][1] == 1:
        # coordinate hyperplane: the section is B_p^(n-1) itself
        return VolumeEstimate(1.0, 0.0, "closed_form", n, p)

    def integrand(s):
        value = np.ones_like(s)
        noise = np.zeros_like(s)
        for coef, m in groups:
            g, e = kernels.gamma_kernel_with_error(p, coef * s, kernel_config)
            value = value * g ** m
            # |prod| <= 1 for these kernels, so the product error is additive
            noise = noise + m * e * (np.abs(g) + e) ** (m - 1)
        return np.vstack([value, noise])

    params = KernelParams(p=p)
    coeffs = kernels.envelope_coefficients("section", params)
    envelope = _product_envelope(coeffs, groups, 0)
    tail = _diag_tail(coeffs, a.k, 0) if a.k is not None else None
    norm = specfun.gamma(1.0 + 1.0 / p) * 2.0 / math.pi
    res = integrate_oscillatory_product(integrand, envelope, config.scaled(1.0 / norm),
                                       envelope_tail=tail, integrand_error=True)
    return VolumeEstimate(norm * res.value, norm * res.err_estimate, "quadrature", n, p,
                          res.converged, res.evals,
                          {"upper": res.upper, "truncation": norm * res.truncation,
                           "capped": res.capped})


# --------------------------------------------------------------------------
# projections


def _small_s_patch(q, groups, s0):
    """Integral of (1 - prod delta)/s^2 over [0, s0] from its Taylor expansion."""
    p = kernels.conjugate(q)
    lg = specfun.log_gamma(1.0 - 1.0 / p)
    f1 = math.exp(specfun.log_gamma(1.0 + 1.0 / p) - lg)
    f2 = math.exp(specfun.log_gamma(1.0 + 3.0 / p) - lg)
    a_coef, b_coef = f1 / 2.0, f2 / 24.0
    s4 = math.fsum(m * c ** 4 for c, m in groups)
    c1 = (b_coef - a_coef ** 2 / 2.0) * s4 + a_coef ** 2 / 2.0
    value = a_coef * s0 - c1 * s0 ** 3 / 3.0
    # next Taylor order, bounded generously
    err = (abs(c1) + f2) * s0 ** 5
    return value, err


def projection_volume(n: int, q: float, a: Direction, config: QuadConfig = VOLUME_CONFIG,
                      kernel_config: QuadConfig = kernels.KERNEL_CONFIG) -> VolumeEstimate:
    """P_{n,q}(a) by quadrature of (1 - prod delta_q) / s^2."""
    _check_common(n, a)
    if not 1.0 < q <= 2.0:
        raise DomainError(f"projection index must lie in (1, 2], got {q}")
    groups = a.groups()
    if len(groups) == 1 and groups[0][1] == 1:
        # E|X_1| = 1 / G(1/q)
        return VolumeEstimate(1.0, 0.0, "closed_form", n, q)

    def integrand(s):
        log_prod = np.zeros_like(s)
        direct = np.ones_like(s)
        positive = np.ones(s.shape, bool)
        noise = np.zeros_like(s)
        for coef, m in groups:
            e, err = kernels.delta_complement_with_error(q, coef * s, kernel_config)
            d = 1.0 - e
            positive &= d > 0
            with np.errstate(invalid="ignore", divide="ignore"):
                log_prod = log_prod + m * np.log1p(-np.minimum(e, 1.0))
            direct = direct * d ** m
            noise = noise + m * err * (np.abs(d) + err) ** (m - 1)
        one_minus = np.where(positive, -np.expm1(log_prod), 1.0 - direct)
        inv_s2 = 1.0 / (s * s)
        return np.vstack([one_minus * inv_s2, noise * inv_s2])

    params = KernelParams(q=q)
    coeffs = kernels.envelope_coefficients("projection", params)
    envelope = _product_envelope(coeffs, groups, 2)
    tail = _diag_tail(coeffs, a.k, 2) if a.k is not None else None
    norm = specfun.gamma(1.0 / q) * 2.0 / math.pi
    patch, patch_err = _small_s_patch(q, groups, _SMALL_S)
    res = integrate_oscillatory_product(integrand, envelope, config.scaled(1.0 / norm),
                                       envelope_tail=tail, tail_main=lambda u: 1.0 / u,
                                       lower=_SMALL_S, integrand_error=True)
    value = norm * (res.value + patch)
    err = norm * (res.err_estimate + patch_err)
    return VolumeEstimate(value, err, "quadrature", n, q, res.converged, res.evals,
                          {"upper": res.upper, "truncation": norm * res.truncation,
                           "capped": res.capped})


def volume(kind: str, n: int, index: float, a: Direction, config: QuadConfig = VOLUME_CONFIG):
    if kind == "section":
        return section_volume(n, index, a, config)
    if kind == "projection":
        return projection_volume(n, index, a, config)
    raise DomainError(f"unknown kind {kind!r}")


# --------------------------------------------------------------------------
# scans over the diagonal family


@dataclass
class DiagonalScan:
    kind: str
    n: int
    index: float
    best_k: int
    table: dict  # k -> VolumeEstimate
    tie: bool = False
    tied_with: list = field(default_factory=list)


def scan_ks(n: int, dense_up_to: int = 64, count: int = 40) -> list[int]:
    if n <= dense_up_to:
        return list(range(1, n + 1))
    ks = set(np.unique(np.geomspace(1, n, count).round().astype(int)).tolist())
    ks |= {1, 2, n}
    return sorted(ks)


def diagonal_scan(kind: str, n: int, index: float, config: QuadConfig = VOLUME_CONFIG) -> DiagonalScan:
    """Volumes along a^(k); best is the largest section or the smallest projection."""
    if n < 2:
        raise DomainError("dimension n must be at least 2")
    table = {k: volume(kind, n, index, Direction.diag(n, k), config) for k in scan_ks(n)}
    sign = 1.0 if kind == "section" else -1.0
    top_k = max(table, key=lambda k: sign * table[k].value)
    top = table[top_k]
    # everything indistinguishable from the top within error bars; smallest k wins
    close = [k for k, est in table.items()
             if abs(est.value - top.value) <= est.err_estimate + top.err_estimate]
    best_k = min(close)
    tied = [k for k in close if k != best_k]
    return DiagonalScan(kind, n, index, best_k, table, bool(tied), tied)
