"""The oscillatory kernels behind the section and projection integrals.

gamma_p(s) = (1 / G(1 + 1/p)) int_0^inf cos(s r) exp(-r^p) dr
delta_q(s) = (p / G(1/q))     int_0^inf cos(s r) r^(p-2) exp(-r^p) dr,  p = q/(q-1)

Both are evaluated by adaptive quadrature in r, vectorised over s. delta_q
also has a Taylor series (valid for moderate s) and a complementary form
1 - delta_q(s) = (p / G(1/q)) int 2 sin^2(s r / 2) r^(p-2) exp(-r^p) dr that
keeps full relative accuracy as s -> 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import specfun
from .exceptions import BracketError, ConvergenceError, DomainError
from .quadrature import QuadConfig, choose_truncation, integrate_interval

KERNEL_CONFIG = QuadConfig(abs_tol=1e-13, rel_tol=1e-11, max_subdivisions=4000,
                           max_evals=20_000_000)
LARGE_P = 50.0
_ROW_CHUNK = 32


@dataclass(frozen=True)
class KernelParams:
    """Section exponent ``p`` and/or projection index ``q``.

    When only one is given the other is filled in as its conjugate.
    """

    p: float | None = None
    q: float | None = None

    def __post_init__(self):
        p, q = self.p, self.q
        if p is None and q is None:
            raise DomainError("KernelParams needs p or q")
        if q is not None and not 1.0 < q <= 2.0:
            raise DomainError(f"projection index q must lie in (1, 2], got {q}")
        if p is None:
            object.__setattr__(self, "p", conjugate(q))
        elif q is None:
            if p > 2.0 or p == 2.0:
                object.__setattr__(self, "q", conjugate(p))
        elif abs(1.0 / p + 1.0 / q - 1.0) > 1e-12:
            raise DomainError(f"p={p} and q={q} are not conjugate")
        if self.p < 1.0:
            raise DomainError(f"section exponent p must be >= 1, got {self.p}")


@dataclass(frozen=True)
class SeriesTerm:
    n: int
    f_2n: float
    f_2n_plus_1: float
    value: float  # F_n(p, s)


def conjugate(x: float) -> float:
    if x == math.inf:
        return 1.0
    if x == 1.0:
        return math.inf
    return x / (x - 1.0)


def _check_q(q):
    if not 1.0 < q <= 2.0:
        raise DomainError(f"projection index q must lie in (1, 2], got {q}")


def _check_p(p):
    if not (p >= 1.0 and math.isfinite(p)):
        raise DomainError(f"section exponent p must be a finite number >= 1, got {p}")


# --------------------------------------------------------------------------
# core quadrature in r


def _weight_tail_bound(kind, p):
    """Closed-form bound on the weight integral over [U, inf), U >= 1."""
    if kind == "gamma":
        return lambda u: math.exp(-u ** p) / (p * u ** (p - 1.0)) if u >= 1.0 else math.inf
    return lambda u: math.exp(-u ** p) / (p * u) if u >= 1.0 else math.inf


def _cosine_transform(kind, p, s, config, complement=False):
    """int_0^inf cos(s r) w(r) dr for each s (or int 2 sin^2(s r/2) w(r) dr).

    w(r) = exp(-r^p) for kind "gamma", r^(p-2) exp(-r^p) for kind "delta".
    Returns unnormalised values and error estimates.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    out_v = np.empty_like(s)
    out_e = np.empty_like(s)
    order = np.argsort(s)
    for start in range(0, s.size, _ROW_CHUNK):
        idx = order[start:start + _ROW_CHUNK]
        v, e = _transform_rows(kind, p, s[idx], config, complement)
        out_v[idx] = v
        out_e[idx] = e
    return out_v, out_e


def _osc(sv, r, complement):
    arg = np.multiply.outer(sv, r)
    if complement:
        half = np.sin(0.5 * arg)
        return 2.0 * half * half
    return np.cos(arg)


def _transform_rows(kind, p, sv, config, complement):
    tol_cfg = config.scaled(0.5)
    if p > LARGE_P:
        return _transform_rows_large_p(kind, p, sv, tol_cfg, complement)

    if kind == "gamma":
        def weight(r):
            return np.exp(-r ** p)
    else:
        def weight(r):
            return r ** (p - 2.0) * np.exp(-r ** p)

    def integrand(r):
        return _osc(sv, r, complement) * weight(r)

    upper, trunc, _ = choose_truncation(_weight_tail_bound(kind, p),
                                        0.25 * config.abs_tol, lower=1.0, cap=1e3)
    if complement:
        trunc *= 2.0
    # one breakpoint per few oscillations keeps the first pass well resolved
    smax = float(np.max(np.abs(sv))) if sv.size else 0.0
    n_cut = int(min(2000, max(1, smax * upper / (2 * math.pi))))
    breaks = tuple(np.linspace(0.0, upper, n_cut + 1)[1:-1]) + ((1.0,) if upper > 1.0 else ())
    val, err, _, ok = integrate_interval(integrand, 0.0, upper, tol_cfg, breaks)
    if not ok:
        raise ConvergenceError(f"{kind} kernel quadrature did not converge (p={p})")
    return np.atleast_1d(val), np.atleast_1d(err) + trunc


def _transform_rows_large_p(kind, p, sv, cfg, complement):
    # [0, 1]: weight is nearly an indicator with a cliff just below r = 1
    if kind == "gamma":
        def weight(r):
            return np.exp(-r ** p)
    else:
        def weight(r):
            return r ** (p - 2.0) * np.exp(-r ** p)

    def head(r):
        return _osc(sv, r, complement) * weight(r)

    cliff = tuple(1.0 - np.array([8.0, 4.0, 2.0, 1.0, 0.5]) / p)
    smax = float(np.max(np.abs(sv))) if sv.size else 0.0
    n_cut = int(min(2000, max(1, smax / (2 * math.pi))))
    breaks = tuple(np.linspace(0.0, 1.0, n_cut + 1)[1:-1]) + cliff
    v1, e1, _, ok1 = integrate_interval(head, 0.0, 1.0, cfg.scaled(0.5), breaks)

    # [1, inf): u = r^p, dr = (1/p) u^(1/p - 1) du
    exponent = (1.0 / p - 1.0) if kind == "gamma" else -1.0 / p

    def tail(u):
        r = u ** (1.0 / p)
        return _osc(sv, r, complement) * (u ** exponent * np.exp(-u) / p)

    upper = 1.0 + math.log(1.0 / (cfg.abs_tol * 0.25 * p)) + 5.0
    trunc = math.exp(-upper) / p * (2.0 if complement else 1.0)
    v2, e2, _, ok2 = integrate_interval(tail, 1.0, upper, cfg.scaled(0.5))
    if not (ok1 and ok2):
        raise ConvergenceError(f"{kind} kernel quadrature did not converge (p={p})")
    return np.atleast_1d(v1 + v2), np.atleast_1d(e1 + e2) + trunc


# --------------------------------------------------------------------------
# public kernels


def gamma_kernel_with_error(p, s, config=KERNEL_CONFIG):
    """gamma_p at ``s`` (scalar or array) together with absolute error bounds."""
    _check_p(p)
    s_arr = np.abs(np.atleast_1d(np.asarray(s, dtype=float)))
    norm = specfun.gamma(1.0 + 1.0 / p)
    cfg = config.scaled(norm)
    vals = np.ones_like(s_arr)
    errs = np.zeros_like(s_arr)
    nz = s_arr != 0.0
    if np.any(nz):
        v, e = _cosine_transform("gamma", p, s_arr[nz], cfg)
        vals[nz] = v / norm
        errs[nz] = e / norm
    if np.ndim(s) == 0:
        return float(vals[0]), float(errs[0])
    return vals, errs


def gamma_kernel(p, s, config=KERNEL_CONFIG):
    """gamma_p(s); ``s`` may be an array. gamma_p(0) = 1 exactly."""
    return gamma_kernel_with_error(p, s, config)[0]


def _delta_norm(q):
    p = conjugate(q)
    return p, p / specfun.gamma(1.0 / q)


def delta_kernel_with_error(q, s, config=KERNEL_CONFIG):
    """delta_q at ``s`` (scalar or array) together with absolute error bounds."""
    _check_q(q)
    p, norm = _delta_norm(q)
    s_arr = np.abs(np.atleast_1d(np.asarray(s, dtype=float)))
    cfg = config.scaled(1.0 / norm)
    vals = np.ones_like(s_arr)
    errs = np.zeros_like(s_arr)
    nz = s_arr != 0.0
    if np.any(nz):
        v, e = _cosine_transform("delta", p, s_arr[nz], cfg)
        vals[nz] = v * norm
        errs[nz] = e * norm
    if np.ndim(s) == 0:
        return float(vals[0]), float(errs[0])
    return vals, errs


def delta_kernel(q, s, config=KERNEL_CONFIG):
    """delta_q(s); ``s`` may be an array. delta_q(0) = 1 exactly."""
    return delta_kernel_with_error(q, s, config)[0]


def delta_complement_with_error(q, s, config=KERNEL_CONFIG):
    """1 - delta_q(s) with relative accuracy near s = 0."""
    _check_q(q)
    p, norm = _delta_norm(q)
    s_arr = np.abs(np.atleast_1d(np.asarray(s, dtype=float)))
    # relative tolerance drives the accuracy; the absolute floor is negligible
    cfg = QuadConfig(1e-30, config.rel_tol, config.max_subdivisions, config.max_evals)
    vals = np.zeros_like(s_arr)
    errs = np.zeros_like(s_arr)
    nz = s_arr != 0.0
    if np.any(nz):
        v, e = _cosine_transform("delta", p, s_arr[nz], cfg, complement=True)
        vals[nz] = v * norm
        errs[nz] = e * norm
    if np.ndim(s) == 0:
        return float(vals[0]), float(errs[0])
    return vals, errs


# --------------------------------------------------------------------------
# Taylor series of delta_q


def series_terms(q, s, m):
    """Paired Taylor terms F_0 .. F_m of delta_q at s."""
    _check_q(q)
    if not 0 <= m <= 30:
        raise DomainError("series order m must lie in [0, 30]")
    if not 0.0 <= s <= 16.0 / 5.0:
        raise DomainError("the series is used only for 0 <= s <= 16/5")
    p = conjugate(q)
    lg_base = specfun.log_gamma(1.0 - 1.0 / p)
    log_s = math.log(s) if s > 0 else -math.inf
    terms = []
    for n in range(m + 1):
        f_even = math.exp(specfun.log_gamma(1.0 + (4 * n - 1) / p) - lg_base)
        f_odd = math.exp(specfun.log_gamma(1.0 + (4 * n + 1) / p) - lg_base)
        if s == 0.0:
            even = 1.0 if n == 0 else 0.0
            odd = 0.0
        else:
            even = math.exp(4 * n * log_s - math.lgamma(4 * n + 1))
            odd = math.exp((4 * n + 2) * log_s - math.lgamma(4 * n + 3))
        terms.append(SeriesTerm(n, f_even, f_odd, f_even * even - f_odd * odd))
    return terms


def delta_series_partial(q, s, m):
    """Partial sum F_0 + ... + F_m of the Taylor series of delta_q."""
    return math.fsum(t.value for t in series_terms(q, s, m))


# --------------------------------------------------------------------------
# decay envelopes


def _tv_on_grid(fn, p):
    # fn is evaluated in u = r^p on a log grid covering where the weights live
    u = np.concatenate([np.geomspace(1e-12, 1.0, 20000), np.linspace(1.0, 60.0, 20000)[1:]])
    r = u ** (1.0 / p)
    y = fn(r, u)
    return float(np.sum(np.abs(np.diff(y)))) + abs(float(y[0])) + abs(float(y[-1]))


@lru_cache(maxsize=256)
def _section_constants(p):
    # total variations of w' and w'' for w(r) = exp(-r^p)
    tv1 = _tv_on_grid(lambda r, u: -p * u / r * np.exp(-u), p)
    tv2 = math.inf
    if p >= 2.0:
        # w'' = p u r^-2 exp(-u) (p u - (p - 1))
        tv2 = _tv_on_grid(lambda r, u: p * u / (r * r) * np.exp(-u) * (p * u - (p - 1.0)), p)
    return 1.001 * tv1, 1.001 * tv2


@lru_cache(maxsize=256)
def _projection_constants(p):
    # |v'(0)| + TV(v') for v(r) = r^(p-2) exp(-r^p); finite only if p == 2 or p >= 3
    if not (p == 2.0 or p >= 3.0):
        return math.inf
    # v' = r^(p-3) exp(-u) ((p - 2) - p u)
    tv = _tv_on_grid(lambda r, u: r ** (p - 3.0) * np.exp(-u) * ((p - 2.0) - p * u), p)
    return 1.001 * tv


@np.errstate(divide="ignore", over="ignore")  # s -> 0 gives an infinite bound
def tail_envelope(kind, params: KernelParams, s, order=1, uniform=False):
    """Upper bound for |gamma_p(s)| (kind "section") or |delta_q(s)| ("projection").

    ``order=1`` is the bound obtained from one integration by parts; higher
    orders integrate by parts again and decay like s^-order where the weight
    is smooth enough at r = 0, falling back to lower orders otherwise.
    ``uniform`` replaces the projection constant by its value 14/5 valid for
    all q in [4/3, 2).
    """
    s = np.asarray(s, dtype=float)
    if kind == "section":
        p = params.p
        g = specfun.gamma(1.0 + 1.0 / p)
        bound = 1.0 / (s * g)
        if order >= 2 and p > 1.0:
            tv1, tv2 = _section_constants(p)
            bound = np.minimum(bound, tv1 / (g * s ** 2))
            if order >= 3 and math.isfinite(tv2):
                bound = np.minimum(bound, tv2 / (g * s ** 3))
    elif kind == "projection":
        if params.q is None:
            raise DomainError("projection envelope needs q")
        q = params.q
        p = conjugate(q)
        if uniform:
            bound = (14.0 / 5.0) / s
        else:
            expo = 1.0 - 2.0 / p
            const = 2.0 * p / specfun.gamma(1.0 / q) * (expo / math.e) ** expo
            bound = const / s
            if order >= 2:
                c2 = _projection_constants(p)
                if math.isfinite(c2):
                    norm = p / specfun.gamma(1.0 / q)
                    bound = np.minimum(bound, norm * c2 / s ** 2)
    else:
        raise DomainError(f"unknown kernel kind {kind!r}")
    return float(bound) if bound.ndim == 0 else bound


def envelope_coefficients(kind, params: KernelParams):
    """``[(C_m, m), ...]`` such that |kernel(s)| <= min_m (C_m / s)^m."""
    if kind == "section":
        p = params.p
        g = specfun.gamma(1.0 + 1.0 / p)
        coeffs = [(1.0 / g, 1)]
        if p > 1.0:
            tv1, tv2 = _section_constants(p)
            coeffs.append(((tv1 / g) ** 0.5, 2))
            if math.isfinite(tv2):
                coeffs.append(((tv2 / g) ** (1.0 / 3.0), 3))
        return coeffs
    q = params.q
    p = conjugate(q)
    expo = 1.0 - 2.0 / p
    coeffs = [(2.0 * p / specfun.gamma(1.0 / q) * (expo / math.e) ** expo, 1)]
    c2 = _projection_constants(p)
    if math.isfinite(c2):
        coeffs.append(((p / specfun.gamma(1.0 / q) * c2) ** 0.5, 2))
    return coeffs


# --------------------------------------------------------------------------
# zeros and differential identities


def gamma4_first_zero(config=KERNEL_CONFIG, scan_to=8.0, step=0.05, iterations=60):
    """First positive zero of gamma_4 by a coarse scan and bisection."""
    grid = np.arange(0.0, scan_to + step, step)
    vals = gamma_kernel(4.0, grid, config)
    flips = np.nonzero((vals[:-1] > 0) & (vals[1:] <= 0))[0]
    if flips.size == 0:
        raise BracketError("no sign change of gamma_4 found")
    lo, hi = float(grid[flips[0]]), float(grid[flips[0] + 1])
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if gamma_kernel(4.0, mid, config) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _moment(p, m):
    # int_0^inf r^m exp(-r^p) dr
    return specfun.gamma(1.0 + (m + 1.0) / p) / (m + 1.0)


def derivative_relation_residual(q, s, h, config=KERNEL_CONFIG):
    """|centred difference of delta_q at s + G(1+1/p)/G(1-1/p) s gamma_p(s)|."""
    _check_q(q)
    if not 1e-6 <= h <= 1e-3:
        raise DomainError("step h must lie in [1e-6, 1e-3]")
    if s <= 0:
        raise DomainError("s must be positive")
    p = conjugate(q)
    d_plus, d_minus = delta_kernel(q, np.array([s + h, s - h]), config)
    fd = (d_plus - d_minus) / (2.0 * h)
    ratio = specfun.gamma(1.0 + 1.0 / p) / specfun.gamma(1.0 - 1.0 / p)
    return abs(fd + ratio * s * gamma_kernel(p, s, config))


def derivative_relation_bound(q, h, config=KERNEL_CONFIG):
    """C h^2 + 10 * quadrature tolerance for the residual above.

    C = sup |delta_q'''| / 6 <= (p / G(1/q)) int r^(p+1) exp(-r^p) dr / 6.
    """
    p = conjugate(q)
    c = p / specfun.gamma(1.0 / q) * _moment(p, p + 1.0) / 6.0
    return c * h * h + 10.0 * config.abs_tol / h + 10.0 * config.abs_tol


def gamma_even_ode_residual(k, s, h, config=KERNEL_CONFIG):
    """Residual of gamma_2k^(2k-1)(s) = (-1)^k s gamma_2k(s) / (2k).

    k = 1 uses a centred first difference, k = 2 the five-point third
    difference.
    """
    if k not in (1, 2):
        raise DomainError("only k = 1 and k = 2 are supported")
    if not 0.5 <= s <= 3.0:
        raise DomainError("s must lie in [0.5, 3]")
    p = 2.0 * k
    if k == 1:
        gp, gm = gamma_kernel(p, np.array([s + h, s - h]), config)
        deriv = (gp - gm) / (2.0 * h)
    else:
        pts = s + h * np.array([-2.0, -1.0, 1.0, 2.0])
        f = gamma_kernel(p, pts, config)
        deriv = (-f[0] + 2.0 * f[1] - 2.0 * f[2] + f[3]) / (2.0 * h ** 3)
    rhs = (-1) ** k * s * gamma_kernel(p, s, config) / (2.0 * k)
    return abs(deriv - rhs)
