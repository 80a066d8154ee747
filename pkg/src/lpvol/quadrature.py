"""Adaptive Gauss-Kronrod quadrature on finite and semi-infinite ranges.

The engine is globally adaptive: every pass evaluates the integrand on all
freshly bisected panels at once, so integrands should accept a 1-d array of
nodes. An integrand may return either shape ``(N,)`` or ``(M, N)``; in the
second case the M rows are integrated together and a panel is refined while
any row is under-resolved.

Semi-infinite integrals are truncated at a point U where a caller supplied
envelope has a small tail. The tail is either given in closed form or
integrated numerically after the substitution r = U / t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError

# 15-point Kronrod nodes on [-1, 1] (non-negative half) and weights, with the
# embedded 7-point Gauss weights on the odd Kronrod nodes.
_XGK_HALF = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK_HALF = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG_HALF = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

XGK = np.concatenate([-_XGK_HALF, _XGK_HALF[-2::-1]])
WGK = np.concatenate([_WGK_HALF, _WGK_HALF[-2::-1]])
WG = np.zeros(15)
WG[1:15:2] = np.concatenate([_WG_HALF, _WG_HALF[-2::-1]])

_EPS = np.finfo(float).eps
U_CAP = 1.0e3


@dataclass(frozen=True)
class QuadConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 2000
    max_evals: int = 5_000_000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("abs_tol and rel_tol must be positive")
        if self.max_subdivisions < 10:
            raise DomainError("max_subdivisions must be at least 10")

    def scaled(self, factor: float) -> "QuadConfig":
        """Same limits with both tolerances multiplied by ``factor``."""
        return QuadConfig(self.abs_tol * factor, self.rel_tol * factor,
                          self.max_subdivisions, self.max_evals)


@dataclass
class QuadResult:
    value: float
    err_estimate: float
    evals: int
    converged: bool
    upper: float = math.inf  # truncation point actually used
    truncation: float = 0.0  # bound on the discarded tail, included in err_estimate
    capped: bool = False  # truncation point hit U_CAP before the tail was small enough


def _tolerance(cfg, value):
    return np.maximum(cfg.abs_tol, cfg.rel_tol * np.abs(value))


def _eval_panels(f, lo, hi):
    centre = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = centre[:, None] + half[:, None] * XGK[None, :]
    y = np.asarray(f(x.ravel()), dtype=float)
    squeeze = y.ndim == 1
    y = y.reshape((-1, lo.size, 15))
    kron = (y * WGK).sum(axis=-1) * half
    gauss = (y * WG).sum(axis=-1) * half
    roundoff = 50.0 * _EPS * (np.abs(y) * WGK).sum(axis=-1) * np.abs(half)
    err = np.maximum(np.abs(kron - gauss), roundoff)
    return kron, err, squeeze


def integrate_interval(f, a, b, config=QuadConfig(), breakpoints=()):
    """Integrate ``f`` over the finite interval [a, b].

    Returns ``(value, err, evals, converged)`` where value and err are floats
    for scalar integrands and arrays for vector integrands.
    """
    edges = np.unique(np.concatenate([[a, b], [t for t in breakpoints if a < t < b]]))
    lo, hi = edges[:-1].astype(float), edges[1:].astype(float)
    vals, errs, squeeze = _eval_panels(f, lo, hi)
    evals = 15 * lo.size

    done_val = np.zeros(vals.shape[0])
    done_err = np.zeros(vals.shape[0])
    converged = False
    while True:
        total = done_val + vals.sum(axis=1)
        total_err = done_err + errs.sum(axis=1)
        tol = _tolerance(config, total)
        if np.all(total_err <= tol):
            converged = True
            break
        n_panels = lo.size
        if n_panels >= config.max_subdivisions or evals >= config.max_evals:
            break
        # Score panels by their worst error relative to the per-row budget.
        score = (errs / tol[:, None]).max(axis=0)
        order = np.argsort(score)[::-1]
        # Bisect the panels carrying the bulk of the excess error.
        csum = np.cumsum(score[order])
        n_split = int(np.searchsorted(csum, 0.5 * csum[-1])) + 1
        n_split = min(n_split, config.max_subdivisions - n_panels, n_panels)
        split = order[:n_split]
        keep = np.ones(n_panels, bool)
        keep[split] = False
        # Panels far below their share of the budget are frozen to save work.
        share = tol / max(n_panels, 1)
        frozen = keep & np.all(errs < 1e-3 * share[:, None], axis=0)
        done_val += vals[:, frozen].sum(axis=1)
        done_err += errs[:, frozen].sum(axis=1)
        keep &= ~frozen
        mid = 0.5 * (lo[split] + hi[split])
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        nv, ne, _ = _eval_panels(f, new_lo, new_hi)
        evals += 15 * new_lo.size
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        vals = np.concatenate([vals[:, keep], nv], axis=1)
        errs = np.concatenate([errs[:, keep], ne], axis=1)

    value = done_val + vals.sum(axis=1)
    err = done_err + errs.sum(axis=1)
    if squeeze:
        return float(value[0]), float(err[0]), evals, converged
    return value, err, evals, converged


def _numeric_tail(envelope, upper, config):
    """Bound on the integral of ``envelope`` over [upper, inf)."""
    if upper < 1.0:
        cfg = QuadConfig(config.abs_tol * 1e-2, 1e-3, config.max_subdivisions, config.max_evals)
        head, head_err, _, ok = integrate_interval(envelope, upper, 1.0, cfg)
        if not ok:
            return math.inf
        return head + head_err + _numeric_tail(envelope, 1.0, config)

    def transformed(t):
        return envelope(upper / t) * upper / (t * t)

    cfg = QuadConfig(config.abs_tol * 1e-2, 1e-3, config.max_subdivisions, config.max_evals)
    val, err, _, ok = integrate_interval(transformed, 0.0, 1.0, cfg)
    if not ok or not math.isfinite(val):
        return math.inf
    return val + err


def choose_truncation(tail, target, lower=0.0, cap=U_CAP):
    """Smallest U in [lower, cap] (to 0.1% ) with ``tail(U) < target``.

    Returns ``(U, tail(U), capped)``.
    """
    t_cap = tail(cap)
    if not t_cap < target:
        if not math.isfinite(t_cap):
            raise DomainError("envelope tail diverges")
        return cap, t_cap, True
    lo = max(lower, 0.0)
    if tail(lo) < target:
        return lo, tail(lo), False
    hi = cap
    # geometric search then bisection; tail is non-increasing in U
    probe = max(lo, 1.0)
    while probe < cap and not tail(probe) < target:
        lo, probe = probe, probe * 2.0
    hi = min(probe, cap)
    while hi - lo > 1e-3 * hi:
        mid = 0.5 * (lo + hi)
        if tail(mid) < target:
            hi = mid
        else:
            lo = mid
    return hi, tail(hi), False


def _collapse(value, err, integrand_error):
    # row 1 of a two-row integrand carries a pointwise error bound for row 0
    if integrand_error:
        return float(value[0]), float(err[0] + abs(value[1]) + err[1])
    return value, err


def _finish(value, err, evals, ok, upper, trunc, capped, config):
    total_err = err + trunc
    converged = bool(ok and total_err <= max(config.abs_tol, config.rel_tol * abs(value)))
    return QuadResult(float(value), float(total_err), int(evals), converged,
                      float(upper), float(trunc), bool(capped))


def integrate_semi_infinite(f, decay_envelope, config=QuadConfig(), *,
                            envelope_tail=None, lower=0.0, breakpoints=(),
                            integrand_error=False):
    """Integrate ``f`` over [lower, inf) given ``|f| <= decay_envelope``.

    ``envelope_tail(U)`` may give the envelope integral over [U, inf) in
    closed form; otherwise it is integrated numerically. With
    ``integrand_error`` the integrand returns two rows, the value and a
    pointwise bound on its own error, and the integrated bound is added to
    the error estimate.
    """
    if envelope_tail is None:
        def envelope_tail(u):
            return _numeric_tail(decay_envelope, u, config)
    upper, trunc, capped = choose_truncation(envelope_tail, 0.5 * config.abs_tol, lower)
    if upper <= lower:
        return QuadResult(0.0, float(trunc), 0, trunc <= config.abs_tol, lower, trunc, capped)
    inner = config.scaled(0.5)
    value, err, evals, ok = integrate_interval(f, lower, upper, inner, breakpoints)
    value, err = _collapse(value, err, integrand_error)
    return _finish(value, err, evals, ok, upper, trunc, capped, config)


def _sign_change_breakpoints(g, lower, upper, n_probe=64):
    x = np.linspace(lower, upper, n_probe + 1)[1:-1]
    y = np.asarray(g(x), dtype=float)
    if y.ndim > 1:
        y = y[0]
    flips = np.nonzero(np.signbit(y[:-1]) != np.signbit(y[1:]))[0]
    return tuple(0.5 * (x[flips] + x[flips + 1]))


def integrate_oscillatory_product(g, envelope_bound, config=QuadConfig(), *,
                                  envelope_tail=None, tail_main=None, lower=0.0,
                                  half_period=None, integrand_error=False):
    """Integrate a sign-changing ``g`` over [lower, inf).

    Beyond the truncation point U the integrand is split as
    ``g = main + remainder`` where ``tail_main(U)`` is the exact integral of
    the main part (zero when not given) and ``|remainder| <= envelope_bound``.

    When the envelope is not integrable and ``half_period`` is given, the
    integral is instead summed half-period by half-period and the partial sums
    are accelerated by repeated averaging.

    ``integrand_error`` has the same meaning as in integrate_semi_infinite.
    """
    if half_period is not None:
        return _alternating_sum(g, half_period, config, lower)
    if envelope_tail is None:
        def envelope_tail(u):
            return _numeric_tail(envelope_bound, u, config)
    upper, trunc, capped = choose_truncation(envelope_tail, 0.5 * config.abs_tol, lower)
    inner = config.scaled(0.5)
    breaks = _sign_change_breakpoints(g, lower, upper)
    value, err, evals, ok = integrate_interval(g, lower, upper, inner, breaks)
    value, err = _collapse(value, err, integrand_error)
    evals += 62
    if tail_main is not None:
        value += tail_main(upper)
    return _finish(value, err, evals, ok, upper, trunc, capped, config)


def _alternating_sum(g, half_period, config, lower, max_terms=400):
    inner = QuadConfig(config.abs_tol * 1e-2, config.rel_tol * 1e-2,
                       config.max_subdivisions, config.max_evals)
    edges = lower + half_period * np.arange(max_terms + 1)
    partial = []
    total = 0.0
    evals = 0
    estimate = math.nan
    err = math.inf
    block = 16
    for start in range(0, max_terms, block):
        for j in range(start, start + block):
            v, _, n, _ = integrate_interval(g, edges[j], edges[j + 1], inner)
            evals += n
            total += v
            partial.append(total)
        # repeated averaging of consecutive partial sums (Euler transform)
        seq = np.array(partial[-block:])
        prev = None
        while seq.size > 1:
            prev = seq[-1]
            seq = 0.5 * (seq[1:] + seq[:-1])
        new_estimate = seq[0]
        err = abs(new_estimate - prev) if prev is not None else math.inf
        if math.isfinite(estimate):
            err = max(err, abs(new_estimate - estimate))
        estimate = new_estimate
        if err <= max(config.abs_tol, config.rel_tol * abs(estimate)):
            break
    converged = err <= max(config.abs_tol, config.rel_tol * abs(estimate))
    return QuadResult(float(estimate), float(err), evals, bool(converged))
