"""Critical exponents, pointwise checks of inequality constants, and crossover scans."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels, specfun
from .exceptions import BracketError, DomainError
from .quadrature import QuadConfig
from .volumes import (VOLUME_CONFIG, Direction, closed_form_a2, projection_ratio,
                      section_ratio, volume)

LN2 = math.log(2.0)
M_CEILING = 0.86326
MARGIN_FLOOR = -1e-9


# --------------------------------------------------------------------------
# the Gamma-function ratios and the factors of their derivatives


def section_f(p: float) -> float:
    """G(1 + 3/p) / G(1 + 1/p)."""
    return math.exp(specfun.log_gamma(1.0 + 3.0 / p) - specfun.log_gamma(1.0 + 1.0 / p))


def section_f_factor(p: float) -> float:
    """Psi(1 + 1/p) - 3 Psi(1 + 3/p); same sign as the p-derivative of section_f."""
    return specfun.digamma(1.0 + 1.0 / p) - 3.0 * specfun.digamma(1.0 + 3.0 / p)


def section_g_factor(p: float) -> float:
    """Psi(1 + 3/p) - Psi(1 + 1/p) - (2/3) ln 2; same sign as the derivative of section_ratio."""
    return specfun.digamma(1.0 + 3.0 / p) - specfun.digamma(1.0 + 1.0 / p) - 2.0 * LN2 / 3.0


def projection_f(q: float) -> float:
    """G(2 - 1/q) / G(1/q)."""
    return math.exp(specfun.log_gamma(2.0 - 1.0 / q) - specfun.log_gamma(1.0 / q))


def projection_g_factor(q: float) -> float:
    """Psi(2 - 1/q) - Psi(1/q) - 2 ln 2; same sign as the derivative of projection_ratio."""
    return specfun.digamma(2.0 - 1.0 / q) - specfun.digamma(1.0 / q) - 2.0 * LN2


def section_ratio_derivative(p: float) -> float:
    """Analytic d/dp of section_ratio."""
    return 1.5 * section_ratio(p) / (p * p) * section_g_factor(p)


def projection_ratio_derivative(q: float) -> float:
    """Analytic d/dq of projection_ratio."""
    return projection_ratio(q) / (2.0 * q * q) * projection_g_factor(q)


def central_difference(fn, x: float, h: float = 1e-5) -> float:
    return (fn(x + h) - fn(x - h)) / (2.0 * h)


# --------------------------------------------------------------------------
# critical exponents


def bisect(fn, lo: float, hi: float, width: float = 1e-10, max_iter: int = 200):
    """Root of ``fn`` in [lo, hi] by bisection; returns (root, (lo, hi))."""
    f_lo, f_hi = fn(lo), fn(hi)
    if f_lo == 0.0:
        return lo, (lo, lo)
    if f_hi == 0.0:
        return hi, (hi, hi)
    if (f_lo > 0) == (f_hi > 0):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f = {f_lo}, {f_hi}")
    for _ in range(max_iter):
        if hi - lo <= width:
            break
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if f_mid == 0.0:
            return mid, (mid, mid)
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi), (lo, hi)


@dataclass
class CriticalExponents:
    p0: float
    p1_section: float
    q1_projection: float
    f_min_location: float
    residuals: dict
    brackets: dict

    def as_dict(self) -> dict:
        return {
            "p0": self.p0,
            "p1_section": self.p1_section,
            "q1_projection": self.q1_projection,
            "f_min_location": self.f_min_location,
            "residuals": self.residuals,
            "brackets": {k: list(v) for k, v in self.brackets.items()},
        }


def critical_exponents(width: float = 1e-10) -> CriticalExponents:
    """p0 (section_ratio = 1), p1 (its maximum), q1 (projection_ratio minimum), and the minimum of section_f."""
    p0, b0 = bisect(lambda p: section_ratio(p) - 1.0, 26.0, 27.0, width)
    p1, b1 = bisect(section_g_factor, 4.0, 5.0, width)
    q1, bq = bisect(projection_g_factor, 1.0, 2.0, width)
    pf, bf = bisect(section_f_factor, 9.0, 10.0, width)
    residuals = {
        "p0": abs(section_ratio(p0) - 1.0),
        "p1_section": abs(section_g_factor(p1)),
        "q1_projection": abs(projection_g_factor(q1)),
        "f_min_location": abs(section_f_factor(pf)),
    }
    brackets = {"p0": b0, "p1_section": b1, "q1_projection": bq, "f_min_location": bf}
    return CriticalExponents(p0, p1, q1, pf, residuals, brackets)


# --------------------------------------------------------------------------
# theorem thresholds


def theorem_threshold(kind: str, index: float, p0: float | None = None) -> float:
    """Dimension beyond which the diagonal provably beats a^(2)."""
    if kind == "section":
        if p0 is None:
            p0 = critical_exponents().p0
        if not 2.0 < index < p0:
            raise DomainError(f"section threshold needs 2 < p < p0 = {p0}")
        if index >= 5.0:
            return 650.0 / (p0 - index)
        return 65.0 / (index - 2.0)
    if kind == "projection":
        q = index
        if not 4.0 / 3.0 < q < 2.0:
            raise DomainError("projection threshold needs 4/3 < q < 2")
        return (32.0 / 15.0) / (q - 4.0 / 3.0) + (24.0 / 5.0) / (2.0 - q)
    raise DomainError(f"unknown kind {kind!r}")


def coarse_projection_threshold(q: float) -> float:
    """The simpler bound 5 (1/(q - 4/3) + 1/(2 - q)), never below theorem_threshold."""
    return 5.0 * (1.0 / (q - 4.0 / 3.0) + 1.0 / (2.0 - q))


def meets_threshold(kind: str, index: float, n: int, p0: float) -> bool:
    """Whether n meets the sufficient dimension condition (>= in the section case a)."""
    t = theorem_threshold(kind, index, p0)
    if kind == "section" and index >= 5.0:
        return n >= t
    return n > t


# --------------------------------------------------------------------------
# pointwise checks of the inequality constants


@dataclass
class LemmaReport:
    lemma_id: str
    description: str
    grid: list
    worst_margin: float
    worst_at: object = None
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = bool(self.worst_margin >= MARGIN_FLOOR)


def _grid(lo, hi, density, open_lo=False, open_hi=False):
    n = max(int(math.ceil((hi - lo) * density)), 1) + 1
    pts = np.linspace(lo, hi, n)
    if open_lo:
        pts = pts[1:]
    if open_hi:
        pts = pts[:-1]
    return pts


def _report(lemma_id, description, grid, margins):
    margins = np.asarray(margins, dtype=float)
    i = int(np.argmin(margins))
    return LemmaReport(lemma_id, description, list(grid), float(margins[i]), grid[i])


def _section_f_floor(density, _ctx):
    pts = _grid(3.0, 100.0, density)
    return _report("section_f_floor", "G(1+3/p)/G(1+1/p) >= 0.9429 for p in [3, 100]",
                   [float(p) for p in pts], [section_f(p) - 0.9429 for p in pts])


def _section_g_floor_near_p0(density, ctx):
    p0 = ctx["p0"]
    pts = _grid(5.0, p0, density)
    return _report("section_g_floor_near_p0", "g(p) >= 1 + (p0 - p)/1317 for p in [5, p0]",
                   [float(p) for p in pts],
                   [section_ratio(p) - 1.0 - (p0 - p) / 1317.0 for p in pts])


def _section_g_floor_4_5(density, _ctx):
    pts = _grid(4.0, 5.0, density)
    return _report("section_g_floor_4_5", "g(p) > 25/24 for p in [4, 5]", [float(p) for p in pts],
                   [section_ratio(p) - 25.0 / 24.0 for p in pts])


def _section_g_floor_near_2(density, _ctx):
    pts = _grid(2.0, 4.0, density)
    return _report("section_g_floor_near_2", "g(p) >= 1 + (p - 2)/44 for p in [2, 4]", [float(p) for p in pts],
                   [section_ratio(p) - 1.0 - (p - 2.0) / 44.0 for p in pts])


SINC_PS = (2.0, 3.0, 5.0, 10.0, 100.0)


def _sinc_deviation(density, ctx):
    s = _grid(0.0, 20.0, density, open_lo=True)
    grid, margins = [], []
    for p in SINC_PS:
        g, e = kernels.gamma_kernel_with_error(p, s, ctx["kernel_config"])
        dev = np.abs(np.sinc(s / math.pi) - specfun.gamma(1.0 + 1.0 / p) * g)
        margins.extend(0.3926 - dev - e)
        grid.extend((p, float(x)) for x in s)
    return _report("sinc_deviation", "|sinc(s) - int cos(sr) exp(-r^p) dr| <= 0.3926", grid, margins)


def _gamma_positive_window(density, ctx):
    s = _grid(0.0, 2.0 * math.pi / 3.0, density)
    grid, margins = [], []
    for p in SINC_PS:
        g, e = kernels.gamma_kernel_with_error(p, s, ctx["kernel_config"])
        margins.extend(g - e)
        grid.extend((p, float(x)) for x in s)
    # strict positivity: a zero margin would be a failure
    margins = [m if m > 0 else min(m, -1.0) for m in margins]
    return _report("gamma_positive_window", "gamma_p(s) > 0 for s in [0, 2 pi/3]", grid, margins)


def _projection_f_at_4_3(_density, _ctx):
    val = projection_f(4.0 / 3.0)
    return _report("projection_f_at_4_3", "G(5/4)/G(3/4) <= 0.7397", [4.0 / 3.0], [0.7397 - val])


def _projection_f_shape(density, _ctx):
    pts = _grid(1.0, 2.0, density)
    vals = np.array([projection_f(q) for q in pts])
    margins = list(-np.diff(vals))  # decreasing
    margins.append(-abs(vals[0] - 1.0) + 1e-13)
    margins.append(-abs(vals[-1] - 0.5) + 1e-13)
    return _report("projection_f_shape", "f decreasing on [1, 2], f(1) = 1, f(2) = 1/2",
                   [float(q) for q in pts[1:]] + [1.0, 2.0], margins)


def _projection_g_ceiling(density, _ctx):
    pts = _grid(4.0 / 3.0, 2.0, density, open_lo=True, open_hi=True)
    margins = [1.0 - M_CEILING * (1.0 / q - 0.5) * (0.75 - 1.0 / q) - projection_ratio(q) for q in pts]
    return _report("projection_g_ceiling", "g(q) <= 1 - M (1/q - 1/2)(3/4 - 1/q), M = 0.86326",
                   [float(q) for q in pts], margins)


MONOTONE_QS = (4.0 / 3.0, 1.5, 1.8, 2.0)


def _delta_monotone_window(density, ctx):
    s = _grid(0.0, 16.0 / 5.0, density)
    cfg = ctx["kernel_config"]
    low, low_e = kernels.delta_kernel_with_error(4.0 / 3.0, s, cfg)
    high = np.exp(-s * s / 4.0)
    grid, margins = [], []
    for q in MONOTONE_QS:
        d, e = kernels.delta_kernel_with_error(q, s, cfg)
        margins.extend(np.minimum(d - low + e + low_e, high + 1e-8 - d + e))
        grid.extend((q, float(x)) for x in s)
    return _report("delta_monotone_window", "delta_4/3(s) <= delta_q(s) <= exp(-s^2/4) on [0, 16/5]",
                   grid, margins)


def _delta_4_3_values(_density, ctx):
    cfg = ctx["kernel_config"]
    d1, e1 = kernels.delta_kernel_with_error(4.0 / 3.0, 48.0 / 25.0, cfg)
    d2, e2 = kernels.delta_kernel_with_error(4.0 / 3.0, 16.0 / 5.0, cfg)
    s1 = kernels.delta_series_partial(4.0 / 3.0, 48.0 / 25.0, 2)
    s2 = kernels.delta_series_partial(4.0 / 3.0, 16.0 / 5.0, 4)
    margins = [d1 - e1 - 0.0026, s1 - 0.0026, d2 - e2 + 0.588, s2 + 0.588]
    grid = ["delta(48/25)", "series m=2 at 48/25", "delta(16/5)", "series m=4 at 16/5"]
    return _report("delta_4_3_values", "delta_4/3(48/25) > 0.0026 and delta_4/3(16/5) > -0.588",
                   grid, margins)


WINDOW_QS = (4.0 / 3.0, 1.4, 1.5, 1.6, 1.75, 1.9, 2.0)


def _delta_window_bound(density, ctx):
    s = _grid(48.0 / 25.0, 16.0 / 5.0, density)
    grid, margins = [], []
    for q in WINDOW_QS:
        d, e = kernels.delta_kernel_with_error(q, s, ctx["kernel_config"])
        margins.extend(0.588 - np.abs(d) - e)
        grid.extend((q, float(x)) for x in s)
    return _report("delta_window_bound", "|delta_q(s)| <= 0.588 for s in [48/25, 16/5]", grid, margins)


def _gamma_positive_to_pi(density, ctx):
    # conjectured positivity: reported on request, not part of the default suite
    s = _grid(0.0, math.pi, density)
    grid, margins = [], []
    for p in (1.0, 1.5, 2.0, 3.0, 4.0, 10.0, 50.0, 150.0):
        g, e = kernels.gamma_kernel_with_error(p, s, ctx["kernel_config"])
        margins.extend(g - e)
        grid.extend((p, float(x)) for x in s)
    return _report("gamma_positive_to_pi", "gamma_p(s) > 0 for s in [0, pi], p >= 1", grid, margins)


BOUND_CHECKS = {
    "section_f_floor": _section_f_floor,
    "section_g_floor_near_p0": _section_g_floor_near_p0,
    "section_g_floor_4_5": _section_g_floor_4_5,
    "section_g_floor_near_2": _section_g_floor_near_2,
    "sinc_deviation": _sinc_deviation,
    "gamma_positive_window": _gamma_positive_window,
    "projection_f_at_4_3": _projection_f_at_4_3,
    "projection_f_shape": _projection_f_shape,
    "projection_g_ceiling": _projection_g_ceiling,
    "delta_monotone_window": _delta_monotone_window,
    "delta_4_3_values": _delta_4_3_values,
    "delta_window_bound": _delta_window_bound,
    "gamma_positive_to_pi": _gamma_positive_to_pi,
}
DEFAULT_SUITE = tuple(k for k in BOUND_CHECKS if k != "gamma_positive_to_pi")


@dataclass(frozen=True)
class GridSpec:
    density: float = 50.0  # points per unit length on every continuous axis
    kernel_config: QuadConfig = kernels.KERNEL_CONFIG
    p0: float | None = None

    def __post_init__(self):
        if self.density < 50:
            raise DomainError("grid density must be at least 50 points per unit")


def verify_lemma_bounds(lemma_id: str, grid_spec: GridSpec = GridSpec()) -> LemmaReport:
    """Evaluate one bound pointwise on its grid and report the worst margin."""
    try:
        check = BOUND_CHECKS[lemma_id]
    except KeyError:
        raise DomainError(f"unknown bound id {lemma_id!r}; known: {sorted(BOUND_CHECKS)}") from None
    p0 = grid_spec.p0 if grid_spec.p0 is not None else critical_exponents().p0
    return check(grid_spec.density, {"p0": p0, "kernel_config": grid_spec.kernel_config})


def verify_all(grid_spec: GridSpec = GridSpec(), ids=DEFAULT_SUITE) -> list[LemmaReport]:
    p0 = grid_spec.p0 if grid_spec.p0 is not None else critical_exponents().p0
    spec = GridSpec(grid_spec.density, grid_spec.kernel_config, p0)
    return [verify_lemma_bounds(i, spec) for i in ids]


# --------------------------------------------------------------------------
# crossover scans


@dataclass
class CrossoverRow:
    n: int
    diagonal: float
    a2: float
    margin: float  # positive when the diagonal wins
    err: float

    @property
    def crossed(self) -> bool:
        return self.margin > 3.0 * self.err


@dataclass
class CrossoverReport:
    kind: str
    index: float
    n_theorem: float
    n_empirical: int | None  # None: no sustained crossover found up to n_max
    n_max: int
    per_n: dict  # n -> CrossoverRow
    first_crossing: int | None = None
    theorem_verified: bool = True


def crossover_grid(n_max: int, threshold: float, dense_up_to: int = 120, count: int = 60) -> list[int]:
    ns = set(range(2, min(n_max, dense_up_to) + 1))
    if n_max > dense_up_to:
        ns |= set(np.unique(np.geomspace(dense_up_to, n_max, count).round().astype(int)).tolist())
    if math.isfinite(threshold):
        t = int(math.ceil(threshold))
        ns |= {n for n in range(t - 10, t + 11) if 2 <= n <= n_max}
    ns.add(n_max)
    return sorted(ns)


def _row(kind, index, n, config, a2):
    est = volume(kind, n, index, Direction.diag(n, n), config)
    margin = est.value - a2 if kind == "section" else a2 - est.value
    return CrossoverRow(n, est.value, a2, margin, est.err_estimate)


def crossover_scan(kind: str, index: float, n_max: int, config: QuadConfig = VOLUME_CONFIG,
                   p0: float | None = None, workers: int = 1) -> CrossoverReport:
    """Compare a^(n) against a^(2) over n and locate the empirical crossover.

    The a^(2) volume does not depend on n and is taken from its closed form.
    """
    if not 2 <= n_max <= 5000:
        raise DomainError("n_max must lie in [2, 5000]")
    if p0 is None:
        p0 = critical_exponents().p0
    threshold = theorem_threshold(kind, index, p0)
    a2 = closed_form_a2(kind, index)
    ns = crossover_grid(n_max, threshold)

    def work(n):
        return _row(kind, index, n, config, a2)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(work, ns))
    else:
        rows = [work(n) for n in ns]
    per_n = {r.n: r for r in rows}

    crossed = [r.crossed for r in rows]
    first = next((r.n for r in rows if r.crossed), None)
    sustained = None
    if crossed and crossed[-1]:
        i = len(rows) - 1
        while i > 0 and crossed[i - 1]:
            i -= 1
        sustained = rows[i].n
        # refine inside a grid gap by bisection on n
        lo = rows[i - 1].n if i > 0 else None
        hi = sustained
        while lo is not None and hi - lo > 1:
            mid = (lo + hi) // 2
            r = work(mid)
            per_n[mid] = r
            if r.crossed:
                hi = mid
            else:
                lo = mid
        sustained = hi
    verified = all(r.crossed for r in per_n.values() if meets_threshold(kind, index, r.n, p0))
    return CrossoverReport(kind, index, threshold, sustained, n_max,
                           dict(sorted(per_n.items())), first, verified)
