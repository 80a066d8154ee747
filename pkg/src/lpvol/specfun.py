"""Real special functions on the positive axis.

Gamma and log-Gamma use Stirling's series after an upward shift of the
argument; digamma and trigamma use their asymptotic expansions after the same
shift. Integer zeta values use Euler-Maclaurin summation. Everything is plain
float arithmetic; accuracy is close to double precision on the ranges the rest
of the package needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .exceptions import DomainError

EULER_GAMMA = 0.57721566490153286061

# B_2, B_4, ..., B_20
_BERNOULLI = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
)

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_SHIFT = 15.0  # asymptotic series are summed only for arguments >= this
_GAMMA_MAX = 170.0


@dataclass(frozen=True)
class SpecFunConfig:
    target_rel_error: float = 1e-12
    series_max_terms: int = 10_000

    def __post_init__(self):
        if not 0.0 < self.target_rel_error <= 1e-6:
            raise DomainError("target_rel_error must lie in (0, 1e-6]")
        if self.series_max_terms < 100:
            raise DomainError("series_max_terms must be at least 100")


def _check_positive(x, name):
    x = float(x)
    if not x > 0.0 or math.isinf(x):
        raise DomainError(f"{name} requires a finite positive argument, got {x!r}")
    return x


def _stirling_log_gamma(x):
    # x >= _SHIFT
    inv = 1.0 / x
    inv2 = inv * inv
    series = 0.0
    power = inv
    for k, b in enumerate(_BERNOULLI[:8], start=1):
        series += b / (2 * k * (2 * k - 1)) * power
        power *= inv2
    return (x - 0.5) * math.log(x) - x + _HALF_LOG_2PI + series


def log_gamma(x: float) -> float:
    """Natural logarithm of Gamma(x) for x > 0."""
    x = _check_positive(x, "log_gamma")
    if x >= _SHIFT:
        return _stirling_log_gamma(x)
    # ln G(x) = ln G(x + m) - ln(x (x+1) ... (x+m-1)); the product stays small
    m = int(math.ceil(_SHIFT - x))
    prod = 1.0
    for j in range(m):
        prod *= x + j
    return _stirling_log_gamma(x + m) - math.log(prod)


def gamma(x: float) -> float:
    """Gamma(x) for 0 < x <= 170."""
    x = _check_positive(x, "gamma")
    if x > _GAMMA_MAX:
        raise OverflowError(f"gamma({x}) overflows double precision")
    if x >= _SHIFT:
        return math.exp(_stirling_log_gamma(x))
    m = int(math.ceil(_SHIFT - x))
    prod = 1.0
    for j in range(m):
        prod *= x + j
    return math.exp(_stirling_log_gamma(x + m)) / prod


def digamma(x: float) -> float:
    """Logarithmic derivative of Gamma."""
    x = _check_positive(x, "digamma")
    acc = 0.0
    while x < _SHIFT:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    power = inv2
    for k, b in enumerate(_BERNOULLI[:8], start=1):
        series += b / (2 * k) * power
        power *= inv2
    return acc + math.log(x) - 0.5 / x - series


def trigamma(x: float) -> float:
    """Derivative of the digamma function."""
    x = _check_positive(x, "trigamma")
    acc = 0.0
    while x < _SHIFT:
        acc += 1.0 / (x * x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    series = 0.0
    power = inv * inv2
    for b in _BERNOULLI[:8]:
        series += b * power
        power *= inv2
    return acc + inv + 0.5 * inv2 + series


def zeta_int(k: int) -> float:
    """Riemann zeta at an integer k >= 2 by Euler-Maclaurin summation."""
    if int(k) != k or k < 2:
        raise DomainError(f"zeta_int requires an integer k >= 2, got {k!r}")
    k = int(k)
    n_terms = 12
    head = math.fsum(j ** -float(k) for j in range(1, n_terms))
    big_n = float(n_terms)
    tail = big_n ** (1 - k) / (k - 1) + 0.5 * big_n ** -k
    # sum_j B_2j/(2j)! * k (k+1) ... (k+2j-2) * N^(-k-2j+1)
    rising = float(k)
    fact = 2.0
    for j, b in enumerate(_BERNOULLI[:8], start=1):
        tail += b / fact * rising * big_n ** (-k - 2 * j + 1)
        rising *= (k + 2 * j - 1) * (k + 2 * j)
        fact *= (2 * j + 1) * (2 * j + 2)
    return head + tail
