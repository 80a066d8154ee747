import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpvol import kernels, specfun
from lpvol.exceptions import DomainError
from lpvol.kernels import KernelParams, tail_envelope

mpmath.mp.dps = 30


def _mp_transform(weight, s, upper):
    # cosine transform on [0, upper] split into pieces shorter than a period and the cliff at 1
    pts = sorted(set([0, 0.9, 0.99, 1, 1.01, 1.1] + list(np.arange(0, upper, min(1.0, math.pi / max(s, 1e-9))))
                     + [upper]))
    f = lambda r: mpmath.cos(s * r) * weight(r)
    return float(mpmath.quad(f, [mpmath.mpf(x) for x in pts]))


def gamma_oracle(p, s):
    upper = (80.0) ** (1.0 / p)
    val = _mp_transform(lambda r: mpmath.exp(-r ** p), s, upper)
    return val / float(mpmath.gamma(1 + mpmath.mpf(1) / p))


def delta_oracle(q, s):
    p = q / (q - 1)
    upper = (80.0) ** (1.0 / p)
    val = _mp_transform(lambda r: r ** (p - 2) * mpmath.exp(-r ** p), s, upper)
    return p * val / float(mpmath.gamma(mpmath.mpf(1) / q))


def test_normalisation():
    for p in (1.0, 1.5, 3.0, 26.0, 150.0):
        assert kernels.gamma_kernel(p, 0.0) == pytest.approx(1.0, abs=1e-13)
    for q in (1.2, 4 / 3, 1.5, 2.0):
        assert kernels.delta_kernel(q, 0.0) == pytest.approx(1.0, abs=1e-13)


def test_gaussian_cases():
    s = np.linspace(0, 12, 97)
    np.testing.assert_allclose(kernels.gamma_kernel(2.0, s), np.exp(-s * s / 4), atol=1e-12)
    np.testing.assert_allclose(kernels.delta_kernel(2.0, s), np.exp(-s * s / 4), atol=1e-12)


def test_laplace_case():
    s = np.linspace(0, 30, 61)
    np.testing.assert_allclose(kernels.gamma_kernel(1.0, s), 1 / (1 + s * s), atol=1e-11)


@pytest.mark.parametrize("p", [1.5, 3.0, 4.0, 5.0, 10.0, 26.0, 100.0, 200.0])
@pytest.mark.parametrize("s", [0.3, 1.0, 3.45, 7.0, 20.0])
def test_gamma_against_mpmath(p, s):
    value, err = kernels.gamma_kernel_with_error(p, s)
    ref = gamma_oracle(p, s)
    assert abs(value - ref) <= max(1e-10, 10 * err)


@pytest.mark.parametrize("q", [1.1, 4 / 3, 1.5, 1.6, 1.8, 1.95])
@pytest.mark.parametrize("s", [0.3, 1.0, 48 / 25, 16 / 5, 9.0])
def test_delta_against_mpmath(q, s):
    value, err = kernels.delta_kernel_with_error(q, s)
    ref = delta_oracle(q, s)
    assert abs(value - ref) <= max(1e-10, 10 * err)


def test_complement_keeps_relative_accuracy():
    s = np.array([1e-5, 1e-4, 1e-3])
    comp, _ = kernels.delta_complement_with_error(1.5, s)
    # 1 - delta ~ c s^2 with c = (p / G(1/q)) int r^p exp(-r^p) dr / 2
    p = 3.0
    c = p / specfun.gamma(1 / 1.5) * specfun.gamma(1 + (p + 1) / p) / (p + 1) / 2
    np.testing.assert_allclose(comp / s ** 2, c, rtol=1e-6)


def test_gamma_positive_windows():
    assert kernels.gamma_kernel(4.0, 1.0) > 0
    s = np.linspace(0, 2 * math.pi / 3, 200)
    for p in (2.0, 3.0, 4.0, 10.0, 100.0):
        assert np.all(kernels.gamma_kernel(p, s) > 0)


def test_delta_4_3_values():
    q = 4 / 3
    assert kernels.delta_kernel(q, 48 / 25) > 0.0026
    assert kernels.delta_kernel(q, 16 / 5) > -0.588


def test_series_examples():
    assert kernels.delta_series_partial(4 / 3, 48 / 25, 2) > 0.0026
    assert kernels.delta_series_partial(4 / 3, 16 / 5, 4) > -0.588
    assert kernels.delta_series_partial(2.0, 1.0, 10) == pytest.approx(math.exp(-0.25), abs=1e-8)


@pytest.mark.parametrize("q", [4 / 3, 1.5, 2.0])
def test_series_matches_quadrature(q):
    for s in np.linspace(0, 2, 21):
        assert abs(kernels.delta_series_partial(q, s, 25) - kernels.delta_kernel(q, s)) <= 1e-8


@pytest.mark.parametrize("q", [4 / 3, 1.4, 1.5, 1.7, 1.9])
def test_series_partial_sums_are_lower_bounds(q):
    for s in np.linspace(0.1, 16 / 5, 25):
        terms = kernels.series_terms(q, s, 12)
        assert all(t.value > 0 for t in terms[2:])
        exact = kernels.delta_kernel(q, s)
        for m in range(1, 13):
            assert kernels.delta_series_partial(q, s, m) <= exact + 1e-12


def test_series_domain():
    with pytest.raises(DomainError):
        kernels.delta_series_partial(1.5, 4.0, 3)
    with pytest.raises(DomainError):
        kernels.delta_series_partial(1.5, 1.0, 31)


def test_envelope_examples():
    assert tail_envelope("section", KernelParams(p=5.0), 2.0) == pytest.approx(1 / (2 * math.gamma(1.2)))
    assert tail_envelope("projection", KernelParams(q=4 / 3), 10.0, uniform=True) == pytest.approx(0.28)
    assert tail_envelope("projection", KernelParams(q=2.0), 1.0) == pytest.approx(4 / math.sqrt(math.pi))


def test_uniform_projection_constant_dominates():
    for q in np.linspace(4 / 3, 1.999, 60):
        exact = tail_envelope("projection", KernelParams(q=q), 1.0)
        assert exact <= 14 / 5


@pytest.mark.parametrize("p", [2.0, 3.0, 5.0, 10.0, 26.0])
@pytest.mark.parametrize("order", [1, 2, 3])
def test_section_envelope_dominates(p, order):
    s = np.linspace(0.5, 50, 400)
    g = np.abs(kernels.gamma_kernel(p, s))
    assert np.all(g <= tail_envelope("section", KernelParams(p=p), s, order=order) + 1e-9)


@pytest.mark.parametrize("q", [4 / 3, 1.5, 2.0])
@pytest.mark.parametrize("order", [1, 2])
def test_projection_envelope_dominates(q, order):
    s = np.linspace(0.5, 50, 400)
    d = np.abs(kernels.delta_kernel(q, s))
    assert np.all(d <= tail_envelope("projection", KernelParams(q=q), s, order=order) + 1e-9)


def test_gamma4_first_zero():
    s1 = kernels.gamma4_first_zero()
    assert s1 == pytest.approx(3.4535, abs=5e-4)
    assert abs(kernels.gamma_kernel(4.0, s1)) < 1e-8
    assert kernels.gamma_kernel(4.0, 3.4) > 0 > kernels.gamma_kernel(4.0, 3.5)
    assert np.all(kernels.gamma_kernel(4.0, np.arange(0, 3.4501, 0.01)) > 0)
    assert np.all(kernels.gamma_kernel(4.0, np.linspace(0, s1 - 1e-3, 300)) > 0)


@pytest.mark.parametrize("q,s,limit", [(2.0, 1.0, 1e-6), (4 / 3, 2.0, 1e-5), (1.5, 1.0, 1e-5)])
def test_derivative_relation(q, s, limit):
    r = kernels.derivative_relation_residual(q, s, 1e-4)
    assert r <= limit
    assert r <= kernels.derivative_relation_bound(q, 1e-4)


def test_ode_residuals():
    assert kernels.gamma_even_ode_residual(1, 1.0, 1e-4) <= 1e-6
    assert kernels.gamma_even_ode_residual(2, 1.0, 1e-2) <= 1e-3
    assert kernels.gamma_even_ode_residual(2, 3.0, 1e-2) <= 1e-3
    with pytest.raises(DomainError):
        kernels.gamma_even_ode_residual(3, 1.0, 1e-2)


def test_params():
    kp = KernelParams(q=1.5)
    assert kp.p == pytest.approx(3.0)
    assert 1 / kp.p + 1 / kp.q == pytest.approx(1.0, abs=1e-12)
    assert KernelParams(p=4.0).q == pytest.approx(4 / 3)
    with pytest.raises(DomainError):
        KernelParams(p=3.0, q=1.6)
    with pytest.raises(DomainError):
        KernelParams(q=2.5)
    with pytest.raises(DomainError):
        KernelParams(p=0.5)
    with pytest.raises(DomainError):
        kernels.delta_kernel(1.0, 1.0)


@given(st.floats(1.0, 60.0), st.floats(0.0, 40.0))
@settings(max_examples=60, deadline=None)
def test_section_kernel_bounded(p, s):
    g = kernels.gamma_kernel(p, s)
    assert abs(g) <= 1 + 1e-12
    if s > 0:
        assert abs(g) <= tail_envelope("section", KernelParams(p=p), s) + 1e-9


@given(st.floats(1.05, 2.0), st.floats(0.0, 40.0))
@settings(max_examples=60, deadline=None)
def test_projection_kernel_bounded(q, s):
    d = kernels.delta_kernel(q, s)
    assert abs(d) <= 1 + 1e-12
    if s > 0:
        assert abs(d) <= tail_envelope("projection", KernelParams(q=q), s) + 1e-9
