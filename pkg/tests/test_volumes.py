import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpvol.exceptions import DomainError
from lpvol.montecarlo import McConfig, mc_projection, mc_section
from lpvol.volumes import (Direction, closed_form_a2, diagonal_scan, limit_ratio,
                           projection_volume, scan_ks, section_volume)


def _unit(rng, n):
    v = rng.standard_normal(n)
    return Direction.from_vector(v / np.linalg.norm(v))


def test_direction_validation():
    d = Direction.diag(5, 3)
    np.testing.assert_allclose(d.as_array(), [1 / math.sqrt(3)] * 3 + [0, 0])
    assert d.groups() == [(pytest.approx(1 / math.sqrt(3)), 3)]
    with pytest.raises(DomainError):
        Direction.diag(3, 4)
    with pytest.raises(DomainError):
        Direction.diag(3, 0)
    with pytest.raises(DomainError):
        Direction.from_vector([1.0, 1.0])
    d = Direction.from_vector([0.6, 0.8 + 5e-7])
    assert np.linalg.norm(d.as_array()) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("p", [1.0, 1.5, 3.0, 10.0])
def test_coordinate_section_is_one(p):
    est = section_volume(6, p, Direction.diag(6, 1))
    assert est.value == 1.0
    assert est.method == "closed_form"


@pytest.mark.parametrize("q", [1.2, 1.5, 2.0])
def test_coordinate_projection_is_one(q):
    est = projection_volume(6, q, Direction.diag(6, 1))
    assert est.value == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("n", [5, 50])
@pytest.mark.parametrize("p", [2.5, 3.0, 4.0, 5.0, 10.0, 26.0])
def test_section_a2_closed_form(n, p):
    est = section_volume(n, p, Direction.diag(n, 2))
    assert est.converged
    assert est.value == pytest.approx(2 ** (0.5 - 1 / p), abs=1e-6)
    assert abs(est.value - closed_form_a2("section", p)) <= max(10 * est.err_estimate, 1e-9)


@pytest.mark.parametrize("q", [4 / 3, 1.5, 1.9])
def test_projection_a2_closed_form(q):
    est = projection_volume(7, q, Direction.diag(7, 2))
    assert est.converged
    assert est.value == pytest.approx(2 ** (0.5 - 1 / q), abs=1e-6)


def test_euclidean_ball_every_section_is_one():
    rng = np.random.default_rng(3)
    for n in (2, 3, 7):
        a = _unit(rng, n)
        assert section_volume(n, 2.0, a).value == pytest.approx(1.0, abs=1e-7)
        assert projection_volume(n, 2.0, a).value == pytest.approx(1.0, abs=1e-7)


def test_closed_form_examples():
    assert closed_form_a2("section", 2.0) == 1.0
    assert closed_form_a2("section", math.inf) == pytest.approx(math.sqrt(2))
    assert closed_form_a2("projection", 2.0) == 1.0
    with pytest.raises(DomainError):
        closed_form_a2("projection", 2.5)


def test_limit_ratio_examples():
    assert limit_ratio("section", 26.0) == pytest.approx(1.00020, abs=1e-5)
    assert limit_ratio("section", 27.0) == pytest.approx(0.99945, abs=1e-5)
    assert limit_ratio("section", 1e9) == pytest.approx(math.sqrt(3 / math.pi), abs=1e-7)
    assert limit_ratio("section", math.inf) == pytest.approx(math.sqrt(3 / math.pi))
    assert limit_ratio("projection", 4 / 3) == pytest.approx(1.0, abs=1e-13)
    assert limit_ratio("projection", 2.0) == pytest.approx(1.0, abs=1e-13)
    with pytest.raises(DomainError):
        limit_ratio("section", 2.0)


def test_permutation_invariance():
    rng = np.random.default_rng(11)
    v = np.abs(rng.standard_normal(6))
    v /= np.linalg.norm(v)
    for perm in (rng.permutation(6), rng.permutation(6)):
        a, b = Direction.from_vector(v), Direction.from_vector(v[perm])
        s1, s2 = section_volume(6, 3.0, a), section_volume(6, 3.0, b)
        assert abs(s1.value - s2.value) <= s1.err_estimate + s2.err_estimate + 1e-12
        p1, p2 = projection_volume(6, 1.5, a), projection_volume(6, 1.5, b)
        assert abs(p1.value - p2.value) <= p1.err_estimate + p2.err_estimate + 1e-12


def test_sign_invariance():
    v = np.array([0.5, -0.5, 0.5, -0.5])
    a, b = Direction.from_vector(v), Direction.diag(4, 4)
    assert section_volume(4, 5.0, a).value == pytest.approx(section_volume(4, 5.0, b).value, abs=1e-9)


def test_monotone_in_index():
    a = Direction.diag(5, 3)
    sec = [section_volume(5, p, a) for p in (1.5, 2.0, 3.0, 5.0, 10.0)]
    for lo, hi in zip(sec, sec[1:]):
        assert hi.value >= lo.value - (hi.err_estimate + lo.err_estimate)
    proj = [projection_volume(5, q, a) for q in (1.25, 4 / 3, 1.5, 1.75, 2.0)]
    for lo, hi in zip(proj, proj[1:]):
        assert hi.value >= lo.value - (hi.err_estimate + lo.err_estimate)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("p", [2.5, 4.0])
def test_random_directions_match_monte_carlo(n, p):
    rng = np.random.default_rng(100 * n + int(p))
    a = _unit(rng, n)
    mc_cfg = McConfig(samples=200_000, seed=5)
    quad = section_volume(n, p, a)
    mc = mc_section(n, p, a, mc_cfg)
    assert abs(quad.value - mc.mean) <= 3 * (mc.std_error + quad.err_estimate)
    q = p / (p - 1)
    quad = projection_volume(n, q, a)
    mc = mc_projection(n, q, a, mc_cfg)
    assert abs(quad.value - mc.mean) <= 3 * (mc.std_error + quad.err_estimate)


@pytest.mark.slow
def test_high_dimensional_diagonals_match_monte_carlo():
    cfg = McConfig(samples=200_000, seed=9)
    quad = section_volume(100, 3.0, Direction.diag(100, 100))
    mc = mc_section(100, 3.0, Direction.diag(100, 100), cfg)
    assert abs(quad.value - mc.mean) <= 3 * (mc.std_error + quad.err_estimate)
    quad = projection_volume(50, 1.5, Direction.diag(50, 50))
    mc = mc_projection(50, 1.5, Direction.diag(50, 50), cfg)
    assert abs(quad.value - mc.mean) <= 3 * (mc.std_error + quad.err_estimate)


def test_section_ratio_approaches_limit():
    target = limit_ratio("section", 3.0)
    a2 = closed_form_a2("section", 3.0)
    gaps = [abs(section_volume(n, 3.0, Direction.diag(n, n)).value / a2 - target)
            for n in (50, 100, 200, 400)]
    assert all(x > y for x, y in zip(gaps, gaps[1:]))


def test_scan_grid():
    assert scan_ks(10) == list(range(1, 11))
    ks = scan_ks(1000)
    assert {1, 2, 1000} <= set(ks) and len(ks) < 60


def test_scan_low_p_prefers_coordinate_direction():
    sc = diagonal_scan("section", 10, 1.5)
    assert sc.best_k == 1


def test_scan_section_diagonal_beats_a2():
    sc = diagonal_scan("section", 100, 3.0)
    assert sc.table[100].value > sc.table[2].value
    assert sc.best_k in sc.table


def test_scan_projection_diagonal_below_a2():
    sc = diagonal_scan("projection", 30, 1.5)
    assert sc.table[30].value < sc.table[2].value


def test_scan_flags_ties():
    # at p = 2 every direction gives exactly 1
    sc = diagonal_scan("section", 6, 2.0)
    assert sc.tie
    assert sc.best_k == 1


def test_domain_errors():
    with pytest.raises(DomainError):
        section_volume(1, 3.0, Direction.diag(1, 1))
    with pytest.raises(DomainError):
        section_volume(4, 3.0, Direction.diag(5, 2))
    with pytest.raises(DomainError):
        section_volume(4, 0.5, Direction.diag(4, 2))
    with pytest.raises(DomainError):
        projection_volume(4, 2.5, Direction.diag(4, 2))


@given(st.lists(st.floats(-1, 1), min_size=2, max_size=6).filter(lambda v: np.linalg.norm(v) > 0.1))
@settings(max_examples=25, deadline=None)
def test_euclidean_property(v):
    v = np.array(v) / np.linalg.norm(v)
    a = Direction.from_vector(v)
    est = section_volume(a.n, 2.0, a)
    assert est.value == pytest.approx(1.0, abs=1e-7)
    assert est.value > 0 and est.err_estimate >= 0


@given(st.floats(2.05, 30.0), st.integers(3, 40))
@settings(max_examples=20, deadline=None)
def test_section_contract(p, n):
    est = section_volume(n, p, Direction.diag(n, n))
    assert est.converged
    assert est.value > 0
    assert est.err_estimate <= max(1e-10, 1e-8 * est.value) * 1.0001
