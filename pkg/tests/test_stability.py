import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from imexdimsim.stability import (
    PoleError,
    a_stability_check,
    classify_point,
    is_schur,
    l_stability_check,
    region_S_alpha,
    region_S_alpha_y,
    region_SE,
    spectral_radius,
    stability_matrix,
    stability_polynomial,
    stability_interval,
)
from imexdimsim.tableau import CATALOG_NAMES, Tableau, catalog

from conftest import cached_region


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_zero_arguments_give_v(name):
    t = catalog(name)
    assert np.array_equal(stability_matrix(t, 0.0, 0.0), t.V.astype(complex))


def test_forward_euler_multiplier():
    t = Tableau([1.0], [[0.0]], [[1.0]], [[1.0]], [[1.0]], [[1.0]], [[1.0]], 1, 1)
    # implicit stage with lambda = 1 and explicit Euler: (1 + z0) ... scalar check at z1 = 0
    assert np.isclose(stability_matrix(t, -0.5, 0.0)[0, 0], 0.5)


def test_pole_raises():
    t = catalog("DIMSIM2A")
    with pytest.raises(PoleError):
        stability_matrix(t, 0.0, 1.0 / t.lam)
    assert classify_point(t, 0.0, 1.0 / t.lam) == "pole"


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_polynomial_matches_determinant(name):
    t = catalog(name)
    poly = stability_polynomial(t)
    rng = np.random.default_rng(3)
    for _ in range(10):
        z0 = complex(*rng.normal(size=2))
        z1 = complex(*rng.normal(size=2))
        w = complex(*rng.normal(size=2))
        M = stability_matrix(t, z0, z1)
        ref = (1 - t.lam * z1) ** t.s * np.linalg.det(w * np.eye(t.r) - M)
        K, I, J = poly.coef.shape
        k, i, j = np.meshgrid(np.arange(K), np.arange(I), np.arange(J), indexing="ij")
        size = np.sum(np.abs(poly.coef) * abs(w) ** k * abs(z0) ** i * abs(z1) ** j)
        assert abs(poly(w, z0, z1) - ref) <= 1e-12 * max(1.0, size)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), min_size=2, max_size=5))
def test_schur_criterion_agrees_with_roots(roots):
    moduli = np.abs(roots)
    if np.any(np.abs(moduli - 1) < 1e-6):
        return
    coeffs = np.poly(roots)
    assert is_schur(coeffs) == bool(np.all(moduli < 1))


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_a_and_l_stability_verdicts(name):
    t = catalog(name)
    a = a_stability_check(t)
    l = l_stability_check(t, a)
    assert a.a_stable
    assert l.l_stable == name.endswith("L")


def test_trapezoidal_implicit_part_sits_on_the_boundary():
    a = a_stability_check(catalog("DIMSIM1A"))
    assert a.a_stable and not a.strict
    assert a.asymptotic_moduli == pytest.approx([1.0])


def test_l_stable_radius_decays_in_the_stiff_limit():
    rad = l_stability_check(catalog("DIMSIM1L")).stiff_limit_radius
    assert rad[8] < 1e-6
    rad3 = l_stability_check(catalog("DIMSIM3L")).stiff_limit_radius
    assert rad3[8] < rad3[4] < rad3[2]


def test_forward_euler_part_region_is_unit_disk():
    reg = cached_region("DIMSIM1A", "SE")
    assert reg.area == pytest.approx(math.pi, abs=2e-3)
    assert reg.interval[0] == pytest.approx(-2.0, abs=1e-4)
    assert np.allclose(np.abs(reg.boundary + 1), 1.0, atol=1e-4)


@pytest.mark.parametrize("alpha", [0.0, -0.1, 2.0])
def test_alpha_outside_range_rejected(alpha):
    with pytest.raises(ValueError):
        region_S_alpha(catalog("DIMSIM2A"), alpha)


def test_alpha_y_region_at_zero_is_explicit_region():
    t = catalog("DIMSIM2L")
    a = region_S_alpha_y(t, math.pi / 3, 0.0)
    e = region_SE(t)
    assert a.area == pytest.approx(e.area, rel=1e-12)


@pytest.mark.parametrize("name", ["DIMSIM2A", "DIMSIM3L"])
def test_region_membership_and_nesting(name):
    t = catalog(name)
    se = cached_region(name, "SE")
    sa = cached_region(name, "Spi2")
    assert sa.area <= se.area + 1e-9
    inside = se.center + 0.95 * se.radii * np.exp(1j * se.theta)
    outside = se.center + 1.05 * se.radii * np.exp(1j * se.theta)
    assert np.all(se.contains(inside[::10]))
    assert not np.any(se.contains(outside[::10]))
    for z in inside[::60]:
        assert spectral_radius(stability_matrix(t, z, 0.0)) < 1


def test_interval_agrees_with_region():
    t = catalog("DIMSIM3A")
    x, zero = stability_interval(t)
    assert zero == 0.0
    assert x == pytest.approx(cached_region("DIMSIM3A", "SE").interval[0], abs=1e-3)
    xa, _ = stability_interval(t, math.pi / 2)
    assert x <= xa < 0
