import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nodal_lab.geometry import build_grid, circle, flat_torus, integrate, sphere
from nodal_lab.spectra import (
    ModeExpansion,
    apply_helmholtz,
    bump_test_function,
    circle_mode,
    constant_test_function,
    legendre_pair,
    mode_expansion,
    sectoral_harmonic,
    torus_mode,
    zonal_harmonic,
)
from nodal_lab.spectra import test_function_from_mode as eigen_weight

RNG = np.random.default_rng(20260816)


def _random_points(manifold, n=100):
    if manifold.kind == "sphere":
        theta = RNG.uniform(0.3, math.pi - 0.3, size=n)
        phi = RNG.uniform(0.0, 2 * math.pi, size=n)
        return np.stack([theta, phi], axis=1)
    return RNG.uniform(0.0, 2 * math.pi, size=(n, manifold.intrinsic_dim))


ALL_MODES = [
    torus_mode(2, (1, 0)),
    torus_mode(2, (2, 3), phase=0.7),
    torus_mode(3, (1, 2, 2), phase=1.1),
    circle_mode(5, phase=0.3),
    zonal_harmonic(7),
    sectoral_harmonic(9),
]


@pytest.mark.parametrize("mode", ALL_MODES, ids=lambda m: m.describe()["family"] + str(m.lam))
def test_l2_normalization(mode):
    grid = build_grid(mode.manifold, 32)
    values = mode.value(grid.nodes)
    assert math.isclose(integrate(grid, values**2), 1.0, rel_tol=1e-10)


@pytest.mark.parametrize("mode", ALL_MODES, ids=lambda m: m.describe()["family"] + str(m.lam))
def test_gradient_energy_equals_eigenvalue(mode):
    grid = build_grid(mode.manifold, 48)
    gn = mode.grad_norm(grid.nodes)
    assert math.isclose(integrate(grid, gn**2), mode.eigenvalue, rel_tol=1e-8)


@settings(deadline=None, max_examples=25)
@given(
    kx=st.integers(min_value=-4, max_value=4),
    ky=st.integers(min_value=-4, max_value=4),
    phase=st.floats(min_value=0.0, max_value=6.28, allow_nan=False),
)
def test_torus_normalization_random_wavevector(kx, ky, phase):
    if kx == 0 and ky == 0:
        return
    mode = torus_mode(2, (kx, ky), phase=phase)
    grid = build_grid(mode.manifold, 24)
    values = mode.value(grid.nodes)
    assert math.isclose(integrate(grid, values**2), 1.0, rel_tol=1e-8)
    assert math.isclose(mode.lam, math.hypot(kx, ky), rel_tol=1e-14)


def test_eigenvalues():
    assert torus_mode(2, (3, 4)).lam == pytest.approx(5.0)
    assert circle_mode(6).eigenvalue == pytest.approx(36.0)
    assert zonal_harmonic(4).eigenvalue == pytest.approx(20.0)
    assert sectoral_harmonic(4).eigenvalue == pytest.approx(20.0)


def test_legendre_endpoint_and_bound():
    for n in (1, 2, 10, 50, 200):
        p, _ = legendre_pair(n, np.array([1.0]))
        assert p[0] == pytest.approx(1.0, rel=1e-12)
    x = np.linspace(-1.0, 1.0, 10001)
    for n in (3, 17, 64):
        p, _ = legendre_pair(n, x)
        assert np.max(np.abs(p)) <= 1.0 + 1e-12
    with pytest.raises(ValueError):
        legendre_pair(0, x)


@pytest.mark.parametrize("mode", ALL_MODES, ids=lambda m: m.describe()["family"] + str(m.lam))
def test_chart_gradient_matches_finite_differences(mode):
    pts = _random_points(mode.manifold, 100)
    grad = np.atleast_2d(mode.chart_gradient(pts))
    h = 1e-5
    scale = max(float(np.max(np.abs(grad))), 1.0)
    for axis in range(pts.shape[1]):
        shift = np.zeros(pts.shape[1])
        shift[axis] = h
        fd = (mode.value(pts + shift) - mode.value(pts - shift)) / (2 * h)
        assert np.max(np.abs(fd - grad[:, axis])) / scale < 1e-6


def test_sectoral_peaks_on_equator():
    mode = sectoral_harmonic(40)
    peak = float(mode.value(np.array([math.pi / 2, 0.0])))
    assert math.isclose(peak, mode.sup_abs, rel_tol=1e-12)
    # decays away from the equator
    off = float(mode.value(np.array([math.pi / 2 - 0.5, 0.0])))
    assert abs(off) < 0.01 * peak


def test_sup_abs_is_attained_not_exceeded():
    for mode in ALL_MODES:
        pts = _random_points(mode.manifold, 400)
        assert np.max(np.abs(mode.value(pts))) <= mode.sup_abs * (1 + 1e-12)


def test_describe_contents():
    d = torus_mode(2, (2, 3), phase=0.7).describe()
    assert d["family"] == "torus" and d["manifold"] == "torus2"
    assert tuple(d["k"]) == (2, 3) and math.isclose(d["lambda"], math.sqrt(13.0))
    d = zonal_harmonic(5).describe()
    assert d["family"] == "zonal" and d["degree"] == 5


def test_helmholtz_annihilates_own_mode():
    mode = torus_mode(2, (2, 1), phase=0.2)
    exp = mode_expansion([1.0], [mode])
    pts = _random_points(mode.manifold, 50)
    img = exp.helmholtz_image(mode.lam, pts)
    assert np.max(np.abs(img)) < 1e-12


def test_helmholtz_shifts_other_modes():
    mode_j = circle_mode(3)
    mode_k = circle_mode(1)
    exp = mode_expansion([1.0], [mode_k])
    pts = _random_points(mode_j.manifold, 50)
    img = exp.helmholtz_image(mode_j.lam, pts)
    expected = (mode_j.eigenvalue - mode_k.eigenvalue) * mode_k.value(pts)
    assert np.max(np.abs(img - expected)) < 1e-11


def test_helmholtz_of_constant():
    f = constant_test_function(flat_torus(2), 2.0)
    pts = _random_points(flat_torus(2), 20)
    h = f.helmholtz(3.0)
    assert np.allclose(h(pts), 9.0 * 2.0)


def test_apply_helmholtz_wraps_expansion():
    modes = [torus_mode(2, (1, 0)), torus_mode(2, (0, 2), phase=0.5)]
    exp = mode_expansion([0.5, -1.5], modes)
    f = apply_helmholtz(exp, 2.0)
    pts = _random_points(flat_torus(2), 30)
    assert np.allclose(f.helmholtz(2.0)(pts), exp.helmholtz_image(2.0, pts))
    assert np.allclose(f.value(pts), exp.value(pts))


def test_expansion_laplacian_is_diagonal():
    mode = zonal_harmonic(3)
    exp = mode_expansion([2.0], [mode])
    pts = _random_points(sphere(), 40)
    assert np.allclose(exp.laplacian(pts), -mode.eigenvalue * exp.value(pts), atol=1e-12)


def test_eigenfunction_weight_round_trip():
    mode = torus_mode(2, (2, 2), phase=1.0)
    f = eigen_weight(mode)
    pts = _random_points(flat_torus(2), 30)
    assert np.allclose(f.value(pts), mode.value(pts))
    assert np.allclose(f.laplacian(pts), -mode.eigenvalue * mode.value(pts))


def test_bump_support_and_smoothness():
    center = np.array([1.0, 2.0])
    f = bump_test_function(center, 0.8)
    assert float(f.value(center)) > 0.0
    # strictly outside the ball: identically zero, gradient and laplacian too
    far = center + np.array([0.0, 1.2])
    assert float(f.value(far)) == 0.0
    assert np.allclose(f.chart_gradient(far[None, :]), 0.0)
    assert float(np.asarray(f.laplacian(far)).ravel()[0]) == 0.0
    # interior gradient agrees with finite differences
    pts = center + RNG.uniform(-0.5, 0.5, size=(40, 2))
    grad = f.chart_gradient(pts)
    h = 1e-6
    for axis in range(2):
        shift = np.zeros(2)
        shift[axis] = h
        fd = (np.asarray(f.value(pts + shift)) - np.asarray(f.value(pts - shift))) / (2 * h)
        assert np.max(np.abs(fd - grad[:, axis])) < 1e-5


def test_bump_laplacian_matches_finite_differences():
    f = bump_test_function(np.array([3.0, 3.0]), 1.0)
    pts = np.array([[3.2, 2.9], [2.6, 3.3], [3.0, 3.0]])
    h = 1e-4
    lap_fd = np.zeros(len(pts))
    for axis in range(2):
        shift = np.zeros(2)
        shift[axis] = h
        lap_fd += (
            np.asarray(f.value(pts + shift))
            - 2 * np.asarray(f.value(pts))
            + np.asarray(f.value(pts - shift))
        ) / h**2
    assert np.max(np.abs(lap_fd - np.asarray(f.laplacian(pts)))) < 1e-4


def test_constructor_validation():
    with pytest.raises(ValueError):
        torus_mode(2, (0, 0))
    with pytest.raises(ValueError):
        torus_mode(2, (1, 0, 0))
    with pytest.raises(ValueError):
        circle_mode(0)
    with pytest.raises(ValueError):
        zonal_harmonic(0)
    with pytest.raises(ValueError):
        sectoral_harmonic(501)
    with pytest.raises(ValueError):
        mode_expansion([], [])
    with pytest.raises(ValueError):
        mode_expansion([1.0, 2.0], [circle_mode(1)])
    with pytest.raises(ValueError):
        ModeExpansion(circle(), [1.0], [torus_mode(2, (1, 0))])
    with pytest.raises(ValueError):
        bump_test_function(np.array([0.0, 0.0]), 4.0)
    with pytest.raises(ValueError):
        bump_test_function(np.array([0.0]), 0.5, dim=2)


def test_sectoral_l1_decay_trend():
    """L1 norms of equator-concentrating modes shrink with frequency."""
    grid = build_grid(sphere(), 64)
    l1 = []
    for n in (20, 80):
        mode = sectoral_harmonic(n)
        l1.append(integrate(grid, np.abs(mode.value(grid.nodes))))
    lam = [math.sqrt(20 * 21), math.sqrt(80 * 81)]
    slope = (math.log(l1[1]) - math.log(l1[0])) / (math.log(lam[1]) - math.log(lam[0]))
    assert -0.33 < slope < -0.17
