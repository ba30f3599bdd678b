import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nodal_lab.geometry import (
    TWO_PI,
    ManifoldDescriptor,
    QuadratureGrid,
    build_grid,
    circle,
    embed_sphere,
    flat_torus,
    integrate,
    manifold_from_name,
    pairwise_sum,
    periodic_difference,
    segment_length,
    sphere,
    wrap_periodic,
)


@pytest.mark.parametrize(
    "manifold,volume",
    [
        (circle(), TWO_PI),
        (flat_torus(2), TWO_PI**2),
        (flat_torus(3), TWO_PI**3),
        (sphere(), 4.0 * math.pi),
    ],
)
def test_weights_sum_to_volume(manifold, volume):
    grid = build_grid(manifold, 16)
    assert math.isclose(integrate(grid, np.ones(grid.weights.size)), volume, rel_tol=1e-12)
    assert np.all(grid.weights > 0)


def test_torus_grid_shape_and_weights():
    grid = build_grid(flat_torus(2), 8)
    assert grid.nodes.shape == (64, 2)
    assert np.allclose(grid.weights, (TWO_PI / 8) ** 2)


def test_circle_grid_weights():
    grid = build_grid(circle(), 4)
    assert grid.nodes.shape == (4, 1)
    assert np.allclose(grid.weights, math.pi / 2)


def test_trig_integrals_are_spectrally_exact():
    grid = build_grid(flat_torus(2), 16)
    x, y = grid.nodes[:, 0], grid.nodes[:, 1]
    # int sin^2(x) over the square torus is half the volume
    assert math.isclose(integrate(grid, np.sin(x) ** 2), 2.0 * math.pi**2, rel_tol=1e-13)
    assert abs(integrate(grid, np.sin(3 * x + 0.4) * np.cos(2 * y))) < 1e-12


def test_sphere_polynomial_integrals():
    grid = build_grid(sphere(), 12)
    ct = np.cos(grid.nodes[:, 0])
    assert abs(integrate(grid, ct)) < 1e-12
    assert math.isclose(integrate(grid, ct**2), 4.0 * math.pi / 3.0, rel_tol=1e-12)


@settings(deadline=None, max_examples=40)
@given(
    k=st.integers(min_value=1, max_value=7),
    amp=st.floats(min_value=-3, max_value=3, allow_nan=False),
    const=st.floats(min_value=-2, max_value=2, allow_nan=False),
    phase=st.floats(min_value=0, max_value=6.28, allow_nan=False),
)
def test_circle_trig_polynomial_exactness(k, amp, const, phase):
    """Uniform trapezoid weights integrate low trig modes to round-off."""
    grid = build_grid(circle(), 16)
    samples = const + amp * np.sin(k * grid.nodes[:, 0] + phase)
    assert math.isclose(integrate(grid, samples), const * TWO_PI, abs_tol=1e-10)


def test_integrate_is_linear():
    grid = build_grid(flat_torus(2), 12)
    rng = np.random.default_rng(7)
    f = rng.normal(size=grid.weights.size)
    g = rng.normal(size=grid.weights.size)
    lhs = integrate(grid, 2.5 * f - 1.25 * g)
    rhs = 2.5 * integrate(grid, f) - 1.25 * integrate(grid, g)
    assert math.isclose(lhs, rhs, rel_tol=0, abs_tol=1e-12)


def test_integrate_rejects_wrong_length():
    grid = build_grid(circle(), 8)
    with pytest.raises(ValueError):
        integrate(grid, np.ones(7))


def test_pairwise_sum_matches_fsum():
    rng = np.random.default_rng(11)
    for n in (1, 2, 3, 17, 256, 1000):
        x = rng.normal(size=n)
        assert math.isclose(pairwise_sum(x), math.fsum(x), rel_tol=1e-12, abs_tol=1e-12)
    assert pairwise_sum(np.array([])) == 0.0


def test_segment_length_periodic_and_chordal():
    assert math.isclose(segment_length(circle(), [0.05], [6.2331853071795862]), 0.1, rel_tol=1e-9)
    t2 = flat_torus(2)
    assert math.isclose(
        segment_length(t2, [0.1, 0.0], [TWO_PI - 0.1, 0.0]), 0.2, rel_tol=1e-12
    )
    # 90 degrees apart on the equator: chord of a unit circle
    d = segment_length(sphere(), [math.pi / 2, 0.0], [math.pi / 2, math.pi / 2])
    assert math.isclose(d, math.sqrt(2.0), rel_tol=1e-12)


def test_wrap_and_difference():
    assert np.allclose(wrap_periodic(np.array([TWO_PI + 0.25, -0.25])), [0.25, TWO_PI - 0.25])
    d = periodic_difference(np.array([0.1, 0.0]), np.array([TWO_PI - 0.1, 3.0]))
    assert np.allclose(d, [0.2, -3.0])


@settings(deadline=None, max_examples=30)
@given(
    theta=st.floats(min_value=0.01, max_value=3.13),
    phi=st.floats(min_value=0.0, max_value=6.28),
)
def test_embed_sphere_unit_norm(theta, phi):
    v = embed_sphere(np.array([theta, phi]))
    assert math.isclose(float(np.linalg.norm(v)), 1.0, rel_tol=1e-12)


def test_invalid_manifolds_and_grids():
    with pytest.raises(ValueError):
        ManifoldDescriptor("klein", 2)
    with pytest.raises(ValueError):
        ManifoldDescriptor("torus", 4)
    with pytest.raises(ValueError):
        ManifoldDescriptor("sphere", 3)
    with pytest.raises(ValueError):
        build_grid(circle(), 3)
    with pytest.raises(ValueError):
        manifold_from_name("torus4")
    with pytest.raises(ValueError):
        QuadratureGrid(circle(), np.zeros((4, 2)), np.ones(4), 4)


def test_names_round_trip():
    for name in ("circle", "torus2", "torus3", "sphere"):
        assert manifold_from_name(name).name == name
