import math

import numpy as np
import pytest

from nodal_lab.asymptotics import (
    FAMILIES,
    fit_exponent,
    grad_sup,
    lp_norm,
    scan_family,
    verify_bounds,
)
from nodal_lab.geometry import TWO_PI, build_grid, circle, flat_torus, sphere
from nodal_lab.levelset import ExtractionConfig
from nodal_lab.spectra import circle_mode, sectoral_harmonic, torus_mode, zonal_harmonic


def test_l2_norm_is_one():
    for mode, res in [
        (torus_mode(2, (2, 3), 0.4), 64),
        (circle_mode(5), 256),
        (zonal_harmonic(6), 64),
        (sectoral_harmonic(12), 64),
    ]:
        grid = build_grid(mode.manifold, res)
        assert math.isclose(lp_norm(mode, 2, grid), 1.0, rel_tol=1e-8)


def test_l1_norm_torus_closed_form():
    grid = build_grid(flat_torus(2), 256)
    value = lp_norm(torus_mode(2, (2, 3), 0.7), 1, grid)
    assert math.isclose(value, 4.0 * math.sqrt(2.0), rel_tol=1e-3)


def test_sup_norm_matches_amplitude():
    grid = build_grid(flat_torus(2), 64)
    mode = torus_mode(2, (3, 1), 0.2)
    assert math.isclose(lp_norm(mode, math.inf, grid), mode.sup_abs, rel_tol=1e-9)
    grid = build_grid(sphere(), 64)
    mode = sectoral_harmonic(40)
    assert math.isclose(lp_norm(mode, math.inf, grid), mode.sup_abs, rel_tol=1e-6)


def test_lp_rejects_p_below_one():
    grid = build_grid(circle(), 16)
    with pytest.raises(ValueError):
        lp_norm(circle_mode(1), 0.5, grid)


def test_grad_sup_torus_closed_form():
    grid = build_grid(flat_torus(2), 64)
    mode = torus_mode(2, (3, 4), 0.3)
    top, on_nodal = grad_sup(mode, grid)
    expected = mode.sup_abs * 5.0
    assert math.isclose(top, expected, rel_tol=1e-9)
    assert on_nodal <= top * (1 + 1e-12)


def test_fit_exponent_recovers_exact_power_law():
    rows = [{"lambda": float(x), "y": 3.0 * x**2} for x in (2, 3, 5, 8, 13, 21)]
    fit = fit_exponent(rows, x_column="lambda", y_column="y")
    assert abs(fit.slope - 2.0) < 1e-10
    assert math.isclose(fit.intercept, math.log(3.0), rel_tol=1e-10)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.stderr < 1e-10
    assert fit.n_points == 6


def test_fit_exponent_input_validation():
    rows = [{"lambda": float(x), "y": float(x)} for x in (1, 2, 3, 4)]
    with pytest.raises(ValueError):
        fit_exponent(rows, "lambda", "y")
    rows = [{"lambda": float(x), "y": float(x - 3)} for x in (1, 2, 3, 4, 5)]
    with pytest.raises(ValueError):
        fit_exponent(rows, "lambda", "y")


def test_scan_family_requires_five_indices():
    with pytest.raises(ValueError):
        scan_family("circle", [1, 2, 3], config=ExtractionConfig(resolution=64))


def test_scan_family_rejects_unknown_family():
    assert set(FAMILIES) == {"torus-axis", "torus-diagonal", "zonal", "sectoral", "circle"}
    with pytest.raises(ValueError):
        scan_family("moebius", [1, 2, 3, 4, 5], config=ExtractionConfig(resolution=64))


@pytest.fixture(scope="module")
def axis_scan():
    return scan_family(
        "torus-axis", [1, 2, 3, 4, 5, 6], config=ExtractionConfig(resolution=128)
    )


def test_axis_scan_table_invariants(axis_scan):
    vol = flat_torus(2).volume
    for rec in axis_scan:
        assert math.isclose(rec.l2, 1.0, rel_tol=1e-8)
        # Cauchy-Schwarz chain around the unit L2 norm
        assert rec.l1 <= math.sqrt(vol) * (1 + 1e-8)
        assert rec.sup >= 1.0 / math.sqrt(vol)
        assert rec.sup * rec.l1 >= 1.0 - 1e-8
        assert rec.nodal_grad_sup <= rec.grad_sup * (1 + 1e-12)
        assert rec.ambiguity_fallbacks == 0


def test_axis_scan_nodal_measure_closed_form(axis_scan):
    for rec in axis_scan:
        m = rec.index
        assert math.isclose(rec.nodal_measure, 4.0 * math.pi * m, rel_tol=1e-6)


def test_axis_scan_cross_fill_consistency(axis_scan):
    """The nodal gradient integral matches the volume side it must equal."""
    for rec in axis_scan:
        ratio = 2.0 * rec.weighted_nodal_integral / (rec.lam**2 * rec.l1)
        assert abs(ratio - 1.0) < 1e-2


def test_scan_rows_have_lp_columns(axis_scan):
    d = axis_scan[0].as_dict()
    assert "l4" in d and "l6" in d
    assert d["family"] == "torus-axis"
    vol = flat_torus(2).volume
    # volume-normalized means are nondecreasing in p and capped by the sup
    means = [d[f"l{p}"] / vol ** (1.0 / p) for p in (1, 2, 4, 6)]
    assert means == sorted(means)
    assert means[-1] <= d["sup"] * (1 + 1e-9)


def test_scan_is_deterministic_and_thread_order_stable():
    cfg = ExtractionConfig(resolution=64)
    serial = scan_family("circle", [1, 2, 3, 4, 5], config=cfg, max_workers=1)
    threaded = scan_family("circle", [1, 2, 3, 4, 5], config=cfg, max_workers=3)
    assert [r.as_dict() for r in serial] == [r.as_dict() for r in threaded]


def test_circle_scan_constants():
    rows = scan_family("circle", [1, 2, 4, 6, 8, 12], config=ExtractionConfig(resolution=2048))
    for rec in rows:
        assert math.isclose(rec.nodal_measure, 2.0 * rec.index, rel_tol=1e-12)
        # quadrature kink error grows like (k/n)^2, still tiny at n = 2048
        assert math.isclose(rec.l1, 4.0 / math.sqrt(math.pi), rel_tol=2e-4)
    fit = fit_exponent(rows, "lambda", "l1")
    assert abs(fit.slope) < 1e-3


def test_verify_bounds_passes_on_axis_scan(axis_scan):
    report = verify_bounds(axis_scan, flat_torus(2))
    assert report.passed
    names = {c.name for c in report.checks}
    assert names == {
        "l1_lower_bound",
        "grad_sup_upper_bound",
        "nodal_measure_lower_bound",
        "weighted_integral_two_sided",
    }
    for check in report.checks:
        assert check.ratio_min <= check.ratio_max
        assert check.passed


def test_verify_bounds_small_zonal_scan():
    rows = scan_family("zonal", [2, 4, 6, 8, 10], config=ExtractionConfig(resolution=64))
    report = verify_bounds(rows, sphere())
    assert report.passed


def test_verify_bounds_rejects_empty_table():
    with pytest.raises(ValueError):
        verify_bounds([], flat_torus(2))


def test_diagonal_family_avoids_axis_alignment():
    rows = scan_family(
        "torus-diagonal", [1, 2, 3, 4, 5], config=ExtractionConfig(resolution=128)
    )
    for rec in rows:
        m = rec.index
        assert math.isclose(rec.lam, math.hypot(m, m + 1), rel_tol=1e-12)
        # nodal lines of sin(<k,x>) have total length 4*pi*|k|
        assert math.isclose(rec.nodal_measure, 4.0 * math.pi * rec.lam, rel_tol=1e-4)
