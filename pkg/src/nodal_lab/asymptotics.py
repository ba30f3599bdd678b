"""Norm scans with scaling-exponent fits and inequality checks.

``scan_family`` walks an eigenfunction family (torus plane waves along an
axis or diagonal, zonal or sectoral spherical harmonics, circle modes) and
records, per member: L^p norms, the sup norm, the gradient sup norm (global
and restricted to the nodal set), the nodal measure, and the
gradient-weighted nodal integral.  ``fit_exponent`` runs ordinary least
squares on log-log columns of such a table, and ``verify_bounds`` turns the
inequalities with unknowable constants into trend-stability checks of the
normalized ratios

* l1 * lambda^{(n-1)/4}           (L^1 lower bound, bounded below),
* grad_sup * lambda^{-(n+1)/2}    (gradient sup bound, bounded above),
* nodal_measure * lambda^{-(7/4 - 3n/4)}   (measure lower bound),
* weighted_nodal_integral / lambda^2       (two-sided, capped by Vol^{1/2}).

Constants are never asserted: a lower-bounded ratio passes when its
observed minimum stays above half the median of the first three rows, an
upper-bounded one when its maximum stays below twice that median.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .geometry import QuadratureGrid, build_grid, integrate
from .levelset import ExtractionConfig, extract, hausdorff_measure, surface_integral
from .spectra import EigenMode, circle_mode, sectoral_harmonic, torus_mode, zonal_harmonic

FAMILIES = ("torus-axis", "torus-diagonal", "zonal", "sectoral", "circle")

_DEFAULT_P_VALUES = (4.0, 6.0)


@dataclass(frozen=True)
class NormRecord:
    """All scanned quantities for one family member."""

    family: str
    index: int
    lam: float
    l1: float
    l2: float
    lp: tuple[tuple[float, float], ...]
    sup: float
    grad_sup: float
    nodal_grad_sup: float
    nodal_measure: float
    weighted_nodal_integral: float
    ambiguity_fallbacks: int = 0

    def as_dict(self) -> dict:
        d = {
            "family": self.family,
            "index": self.index,
            "lambda": self.lam,
            "l1": self.l1,
            "l2": self.l2,
            "sup": self.sup,
            "grad_sup": self.grad_sup,
            "nodal_grad_sup": self.nodal_grad_sup,
            "nodal_measure": self.nodal_measure,
            "weighted_nodal_integral": self.weighted_nodal_integral,
            "ambiguity_fallbacks": self.ambiguity_fallbacks,
        }
        for p, v in self.lp:
            d[f"l{p:g}"] = v
        return d


@dataclass(frozen=True)
class ExponentFit:
    """OLS fit of log(y) against log(x)."""

    slope: float
    intercept: float
    stderr: float
    r_squared: float
    n_points: int

    def as_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "stderr": self.stderr,
            "r_squared": self.r_squared,
            "n_points": self.n_points,
        }


@dataclass(frozen=True)
class BoundCheck:
    """Trend-stability verdict for one normalized ratio."""

    name: str
    ratio_min: float
    ratio_max: float
    reference: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "ratio_min": self.ratio_min,
            "ratio_max": self.ratio_max,
            "reference": self.reference,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class BoundReport:
    checks: tuple[BoundCheck, ...]
    passed: bool

    def as_dict(self) -> dict:
        return {"checks": [c.as_dict() for c in self.checks], "passed": self.passed}


def _chart_bounds(manifold):
    if manifold.kind == "sphere":
        lo = np.array([1e-9, -math.inf])
        hi = np.array([math.pi - 1e-9, math.inf])
        return lo, hi
    return None


def _pattern_polish(fn, x0, h0, bounds) -> float:
    """Deterministic pattern search maximizing fn from x0 with initial step h0.

    Coordinate steps are halved whenever no axis move improves the value;
    converges to a local maximum to far below quadrature-level accuracy.
    """
    x = np.array(x0, dtype=float)
    best = float(fn(x))
    h = float(h0)
    dim = x.shape[0]
    for _ in range(200):
        improved = False
        for d in range(dim):
            for s in (1.0, -1.0):
                cand = x.copy()
                cand[d] += s * h
                if bounds is not None:
                    cand = np.clip(cand, bounds[0], bounds[1])
                v = float(fn(cand))
                if v > best:
                    best, x, improved = v, cand, True
        if not improved:
            h *= 0.5
            if h < 1e-12:
                break
    return best


def lp_norm(mode, p, grid: QuadratureGrid, _values=None) -> float:
    """L^p norm by quadrature; p = inf polishes the grid max locally.

    ``_values`` lets batch callers reuse one evaluation of the mode on the
    grid across several p; it must be mode.value(grid.nodes).
    """
    vals = np.abs(np.asarray(mode.value(grid.nodes) if _values is None else _values))
    if p == math.inf or p == np.inf:
        i = int(np.argmax(vals))
        h0 = math.pi / grid.resolution
        return _pattern_polish(
            lambda x: abs(float(np.asarray(mode.value(x)).ravel()[0])),
            grid.nodes[i],
            h0,
            _chart_bounds(mode.manifold),
        )
    p = float(p)
    if p < 1.0:
        raise ValueError("p must be at least 1 (or infinity)")
    return float(integrate(grid, vals ** p)) ** (1.0 / p)


def grad_sup(mode, grid: QuadratureGrid, nodal_mesh=None) -> tuple[float, float]:
    """Sup of |grad phi|: global (grid max, locally polished) and on the nodal set.

    Returns (global_sup, nodal_sup).  The nodal restriction is the maximum
    of the analytic gradient norms over the vertices of the c = 0 mesh,
    extracted at the grid's resolution unless a mesh is supplied.
    """
    gvals = np.asarray(mode.grad_norm(grid.nodes))
    i = int(np.argmax(gvals))
    h0 = math.pi / grid.resolution
    global_sup = _pattern_polish(
        lambda x: float(np.asarray(mode.grad_norm(x)).ravel()[0]),
        grid.nodes[i],
        h0,
        _chart_bounds(mode.manifold),
    )
    if nodal_mesh is None:
        nodal_mesh = extract(mode, 0.0, ExtractionConfig(resolution=max(grid.resolution, 8)))
    nodal_sup = float(nodal_mesh.grad_norms.max()) if nodal_mesh.num_vertices else 0.0
    return global_sup, nodal_sup


def _family_mode(family: str, index: int) -> EigenMode:
    if family == "torus-axis":
        return torus_mode(2, (index, 0))
    if family == "torus-diagonal":
        return torus_mode(2, (index, index + 1))
    if family == "zonal":
        return zonal_harmonic(index)
    if family == "sectoral":
        return sectoral_harmonic(index)
    if family == "circle":
        return circle_mode(index)
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


def _scan_one(family, index, grid, config, p_values) -> NormRecord:
    mode = _family_mode(family, index)
    mesh = extract(mode, 0.0, config)
    gs, nodal_gs = grad_sup(mode, grid, nodal_mesh=mesh)
    values = np.asarray(mode.value(grid.nodes))
    return NormRecord(
        family=family,
        index=int(index),
        lam=mode.lam,
        l1=lp_norm(mode, 1.0, grid, _values=values),
        l2=lp_norm(mode, 2.0, grid, _values=values),
        lp=tuple((p, lp_norm(mode, p, grid, _values=values)) for p in p_values),
        sup=lp_norm(mode, math.inf, grid, _values=values),
        grad_sup=gs,
        nodal_grad_sup=nodal_gs,
        nodal_measure=hausdorff_measure(mesh),
        weighted_nodal_integral=surface_integral(mesh, mesh.grad_norms),
        ambiguity_fallbacks=mesh.ambiguity_fallbacks,
    )


def scan_family(
    family: str,
    indices,
    config: ExtractionConfig | None = None,
    p_values=None,
    max_workers: int = 1,
) -> list[NormRecord]:
    """One NormRecord per index, in index order.

    ``p_values`` defaults to {4, 6}; 6 is also the critical exponent
    2(n+1)/(n-1) on the 2-sphere, so the default covers the full range on
    which the L^p bound is meaningful.  Rows are independent; with
    max_workers > 1 they are computed in a thread pool and still gathered
    in input order.
    """
    indices = [int(i) for i in indices]
    if len(indices) < 5:
        raise ValueError("a scan needs at least 5 family members")
    config = config or ExtractionConfig()
    if p_values is None:
        p_values = _DEFAULT_P_VALUES
    manifold = _family_mode(family, indices[0]).manifold
    grid = build_grid(manifold, config.resolution)
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            rows = list(
                pool.map(lambda i: _scan_one(family, i, grid, config, p_values), indices)
            )
    else:
        rows = [_scan_one(family, i, grid, config, p_values) for i in indices]
    return rows


def _column(row, name):
    if name == "lambda":
        name = "lam"
    if isinstance(row, dict):
        if name == "lam" and name not in row:
            name = "lambda"
        return float(row[name])
    return float(getattr(row, name))


def fit_exponent(table, x_column: str, y_column: str) -> ExponentFit:
    """Least-squares slope of log(y) against log(x) over the table rows."""
    if len(table) < 5:
        raise ValueError("need at least 5 rows to fit an exponent")
    xs = np.array([_column(r, x_column) for r in table])
    ys = np.array([_column(r, y_column) for r in table])
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("exponent fits need positive column values")
    lx = np.log(xs)
    ly = np.log(ys)
    n = len(table)
    mx = lx.mean()
    sxx = float(np.sum((lx - mx) ** 2))
    slope = float(np.sum((lx - mx) * (ly - ly.mean())) / sxx)
    intercept = float(ly.mean() - slope * mx)
    resid = ly - (slope * lx + intercept)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    stderr = math.sqrt(ss_res / (n - 2) / sxx) if n > 2 else 0.0
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return ExponentFit(slope, intercept, stderr, r_squared, n)


def _trend_reference(values: np.ndarray) -> float:
    return float(np.median(values[: min(3, len(values))]))


def verify_bounds(table, manifold) -> BoundReport:
    """Trend-stability checks of the normalized inequality ratios.

    The limiting constants have no closed form here, so "bounded below" is
    read as:
    the observed minimum of the normalized ratio stays at or above half the
    median of the first three rows; "bounded above" symmetrically with
    twice the median.  The weighted-integral ratio additionally satisfies
    the hard cap Vol(M)^{1/2}.
    """
    if not table:
        raise ValueError("empty scan table")
    n = manifold.intrinsic_dim
    lam = np.array([_column(r, "lam") for r in table])
    l1 = np.array([_column(r, "l1") for r in table])
    gs = np.array([_column(r, "grad_sup") for r in table])
    nm = np.array([_column(r, "nodal_measure") for r in table])
    wni = np.array([_column(r, "weighted_nodal_integral") for r in table])

    checks = []

    r1 = l1 * lam ** ((n - 1) / 4.0)
    ref1 = _trend_reference(r1)
    checks.append(
        BoundCheck("l1_lower_bound", float(r1.min()), float(r1.max()), ref1,
                   bool(r1.min() >= 0.5 * ref1))
    )

    r2 = gs * lam ** (-(n + 1) / 2.0)
    ref2 = _trend_reference(r2)
    checks.append(
        BoundCheck("grad_sup_upper_bound", float(r2.min()), float(r2.max()), ref2,
                   bool(r2.max() <= 2.0 * ref2))
    )

    r3 = nm * lam ** (-(7.0 / 4.0 - 3.0 * n / 4.0))
    ref3 = _trend_reference(r3)
    checks.append(
        BoundCheck("nodal_measure_lower_bound", float(r3.min()), float(r3.max()), ref3,
                   bool(r3.min() >= 0.5 * ref3))
    )

    r4 = wni * lam ** -2.0
    cap = math.sqrt(manifold.volume)
    checks.append(
        BoundCheck("weighted_integral_two_sided", float(r4.min()), float(r4.max()), cap,
                   bool(r4.min() > 0.0 and r4.max() <= cap * (1.0 + 1e-9)))
    )

    return BoundReport(tuple(checks), all(c.passed for c in checks))
