"""Numerical checks of the exact integral identities.

Every eigenfunction here satisfies a family of exact relations tying
volume integrals against |phi - c| to gradient-weighted surface integrals
over the level set {phi = c}:

* nodal identity: 2 * integral over {phi = 0} of |grad phi| dS equals
  lambda^2 * integral of |phi| dV;
* weighted identity: for any C^2 function f, the volume integral of
  ((Delta + lambda^2) f) |phi| equals twice the surface integral of
  f |grad phi| over the nodal set;
* level identity: the same with |phi - c| plus the correction term
  lambda^2 c * integral of f sgn(phi - c);
* level corollary: lambda^2 * integral of phi over {phi >= c} equals the
  surface integral of |grad phi| over {phi = c}, itself bounded by
  lambda^2 Vol(M)^{1/2};
* co-area recovery of lambda^2 by integrating the inner surface integrals
  over the level value;
* pair/orthogonality/symmetry identities for two eigenfunctions.

Each checker evaluates both sides independently (volume side by
quadrature with the analytic Helmholtz image of f, surface side by
level-set extraction) and reports the residual.  The volume side never
discretizes a differential operator, so extraction is the only
nontrivial error source.

Checkers share one core that computes both sides exactly once, so the
documented coincidences (weighted check with constant f versus the nodal
check; level check at c = 0 versus the weighted check) hold bit for bit,
not merely up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import build_grid, integrate, pairwise_sum
from .levelset import (
    ExtractionConfig,
    _extract_curve,
    _sample_curve_grid,
    extract,
    hausdorff_measure,
    surface_integral,
    weighted_gradient_integral,
)
from .spectra import TestFunction, bump_test_function, constant_test_function, test_function_from_mode

SIGN_TOL = 1e-14
SATURATION_FLOOR = 1e-12
EIGENVALUE_MATCH_TOL = 1e-12


@dataclass(frozen=True)
class IdentityReport:
    """Both sides of one identity check plus residuals and context.

    ``rel_residual`` divides by max(|lhs|, |rhs|, 1e-300) except for
    zero-valued identities, which report against an explicit problem
    scale recorded in ``metadata["problem_scale"]``.
    """

    identity_name: str
    lhs: float
    rhs: float
    abs_residual: float
    rel_residual: float
    resolution: int
    metadata: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "identity_name": self.identity_name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "abs_residual": self.abs_residual,
            "rel_residual": self.rel_residual,
            "resolution": self.resolution,
            "metadata": self.metadata,
        }


@dataclass(frozen=True)
class ConvergenceReport:
    """One identity check repeated at doubling resolutions.

    ``estimated_order`` averages log2 of successive residual ratios; it is
    NaN when the residual sequence is not strictly decreasing or has
    already saturated at the round-off floor (both flagged).
    """

    reports: tuple[IdentityReport, ...]
    estimated_order: float
    saturated: bool
    monotone: bool

    def __post_init__(self):
        if len(self.reports) < 3:
            raise ValueError("a convergence study needs at least 3 resolutions")
        for a, b in zip(self.reports, self.reports[1:]):
            if b.resolution != 2 * a.resolution:
                raise ValueError("resolutions must double at every step")

    @property
    def resolutions(self) -> tuple[int, ...]:
        return tuple(r.resolution for r in self.reports)

    @property
    def residuals(self) -> tuple[float, ...]:
        return tuple(r.rel_residual for r in self.reports)

    def as_dict(self) -> dict:
        return {
            "reports": [r.as_dict() for r in self.reports],
            "estimated_order": self.estimated_order,
            "saturated": self.saturated,
            "monotone": self.monotone,
        }


def _make_report(name, lhs, rhs, resolution, metadata, scale=None) -> IdentityReport:
    lhs = float(lhs)
    rhs = float(rhs)
    abs_residual = abs(lhs - rhs)
    denom = float(scale) if scale is not None else max(abs(lhs), abs(rhs), 1e-300)
    return IdentityReport(
        identity_name=name,
        lhs=lhs,
        rhs=rhs,
        abs_residual=abs_residual,
        rel_residual=abs_residual / denom,
        resolution=int(resolution),
        metadata=metadata,
    )


def _mesh_metadata(mesh) -> dict:
    meta = {
        "mesh_vertices": mesh.num_vertices,
        "mesh_elements": mesh.num_elements,
        "ambiguity_fallbacks": mesh.ambiguity_fallbacks,
        "newton_max_residual": mesh.newton_max_residual,
    }
    if mesh.pole_cap is not None:
        meta["pole_cap"] = mesh.pole_cap
    return meta


def _require_same_manifold(mode, f):
    if f.manifold != mode.manifold:
        raise ValueError("test function and mode live on different manifolds")


def _surface_and_volume_sides(mode, c, f, config, samples=None):
    """Both sides of the level-c weighted identity, computed once.

    Surface side: 2 * integral over {phi = c} of f |grad phi| dS.
    Volume side: integral of ((Delta + lambda^2) f) |phi - c| dV, plus
    lambda^2 c * integral of f sgn(phi - c) dV when c is nonzero.  Nodes
    with |phi - c| below 1e-14 contribute zero to the sign term (the set
    {phi = c} has measure zero for regular values).
    """
    _require_same_manifold(mode, f)
    manifold = mode.manifold
    if samples is not None and manifold.intrinsic_dim == 2:
        mesh = _extract_curve(mode, float(c), config, samples=samples)
    else:
        mesh = extract(mode, float(c), config)
    surface = 2.0 * weighted_gradient_integral(mesh, f.value)

    grid = build_grid(manifold, config.resolution)
    vals = np.asarray(mode.value(grid.nodes))
    helmholtz_vals = np.asarray(f.helmholtz(mode.lam)(grid.nodes))
    volume = integrate(grid, helmholtz_vals * np.abs(vals - c))
    if c != 0.0:
        d = vals - c
        sgn = np.where(np.abs(d) < SIGN_TOL, 0.0, np.sign(d))
        f_vals = np.asarray(f.value(grid.nodes))
        volume += mode.eigenvalue * c * integrate(grid, f_vals * sgn)
    return surface, volume, mesh


def check_nodal_identity(mode, config: ExtractionConfig | None = None) -> IdentityReport:
    """2 * integral over the nodal set of |grad phi| dS vs lambda^2 * L1 norm."""
    config = config or ExtractionConfig()
    f = constant_test_function(mode.manifold)
    surface, volume, mesh = _surface_and_volume_sides(mode, 0.0, f, config)
    metadata = {"mode": mode.describe(), **_mesh_metadata(mesh)}
    return _make_report("nodal", surface, volume, config.resolution, metadata)


def check_weighted_identity(
    mode, f: TestFunction, config: ExtractionConfig | None = None
) -> IdentityReport:
    """Volume integral of ((Delta + lambda^2) f) |phi| vs twice the f-weighted nodal integral."""
    config = config or ExtractionConfig()
    surface, volume, mesh = _surface_and_volume_sides(mode, 0.0, f, config)
    metadata = {
        "mode": mode.describe(),
        "test_function": f.description,
        **_mesh_metadata(mesh),
    }
    return _make_report("weighted", volume, surface, config.resolution, metadata)


def check_level_identity(
    mode, c: float, f: TestFunction, config: ExtractionConfig | None = None
) -> IdentityReport:
    """The weighted identity shifted to the level set {phi = c}."""
    config = config or ExtractionConfig()
    surface, volume, mesh = _surface_and_volume_sides(mode, float(c), f, config)
    metadata = {
        "mode": mode.describe(),
        "test_function": f.description,
        "level": float(c),
        **_mesh_metadata(mesh),
    }
    return _make_report("level", volume, surface, config.resolution, metadata)


def check_level_corollary(
    mode, c: float, config: ExtractionConfig | None = None
) -> IdentityReport:
    """lambda^2 * integral of phi over {phi >= c} vs the level-set gradient integral.

    Also records the two-sided bound: the surface side never exceeds
    lambda^2 Vol(M)^{1/2}.
    """
    config = config or ExtractionConfig()
    c = float(c)
    mesh = extract(mode, c, config)
    rhs = surface_integral(mesh, mesh.grad_norms)

    grid = build_grid(mode.manifold, config.resolution)
    vals = np.asarray(mode.value(grid.nodes))
    lhs = mode.eigenvalue * integrate(grid, np.where(vals >= c, vals, 0.0))

    upper_bound = mode.eigenvalue * math.sqrt(mode.manifold.volume)
    metadata = {
        "mode": mode.describe(),
        "level": c,
        "upper_bound": upper_bound,
        "upper_bound_ok": bool(rhs <= upper_bound * (1.0 + 1e-9)),
        **_mesh_metadata(mesh),
    }
    return _make_report("corollary", lhs, rhs, config.resolution, metadata)


def check_coarea(
    mode, n_levels: int = 64, config: ExtractionConfig | None = None
) -> IdentityReport:
    """Recover lambda^2 by integrating the level-set gradient integrals over c.

    The outer integral runs over c in [-sup|phi|, sup|phi|] (falling back
    to the grid range when no analytic sup is available) with
    Gauss-Legendre nodes; the two outermost levels on each side sit close
    to the extrema, where level sets degenerate to small loops, and get
    extraction at twice the resolution.  The direct quadrature of
    |grad phi|^2 is recorded as a cross-check.
    """
    config = config or ExtractionConfig()
    if n_levels < 16:
        raise ValueError("need at least 16 levels")
    manifold = mode.manifold
    grid = build_grid(manifold, config.resolution)

    sup = getattr(mode, "sup_abs", None)
    if sup is not None:
        c_min, c_max = -float(sup), float(sup)
    else:
        vals = np.asarray(mode.value(grid.nodes))
        c_min, c_max = float(vals.min()), float(vals.max())

    x, w = np.polynomial.legendre.leggauss(n_levels)
    half = 0.5 * (c_max - c_min)
    mid = 0.5 * (c_max + c_min)
    levels = mid + half * x
    weights = half * w

    fine_config = ExtractionConfig(
        resolution=2 * config.resolution,
        newton_steps=config.newton_steps,
        ambiguity_policy=config.ambiguity_policy,
        newton_tol=config.newton_tol,
        subdivide_depth=config.subdivide_depth,
    )
    endpoint = {0, 1, n_levels - 2, n_levels - 1}

    samples = samples_fine = None
    if manifold.intrinsic_dim == 2:
        samples = _sample_curve_grid(mode, config.resolution)
        samples_fine = _sample_curve_grid(mode, fine_config.resolution)

    inner = np.empty(n_levels)
    fallbacks = 0
    for i, c in enumerate(levels):
        cfg = fine_config if i in endpoint else config
        if manifold.intrinsic_dim == 2:
            mesh = _extract_curve(
                mode, float(c), cfg,
                samples=samples_fine if i in endpoint else samples,
            )
        else:
            mesh = extract(mode, float(c), cfg)
        inner[i] = surface_integral(mesh, mesh.grad_norms)
        fallbacks += mesh.ambiguity_fallbacks

    lhs = pairwise_sum(weights * inner)
    rhs = mode.eigenvalue
    energy = integrate(grid, np.asarray(mode.grad_norm(grid.nodes)) ** 2)
    metadata = {
        "mode": mode.describe(),
        "n_levels": int(n_levels),
        "level_range": [c_min, c_max],
        "energy_quadrature": float(energy),
        "ambiguity_fallbacks": fallbacks,
    }
    return _make_report("coarea", lhs, rhs, config.resolution, metadata)


def check_pair_identity(
    mode_j, mode_k, config: ExtractionConfig | None = None
) -> IdentityReport:
    """(lambda_j^2 - lambda_k^2) * integral of phi_k |phi_j| vs the nodal pair integral.

    This is the weighted identity with f = phi_k: the Helmholtz image of
    an eigenfunction is (lambda_j^2 - lambda_k^2) phi_k exactly.
    """
    config = config or ExtractionConfig()
    if mode_j.manifold != mode_k.manifold:
        raise ValueError("modes live on different manifolds")
    f = test_function_from_mode(mode_k)
    surface, volume, mesh = _surface_and_volume_sides(mode_j, 0.0, f, config)
    metadata = {
        "mode_j": mode_j.describe(),
        "mode_k": mode_k.describe(),
        **_mesh_metadata(mesh),
    }
    return _make_report("pair", volume, surface, config.resolution, metadata)


def _require_equal_eigenvalues(mode_j, mode_k):
    if mode_j.manifold != mode_k.manifold:
        raise ValueError("modes live on different manifolds")
    scale = max(mode_j.eigenvalue, mode_k.eigenvalue, 1.0)
    if abs(mode_j.eigenvalue - mode_k.eigenvalue) > EIGENVALUE_MATCH_TOL * scale:
        raise ValueError("modes must share one eigenvalue")


def check_multiplicity_orthogonality(
    mode_j, mode_k, config: ExtractionConfig | None = None
) -> IdentityReport:
    """For equal eigenvalues, the nodal integral of phi_k |grad phi_j| vanishes.

    A zero-valued identity: the residual is reported relative to the
    problem scale lambda_j^2 * sup|phi_k| * measure(nodal set of phi_j).
    """
    config = config or ExtractionConfig()
    _require_equal_eigenvalues(mode_j, mode_k)
    mesh = extract(mode_j, 0.0, config)
    lhs = weighted_gradient_integral(mesh, mode_k.value)
    scale = mode_j.eigenvalue * mode_k.sup_abs * max(hausdorff_measure(mesh), 1e-300)
    metadata = {
        "mode_j": mode_j.describe(),
        "mode_k": mode_k.describe(),
        "problem_scale": scale,
        **_mesh_metadata(mesh),
    }
    return _make_report("curious", lhs, 0.0, config.resolution, metadata, scale=scale)


def check_abs_pair_symmetry(
    mode_j, mode_k, config: ExtractionConfig | None = None
) -> IdentityReport:
    """For equal eigenvalues the |phi|-weighted nodal integrals are symmetric."""
    config = config or ExtractionConfig()
    _require_equal_eigenvalues(mode_j, mode_k)
    mesh_j = extract(mode_j, 0.0, config)
    mesh_k = extract(mode_k, 0.0, config)
    lhs = weighted_gradient_integral(mesh_j, lambda pts: np.abs(mode_k.value(pts)))
    rhs = weighted_gradient_integral(mesh_k, lambda pts: np.abs(mode_j.value(pts)))
    metadata = {
        "mode_j": mode_j.describe(),
        "mode_k": mode_k.describe(),
        **_mesh_metadata(mesh_j),
    }
    return _make_report("abs-pair", lhs, rhs, config.resolution, metadata)


def check_localized_identity(
    mode, center, radius: float, config: ExtractionConfig | None = None
) -> IdentityReport:
    """The weighted identity with a compactly supported bump as f (torus only)."""
    config = config or ExtractionConfig()
    if mode.manifold.kind != "torus":
        raise ValueError("localized checks run on the flat torus")
    f = bump_test_function(center, radius, dim=mode.manifold.intrinsic_dim)
    surface, volume, mesh = _surface_and_volume_sides(mode, 0.0, f, config)
    metadata = {
        "mode": mode.describe(),
        "test_function": f.description,
        "center": [float(c) for c in np.atleast_1d(center)],
        "radius": float(radius),
        **_mesh_metadata(mesh),
    }
    return _make_report("localized", volume, surface, config.resolution, metadata)


def convergence_study(
    check,
    base_resolution: int,
    n_doublings: int = 2,
    config_template: ExtractionConfig | None = None,
) -> ConvergenceReport:
    """Run ``check`` (a callable taking an ExtractionConfig) at doubling resolutions.

    The estimated order is the average of log2(residual[i] / residual[i+1]);
    saturated sequences (already at the round-off floor) and non-monotone
    ones get a NaN order instead of a misleading number.
    """
    if n_doublings < 2:
        raise ValueError("need at least 2 doublings")
    template = config_template or ExtractionConfig(resolution=base_resolution)
    reports = []
    for i in range(n_doublings + 1):
        cfg = ExtractionConfig(
            resolution=base_resolution * 2 ** i,
            newton_steps=template.newton_steps,
            ambiguity_policy=template.ambiguity_policy,
            newton_tol=template.newton_tol,
            subdivide_depth=template.subdivide_depth,
        )
        reports.append(check(cfg))

    residuals = [r.rel_residual for r in reports]
    saturated = any(r < SATURATION_FLOOR for r in residuals)
    monotone = all(b < a for a, b in zip(residuals, residuals[1:]))
    if saturated or not monotone:
        order = float("nan")
    else:
        ratios = [math.log2(a / b) for a, b in zip(residuals, residuals[1:])]
        order = sum(ratios) / len(ratios)
    return ConvergenceReport(
        reports=tuple(reports),
        estimated_order=order,
        saturated=saturated,
        monotone=monotone,
    )
