"""Closed-form Laplace eigenfunctions and smooth test functions.

Every mode is an explicit eigenfunction of the Laplace-Beltrami operator,
``Delta phi = -lambda^2 phi``, normalized to unit L^2 norm:

* torus plane waves  ``A sin(<k, x> + phase)`` with ``A = sqrt(2/(2 pi)^n)``
  and ``lambda = |k|``;
* circle modes ``sin(k x + phase)/sqrt(pi)`` with ``lambda = k``;
* zonal spherical harmonics ``c_N P_N(cos theta)`` with
  ``c_N = sqrt((2N+1)/(4 pi))`` and ``lambda^2 = N(N+1)``;
* sectoral (highest-weight) spherical harmonics
  ``b_N sin^N(theta) cos(N phi)``, with the normalization constant evaluated
  in the log domain so the family stays usable up to N = 500.

Gradients are returned both as raw chart partial derivatives (what a chart
Newton step needs) and as the Riemannian norm |grad phi| (what surface
integrals need).  On the sphere the metric is diag(1, sin^2 theta), so the
norm divides the longitude partial by sin(theta); all formulas below fold
that division in analytically, and evaluation within 1e-9 of a pole falls
back to the analytic limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .geometry import ManifoldDescriptor, circle, flat_torus, sphere

_POLE_TOL = 1e-9


def _as_points(points: np.ndarray, dim: int) -> tuple[np.ndarray, bool]:
    """Normalize input to shape (m, dim); report whether input was a single point."""
    pts = np.asarray(points, dtype=float)
    if dim == 1 and pts.ndim <= 1:
        single = pts.ndim == 0
        return pts.reshape(-1, 1), single
    if pts.ndim == 1:
        if pts.shape[0] != dim:
            raise ValueError(f"expected a point of dimension {dim}")
        return pts[None, :], True
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise ValueError(f"expected points of shape (m, {dim})")
    return pts, False


def legendre_pair(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate (P_n, P_{n-1}) by the three-term recurrence.

    The upward recurrence (m+1) P_{m+1} = (2m+1) x P_m - m P_{m-1} is
    numerically stable on [-1, 1] and costs O(n) array operations.
    """
    x = np.asarray(x, dtype=float)
    if n < 1:
        raise ValueError("need n >= 1")
    p_prev = np.ones_like(x)
    p = x.copy()
    for m in range(1, n):
        p_prev, p = p, ((2 * m + 1) * x * p - m * p_prev) / (m + 1)
    return p, p_prev


class EigenMode:
    """Base class for the closed-form eigenfunctions.

    Subclasses implement ``value``, ``chart_gradient`` and ``grad_norm``,
    all vectorized over point arrays of shape (m, dim).
    """

    manifold: ManifoldDescriptor
    family: str
    lam: float
    norm_const: float

    @property
    def eigenvalue(self) -> float:
        """The Helmholtz constant lambda^2."""
        return self.lam * self.lam

    @property
    def sup_abs(self) -> float:
        """Analytic sup |phi| over the manifold."""
        raise NotImplementedError

    def value(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def chart_gradient(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def grad_norm(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class TorusPlaneWave(EigenMode):
    """phi(x) = A sin(<k, x> + phase) on the flat torus, lambda = |k|."""

    family = "torus"

    manifold: ManifoldDescriptor
    k: tuple[int, ...]
    phase: float
    lam: float
    norm_const: float

    def value(self, points):
        pts, single = _as_points(points, self.manifold.intrinsic_dim)
        v = self.norm_const * np.sin(pts @ np.asarray(self.k, dtype=float) + self.phase)
        return v[0] if single else v

    def chart_gradient(self, points):
        pts, single = _as_points(points, self.manifold.intrinsic_dim)
        kvec = np.asarray(self.k, dtype=float)
        c = self.norm_const * np.cos(pts @ kvec + self.phase)
        g = c[:, None] * kvec[None, :]
        return g[0] if single else g

    def grad_norm(self, points):
        pts, single = _as_points(points, self.manifold.intrinsic_dim)
        kvec = np.asarray(self.k, dtype=float)
        g = self.norm_const * self.lam * np.abs(np.cos(pts @ kvec + self.phase))
        return g[0] if single else g

    @property
    def sup_abs(self):
        return self.norm_const

    def describe(self):
        return {
            "family": self.family,
            "manifold": self.manifold.name,
            "k": list(self.k),
            "phase": self.phase,
            "lambda": self.lam,
        }


@dataclass(frozen=True)
class CircleMode(EigenMode):
    """phi(x) = sin(k x + phase)/sqrt(pi) on the circle, lambda = k."""

    family = "circle"

    manifold: ManifoldDescriptor
    k: int
    phase: float
    lam: float
    norm_const: float

    def value(self, points):
        pts, single = _as_points(points, 1)
        v = self.norm_const * np.sin(self.k * pts[:, 0] + self.phase)
        return v[0] if single else v

    def chart_gradient(self, points):
        pts, single = _as_points(points, 1)
        g = (self.norm_const * self.k * np.cos(self.k * pts[:, 0] + self.phase))[:, None]
        return g[0] if single else g

    def grad_norm(self, points):
        pts, single = _as_points(points, 1)
        g = self.norm_const * self.k * np.abs(np.cos(self.k * pts[:, 0] + self.phase))
        return g[0] if single else g

    @property
    def sup_abs(self):
        return self.norm_const

    def describe(self):
        return {
            "family": self.family,
            "manifold": self.manifold.name,
            "k": self.k,
            "phase": self.phase,
            "lambda": self.lam,
        }


@dataclass(frozen=True)
class ZonalHarmonic(EigenMode):
    """phi(theta) = c_N P_N(cos theta), lambda^2 = N(N+1)."""

    family = "zonal"

    manifold: ManifoldDescriptor
    degree: int
    lam: float
    norm_const: float

    def value(self, points):
        pts, single = _as_points(points, 2)
        pn, _ = legendre_pair(self.degree, np.cos(pts[:, 0]))
        v = self.norm_const * pn
        return v[0] if single else v

    def _dtheta(self, theta):
        # d/dtheta of P_N(cos theta) via (1-x^2) P_N'(x) = N (P_{N-1} - x P_N),
        # which avoids numerical differentiation.  The analytic pole limit is 0.
        x = np.cos(theta)
        st = np.sin(theta)
        pn, pnm1 = legendre_pair(self.degree, x)
        safe = st > _POLE_TOL
        out = np.zeros_like(theta)
        np.divide(
            -self.norm_const * self.degree * (pnm1 - x * pn),
            st,
            out=out,
            where=safe,
        )
        return out, pn

    def chart_gradient(self, points):
        pts, single = _as_points(points, 2)
        dth, _ = self._dtheta(pts[:, 0])
        g = np.stack([dth, np.zeros_like(dth)], axis=1)
        return g[0] if single else g

    def grad_norm(self, points):
        pts, single = _as_points(points, 2)
        dth, _ = self._dtheta(pts[:, 0])
        g = np.abs(dth)
        return g[0] if single else g

    @property
    def sup_abs(self):
        # |P_N| <= 1 with equality at the poles.
        return self.norm_const

    def describe(self):
        return {
            "family": self.family,
            "manifold": self.manifold.name,
            "degree": self.degree,
            "lambda": self.lam,
        }


@dataclass(frozen=True)
class SectoralHarmonic(EigenMode):
    """phi = b_N sin^N(theta) cos(N phi), lambda^2 = N(N+1).

    b_N is computed from log-gamma values, so powers like sin^500 never
    overflow: all magnitudes are assembled as exp(log b_N + N log sin theta).
    """

    family = "sectoral"

    manifold: ManifoldDescriptor
    degree: int
    lam: float
    norm_const: float
    log_norm_const: float

    def _log_sin_theta(self, theta):
        st = np.sin(theta)
        with np.errstate(divide="ignore"):
            return np.log(np.maximum(st, 0.0)), st

    def value(self, points):
        pts, single = _as_points(points, 2)
        theta, phi = pts[:, 0], pts[:, 1]
        log_st, _ = self._log_sin_theta(theta)
        with np.errstate(invalid="ignore"):
            amp = np.exp(self.log_norm_const + self.degree * log_st)
        amp = np.where(np.isfinite(amp), amp, 0.0)
        v = amp * np.cos(self.degree * phi)
        return v[0] if single else v

    def chart_gradient(self, points):
        pts, single = _as_points(points, 2)
        theta, phi = pts[:, 0], pts[:, 1]
        n = self.degree
        log_st, st = self._log_sin_theta(theta)
        with np.errstate(invalid="ignore"):
            amp_nm1 = np.exp(self.log_norm_const + math.log(n) + (n - 1) * log_st)
        amp_nm1 = np.where(np.isfinite(amp_nm1), amp_nm1, 0.0)
        dth = amp_nm1 * np.cos(theta) * np.cos(n * phi)
        dph = -amp_nm1 * st * np.sin(n * phi)
        g = np.stack([dth, dph], axis=1)
        return g[0] if single else g

    def grad_norm(self, points):
        # |grad phi|^2 = (d_theta phi)^2 + (d_phi phi)^2 / sin^2(theta); the
        # longitude term divided by sin(theta) is b_N N sin^{N-1} sin(N phi),
        # finite for every N >= 1, so no pole guard is needed here.
        pts, single = _as_points(points, 2)
        theta, phi = pts[:, 0], pts[:, 1]
        n = self.degree
        log_st, _ = self._log_sin_theta(theta)
        with np.errstate(invalid="ignore"):
            amp_nm1 = np.exp(self.log_norm_const + math.log(n) + (n - 1) * log_st)
        amp_nm1 = np.where(np.isfinite(amp_nm1), amp_nm1, 0.0)
        ct = np.cos(theta)
        g = amp_nm1 * np.hypot(ct * np.cos(n * phi), np.sin(n * phi))
        return g[0] if single else g

    @property
    def sup_abs(self):
        return self.norm_const

    def describe(self):
        return {
            "family": self.family,
            "manifold": self.manifold.name,
            "degree": self.degree,
            "lambda": self.lam,
        }


def torus_mode(dim: int, k: Sequence[int], phase: float = 0.0) -> TorusPlaneWave:
    """Plane wave A sin(<k, x> + phase) on the flat torus of dimension dim."""
    k = tuple(int(c) for c in k)
    if len(k) != dim:
        raise ValueError("wave vector length must match dimension")
    if all(c == 0 for c in k):
        raise ValueError("wave vector must be nonzero")
    lam = math.sqrt(sum(c * c for c in k))
    amplitude = math.sqrt(2.0 / (2.0 * math.pi) ** dim)
    mode = TorusPlaneWave(flat_torus(dim), k, float(phase), lam, amplitude)
    return mode


def circle_mode(k: int, phase: float = 0.0) -> CircleMode:
    """sin(k x + phase)/sqrt(pi) on the circle."""
    k = int(k)
    if k < 1:
        raise ValueError("frequency must be a positive integer")
    mode = CircleMode(circle(), k, float(phase), float(k), 1.0 / math.sqrt(math.pi))
    return mode


def zonal_harmonic(degree: int) -> ZonalHarmonic:
    """Rotationally invariant spherical harmonic of the given degree."""
    n = int(degree)
    if n < 1:
        raise ValueError("degree must be a positive integer")
    lam = math.sqrt(n * (n + 1.0))
    c = math.sqrt((2 * n + 1) / (4.0 * math.pi))
    mode = ZonalHarmonic(sphere(), n, lam, c)
    return mode


def sectoral_harmonic(degree: int) -> SectoralHarmonic:
    """Highest-weight spherical harmonic of the given degree (N <= 500)."""
    n = int(degree)
    if not 1 <= n <= 500:
        raise ValueError("degree must lie in [1, 500]")
    lam = math.sqrt(n * (n + 1.0))
    # 1 = b^2 * pi * I(2N+1) with I(m) = integral of sin^m over [0, pi]
    #   = sqrt(pi) Gamma((m+1)/2) / Gamma(m/2 + 1).
    log_i = 0.5 * math.log(math.pi) + math.lgamma(n + 1.0) - math.lgamma(n + 1.5)
    log_b = -0.5 * (math.log(math.pi) + log_i)
    mode = SectoralHarmonic(sphere(), n, lam, math.exp(log_b), log_b)
    return mode


@dataclass(frozen=True)
class TestFunction:
    """A smooth function with analytic gradient and Laplacian.

    ``value``, ``chart_gradient`` and ``laplacian`` are vectorized callables
    over point arrays.  Identity checks always use the analytic Laplacian;
    nothing in this package discretizes a differential operator.
    """

    manifold: ManifoldDescriptor
    value: Callable[[np.ndarray], np.ndarray]
    chart_gradient: Callable[[np.ndarray], np.ndarray]
    laplacian: Callable[[np.ndarray], np.ndarray]
    description: str = "test function"
    sup_bound: float = math.inf

    def helmholtz(self, lambda_ref: float) -> Callable[[np.ndarray], np.ndarray]:
        """Return the callable (Delta + lambda_ref^2) f."""
        lam2 = lambda_ref * lambda_ref
        return lambda pts: self.laplacian(pts) + lam2 * self.value(pts)


def constant_test_function(manifold: ManifoldDescriptor, value: float = 1.0) -> TestFunction:
    """The constant function, whose Laplacian vanishes identically."""
    dim = manifold.intrinsic_dim

    def _value(pts):
        pts, single = _as_points(pts, dim)
        out = np.full(pts.shape[0], float(value))
        return out[0] if single else out

    def _grad(pts):
        pts, single = _as_points(pts, dim)
        out = np.zeros_like(pts)
        return out[0] if single else out

    def _lap(pts):
        pts, single = _as_points(pts, dim)
        out = np.zeros(pts.shape[0])
        return out[0] if single else out

    return TestFunction(
        manifold, _value, _grad, _lap,
        description=f"constant {value!r}",
        sup_bound=abs(float(value)),
    )


@dataclass(frozen=True)
class ModeExpansion:
    """Finite linear combination sum_i c_i phi_i of modes on one manifold."""

    manifold: ManifoldDescriptor
    coefficients: tuple[float, ...]
    modes: tuple[EigenMode, ...]

    def __post_init__(self):
        if len(self.coefficients) != len(self.modes):
            raise ValueError("one coefficient per mode")
        for m in self.modes:
            if m.manifold != self.manifold:
                raise ValueError("all modes must live on the same manifold")

    def value(self, pts):
        return sum(c * m.value(pts) for c, m in zip(self.coefficients, self.modes))

    def chart_gradient(self, pts):
        return sum(c * m.chart_gradient(pts) for c, m in zip(self.coefficients, self.modes))

    def laplacian(self, pts):
        return sum(
            -c * m.eigenvalue * m.value(pts)
            for c, m in zip(self.coefficients, self.modes)
        )

    def grad_norm(self, pts):
        p, single = _as_points(pts, self.manifold.intrinsic_dim)
        g = sum(c * m.chart_gradient(p) for c, m in zip(self.coefficients, self.modes))
        if self.manifold.kind == "sphere":
            st = np.maximum(np.sin(p[:, 0]), 1e-12)
            out = np.hypot(g[:, 0], g[:, 1] / st)
        else:
            out = np.linalg.norm(g, axis=1)
        return out[0] if single else out

    def helmholtz_image(self, lambda_ref: float, pts):
        """(Delta + lambda_ref^2) of the expansion, via the eigenvalue identity."""
        lam2 = lambda_ref * lambda_ref
        return sum(
            c * (lam2 - m.eigenvalue) * m.value(pts)
            for c, m in zip(self.coefficients, self.modes)
        )


def mode_expansion(
    coefficients: Sequence[float], modes: Sequence[EigenMode]
) -> ModeExpansion:
    if not modes:
        raise ValueError("expansion needs at least one mode")
    return ModeExpansion(modes[0].manifold, tuple(float(c) for c in coefficients), tuple(modes))


def apply_helmholtz(expansion: ModeExpansion, lambda_ref: float) -> TestFunction:
    """Package an expansion as a test function with exact Helmholtz image.

    Because each phi_mu is an exact eigenfunction, (Delta + lambda_ref^2)
    applied to the expansion is sum_mu c_mu (lambda_ref^2 - mu^2) phi_mu;
    the returned function's Laplacian uses the same identity.
    """
    sup = sum(abs(c) * m.sup_abs for c, m in zip(expansion.coefficients, expansion.modes))
    return TestFunction(
        expansion.manifold,
        expansion.value,
        expansion.chart_gradient,
        expansion.laplacian,
        description="mode expansion ("
        + ", ".join(f"{c:+g}*{m.family}" for c, m in zip(expansion.coefficients, expansion.modes))
        + ")",
        sup_bound=sup,
    )


def test_function_from_mode(mode: EigenMode) -> TestFunction:
    """View a single eigenfunction as a test function."""
    return apply_helmholtz(mode_expansion([1.0], [mode]), 0.0)


def bump_test_function(
    center: Sequence[float], radius: float, dim: int = 2
) -> TestFunction:
    """Compactly supported C^2 bump (1 - r^2/radius^2)^3 on the flat torus.

    r is the periodic distance to ``center``.  The radial profile has two
    vanishing derivatives at r = radius, so value, gradient and Laplacian
    are all continuous across the support boundary.  Requires
    radius < pi so the support stays inside one fundamental domain.
    """
    center = np.asarray(center, dtype=float)
    if center.shape != (dim,):
        raise ValueError("center must match the torus dimension")
    if not 0 < radius < math.pi:
        raise ValueError("radius must lie in (0, pi)")
    manifold = flat_torus(dim)
    r2cut = radius * radius

    def _disp(pts):
        return np.mod(pts - center[None, :] + math.pi, 2 * math.pi) - math.pi

    def _value(pts):
        pts, single = _as_points(pts, dim)
        u = np.sum(_disp(pts) ** 2, axis=1)
        s = np.maximum(1.0 - u / r2cut, 0.0)
        out = s ** 3
        return out[0] if single else out

    def _grad(pts):
        pts, single = _as_points(pts, dim)
        d = _disp(pts)
        u = np.sum(d ** 2, axis=1)
        s = np.maximum(1.0 - u / r2cut, 0.0)
        coef = -6.0 * s ** 2 / r2cut
        out = coef[:, None] * d
        return out[0] if single else out

    def _lap(pts):
        # With f = g(u), u = r^2: Delta f = 4 u g''(u) + 2 dim g'(u).
        pts, single = _as_points(pts, dim)
        u = np.sum(_disp(pts) ** 2, axis=1)
        s = np.maximum(1.0 - u / r2cut, 0.0)
        inside = s > 0.0
        gp = -3.0 * s ** 2 / r2cut
        gpp = 6.0 * s / (r2cut * r2cut)
        out = np.where(inside, 4.0 * u * gpp + 2.0 * dim * gp, 0.0)
        return out[0] if single else out

    return TestFunction(
        manifold, _value, _grad, _lap,
        description=f"bump(center={center.tolist()}, radius={radius})",
        sup_bound=1.0,
    )
