"""Model manifolds and quadrature grids.

Three closed model geometries are supported, all with their standard round
metrics and a fixed coordinate chart:

* the circle of circumference 2*pi, chart x in [0, 2*pi);
* the flat square torus in dimension 2 or 3, chart [0, 2*pi)^n;
* the round unit 2-sphere, chart (theta, phi) with colatitude theta in
  (0, pi) and longitude phi in [0, 2*pi).

Grids on the periodic manifolds are uniform tensor grids (periodic trapezoid
weights, which are spectrally accurate for trigonometric integrands).  The
sphere uses Gauss-Legendre nodes in cos(theta) crossed with a uniform
longitude grid, so no grid node ever sits on a pole.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ManifoldDescriptor:
    """Identifies one of the model manifolds.

    Attributes
    ----------
    kind : str
        One of ``"circle"``, ``"torus"``, ``"sphere"``.
    intrinsic_dim : int
        Dimension of the manifold (1, 2 or 3).
    period : float
        Chart period of the flat geometries; fixed to 2*pi.  Unused by the
        sphere chart but kept so every descriptor serializes the same way.
    """

    kind: str
    intrinsic_dim: int
    period: float = TWO_PI

    def __post_init__(self) -> None:
        if self.kind not in ("circle", "torus", "sphere"):
            raise ValueError(f"unknown manifold kind {self.kind!r}")
        if self.kind == "circle" and self.intrinsic_dim != 1:
            raise ValueError("circle is one-dimensional")
        if self.kind == "torus" and self.intrinsic_dim not in (2, 3):
            raise ValueError("flat torus supported in dimension 2 or 3")
        if self.kind == "sphere" and self.intrinsic_dim != 2:
            raise ValueError("only the 2-sphere is supported")

    @property
    def volume(self) -> float:
        """Total Riemannian volume."""
        if self.kind == "circle":
            return TWO_PI
        if self.kind == "torus":
            return TWO_PI ** self.intrinsic_dim
        return 4.0 * math.pi

    @property
    def is_periodic(self) -> bool:
        return self.kind in ("circle", "torus")

    @property
    def name(self) -> str:
        if self.kind == "torus":
            return f"torus{self.intrinsic_dim}"
        return self.kind


def circle() -> ManifoldDescriptor:
    return ManifoldDescriptor("circle", 1)


def flat_torus(dim: int) -> ManifoldDescriptor:
    return ManifoldDescriptor("torus", dim)


def sphere() -> ManifoldDescriptor:
    return ManifoldDescriptor("sphere", 2)


def manifold_from_name(name: str) -> ManifoldDescriptor:
    """Inverse of ``ManifoldDescriptor.name`` (CLI spelling)."""
    table = {
        "circle": circle,
        "torus2": lambda: flat_torus(2),
        "torus3": lambda: flat_torus(3),
        "sphere": sphere,
    }
    if name not in table:
        raise ValueError(f"unknown manifold {name!r} (expected one of {sorted(table)})")
    return table[name]()


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Volume quadrature rule: nodes (chart coordinates) and positive weights.

    Weights sum to the manifold volume.  Node ordering is deterministic:
    row-major over the tensor axes, with the sphere ordered by descending
    colatitude block (ascending cos(theta)) then longitude.
    """

    manifold: ManifoldDescriptor
    nodes: np.ndarray
    weights: np.ndarray
    resolution: int

    def __post_init__(self) -> None:
        if self.nodes.ndim != 2 or self.nodes.shape[1] != self.chart_dim:
            raise ValueError("nodes must have shape (n, chart_dim)")
        if self.weights.shape != (self.nodes.shape[0],):
            raise ValueError("weights must match nodes")

    @property
    def chart_dim(self) -> int:
        return self.manifold.intrinsic_dim


def build_grid(manifold: ManifoldDescriptor, resolution: int) -> QuadratureGrid:
    """Build the standard quadrature grid at the given per-axis resolution.

    Parameters
    ----------
    manifold : ManifoldDescriptor
    resolution : int
        Per-axis sample count, at least 4.  The torus grid has
        ``resolution**dim`` nodes; the sphere grid pairs ``resolution``
        Gauss-Legendre nodes in cos(theta) with ``2*resolution`` uniform
        longitudes.
    """
    if resolution < 4:
        raise ValueError("resolution must be at least 4")
    if manifold.kind == "circle":
        x = TWO_PI * np.arange(resolution) / resolution
        nodes = x[:, None]
        weights = np.full(resolution, TWO_PI / resolution)
    elif manifold.kind == "torus":
        n = manifold.intrinsic_dim
        axis = TWO_PI * np.arange(resolution) / resolution
        mesh = np.meshgrid(*([axis] * n), indexing="ij")
        nodes = np.stack([m.ravel() for m in mesh], axis=1)
        weights = np.full(nodes.shape[0], (TWO_PI / resolution) ** n)
    else:
        x, w = np.polynomial.legendre.leggauss(resolution)
        theta = np.arccos(x)
        m = 2 * resolution
        phi = TWO_PI * np.arange(m) / m
        th_grid, ph_grid = np.meshgrid(theta, phi, indexing="ij")
        nodes = np.stack([th_grid.ravel(), ph_grid.ravel()], axis=1)
        weights = np.repeat(w * (TWO_PI / m), m)
    return QuadratureGrid(manifold, nodes, weights, resolution)


def pairwise_sum(values: np.ndarray) -> float:
    """Deterministic pairwise reduction of a 1-d array.

    Adjacent elements are paired and the halved array is reduced again, so
    the summation tree is fixed by the input length alone.  Round-off grows
    like O(log n) rather than O(n) for sequential accumulation.
    """
    x = np.asarray(values, dtype=float).ravel()
    n = x.size
    if n == 0:
        return 0.0
    x = x.copy()
    while n > 1:
        half = n // 2
        paired = x[0 : 2 * half : 2] + x[1 : 2 * half : 2]
        if n % 2:
            x[:half] = paired
            x[half] = x[n - 1]
            n = half + 1
        else:
            x[:half] = paired
            n = half
    return float(x[0])


def integrate(grid: QuadratureGrid, samples: np.ndarray) -> float:
    """Weighted sum of samples over the grid (deterministic pairwise order)."""
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.shape != grid.weights.shape:
        raise ValueError(
            f"got {samples.size} samples for a grid of {grid.weights.size} nodes"
        )
    return pairwise_sum(grid.weights * samples)


def wrap_periodic(points: np.ndarray) -> np.ndarray:
    """Wrap chart coordinates of a flat geometry into [0, 2*pi)."""
    return np.mod(points, TWO_PI)


def periodic_difference(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Componentwise displacement p - q wrapped into [-pi, pi)."""
    return np.mod(np.asarray(p) - np.asarray(q) + math.pi, TWO_PI) - math.pi


def embed_sphere(points: np.ndarray) -> np.ndarray:
    """Map sphere chart coordinates (theta, phi) to unit vectors in R^3."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    theta, phi = pts[:, 0], pts[:, 1]
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=1)


def segment_length(manifold: ManifoldDescriptor, p: np.ndarray, q: np.ndarray) -> float:
    """Length of the short segment between two chart points.

    On the torus and circle this is the Euclidean length of the
    periodic-minimal displacement; on the sphere it is the chord length of
    the R^3 embeddings (the straight-line stand-in used for short mesh
    edges, accurate to second order in the edge length).
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if manifold.is_periodic:
        return float(np.linalg.norm(periodic_difference(p, q)))
    a = embed_sphere(p)[0]
    b = embed_sphere(q)[0]
    return float(np.linalg.norm(a - b))
