"""Annuli, radial grids, spherical quadrature, and tangent frames.

Everything downstream integrates over a spherical shell ``A(r, R)`` by
splitting into a radial factor and a unit-sphere factor, so this module
owns the two discretizations: Gauss-Legendre nodes along the radius and
a product rule on the sphere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError

SPACING_MODES = ("uniform-in-t", "uniform-in-1/t")


@dataclass(frozen=True)
class Annulus:
    """Closed spherical shell ``{x : inner <= |x| <= outer}``.

    A degenerate shell with ``inner == outer`` (a sphere) is allowed as
    the target of a mapping problem; domain-side consumers that need an
    open interval of radii reject it.
    """

    inner: float
    outer: float

    def __post_init__(self):
        if not (math.isfinite(self.inner) and math.isfinite(self.outer)):
            raise DomainError("annulus radii must be finite")
        if self.inner < 0.0:
            raise DomainError("inner radius must be nonnegative")
        if self.inner > self.outer:
            raise DomainError("inner radius must be less than outer")
        if self.outer <= 0.0:
            raise DomainError("outer radius must be positive")

    @property
    def width(self) -> float:
        return self.outer - self.inner

    @property
    def is_degenerate(self) -> bool:
        return self.inner == self.outer


@dataclass(frozen=True)
class AnnulusPair:
    """Domain and target shells of a mapping problem."""

    domain: Annulus
    target: Annulus

    def __post_init__(self):
        if self.domain.is_degenerate:
            raise DomainError("domain annulus must have inner < outer")

    @classmethod
    def from_radii(cls, r: float, R: float, r_star: float, R_star: float) -> "AnnulusPair":
        return cls(Annulus(r, R), Annulus(r_star, R_star))

    @property
    def r(self) -> float:
        return self.domain.inner

    @property
    def R(self) -> float:
        return self.domain.outer

    @property
    def r_star(self) -> float:
        return self.target.inner

    @property
    def R_star(self) -> float:
        return self.target.outer

    def require_weighted(self) -> None:
        """Reject pairs whose weighted energy is undefined.

        The integrand divides by ``|f|^2`` and the radial reduction
        divides by ``t``, so both inner radii must be strictly positive.
        """
        if self.domain.inner <= 0.0 or self.target.inner <= 0.0:
            raise DomainError("weighted energy requires strictly positive inner radii")


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Strictly increasing radial nodes spanning an annulus exactly."""

    annulus: Annulus
    nodes: np.ndarray
    spacing_mode: str

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError("grid needs at least two nodes")
        if not np.all(np.diff(nodes) > 0.0):
            raise DomainError("grid nodes must be strictly increasing")
        if nodes[0] != self.annulus.inner or nodes[-1] != self.annulus.outer:
            raise DomainError("grid must span the annulus exactly")
        if self.spacing_mode not in SPACING_MODES:
            raise ValueError(f"unknown spacing mode {self.spacing_mode!r}")

    @property
    def n_intervals(self) -> int:
        return self.nodes.size - 1


def make_radial_grid(annulus: Annulus, n: int, spacing_mode: str = "uniform-in-t") -> RadialGrid:
    """Build a radial grid with ``n`` intervals (``n + 1`` nodes).

    ``uniform-in-t`` spaces the nodes evenly in the radius itself;
    ``uniform-in-1/t`` spaces them evenly in the reciprocal radius,
    which is the natural coordinate of the radial Euler-Lagrange
    equation.  Endpoints land on the annulus boundary exactly.
    """
    if n < 2:
        raise ValueError("need at least two intervals")
    if annulus.is_degenerate:
        raise DomainError("cannot grid a degenerate annulus")
    if spacing_mode == "uniform-in-t":
        nodes = np.linspace(annulus.inner, annulus.outer, n + 1)
    elif spacing_mode == "uniform-in-1/t":
        if annulus.inner <= 0.0:
            raise DomainError("reciprocal spacing needs a positive inner radius")
        nodes = 1.0 / np.linspace(1.0 / annulus.inner, 1.0 / annulus.outer, n + 1)
    else:
        raise ValueError(f"unknown spacing mode {spacing_mode!r}")
    nodes[0] = annulus.inner
    nodes[-1] = annulus.outer
    return RadialGrid(annulus, nodes, spacing_mode)


@lru_cache(maxsize=64)
def _leggauss(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(a: float, b: float, order: int):
    """Gauss-Legendre nodes and weights on ``[a, b]``."""
    if order < 1:
        raise ValueError("quadrature order must be positive")
    x, w = _leggauss(order)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


@dataclass(frozen=True, eq=False)
class SphericalQuadrature:
    """Product quadrature on the unit sphere.

    Gauss-Legendre in the polar cosine crossed with a uniform azimuthal
    rule.  Weights sum to the sphere area ``4 pi`` and the rule is exact
    for polynomial integrands up to the Gauss degree in ``z``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def integrate(self, values) -> float:
        """Integrate nodal samples, or a callable of the node array."""
        if callable(values):
            values = values(self.nodes)
        values = np.asarray(values, dtype=float)
        if values.shape != self.weights.shape:
            raise ValueError("values must match the node count")
        return float(self.weights @ values)


def make_sphere_quadrature(order: int) -> SphericalQuadrature:
    """Build a sphere rule with ``order`` polar nodes and ``2 * order``
    azimuthal nodes (``2 * order**2`` points in total)."""
    if order < 2:
        raise ValueError("sphere quadrature order must be at least 2")
    z, wz = _leggauss(order)
    n_phi = 2 * order
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    rho = np.sqrt(1.0 - z**2)
    x = np.outer(rho, np.cos(phi)).ravel()
    y = np.outer(rho, np.sin(phi)).ravel()
    zz = np.repeat(z, n_phi)
    nodes = np.column_stack([x, y, zz])
    weights = np.repeat(wz, n_phi) * (np.pi / order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return SphericalQuadrature(nodes=nodes, weights=weights, order=order)


@dataclass(frozen=True)
class TangentFrame:
    """Right-handed orthonormal frame ``(u, v, n)`` at a sphere point."""

    u: np.ndarray
    v: np.ndarray
    n: np.ndarray


_AXES = np.eye(3)


def tangent_frame(normal: np.ndarray) -> TangentFrame:
    """Deterministic tangent frame at a unit vector.

    The helper axis is chosen by the largest-magnitude component of the
    input, so nearby inputs get nearby frames and no cross product ever
    degenerates.
    """
    n = np.asarray(normal, dtype=float)
    if n.shape != (3,):
        raise ValueError("expected a single 3-vector")
    norm = float(np.linalg.norm(n))
    if abs(norm - 1.0) > 1e-9:
        raise ValueError("tangent frames require a unit vector")
    n = n / norm
    helper = _AXES[(int(np.argmax(np.abs(n))) + 1) % 3]
    u = np.cross(helper, n)
    u = u / np.linalg.norm(u)
    v = np.cross(n, u)
    return TangentFrame(u=u, v=v, n=n)


def tangent_frames(points: np.ndarray):
    """Vectorized :func:`tangent_frame` over an ``(N, 3)`` array of unit
    vectors.  Returns ``(U, V)`` arrays of the same shape."""
    pts = np.asarray(points, dtype=float)
    norms = np.linalg.norm(pts, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-9):
        raise ValueError("tangent frames require unit vectors")
    pts = pts / norms[:, None]
    idx = (np.argmax(np.abs(pts), axis=1) + 1) % 3
    helpers = _AXES[idx]
    u = np.cross(helpers, pts)
    u = u / np.linalg.norm(u, axis=1)[:, None]
    v = np.cross(pts, u)
    return u, v
