"""Energy functionals of annulus mappings.

Two quadrature routes coexist on purpose.  Generalized radial maps split
into a radial integral and a sphere integral (the decomposition route);
arbitrary sampled maps go through a full 3-D tensor rule with central
finite differences (the FD route).  Cross-checking the two is one of the
main verification tools, so neither is allowed to call the other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EvaluationError
from .geometry import Annulus, AnnulusPair, gauss_legendre, make_sphere_quadrature
from .maps import (
    AnnulusMap,
    GeneralizedRadialMap,
    RadialProfile,
    SampledMap,
    SampledProfile,
    map_eval_many,
)
from .sphere_maps import conformal_stretch_points


@dataclass(frozen=True)
class EnergyReport:
    """Value of an energy integral plus bookkeeping.

    ``radial_part`` and ``spherical_part`` are filled by the
    decomposition route and sum to ``value``; the FD route leaves them
    as None.  ``refinement_delta`` is the change in value when both
    quadrature orders are doubled, a cheap accuracy estimate.
    """

    value: float
    radial_part: float | None
    spherical_part: float | None
    quad_orders: tuple[int, int]
    refinement_delta: float | None


def _profile_quadrature(profile: RadialProfile, annulus: Annulus, order: int):
    """Radial quadrature triples (t, weight, H, H') for a profile.

    Sampled profiles integrate their piecewise-linear interpolant
    exactly with a two-point rule per interval; closed forms use a
    single global Gauss rule.
    """
    if isinstance(profile, SampledProfile):
        t = profile.grid.nodes
        dt = np.diff(t)
        slopes = np.diff(profile.values) / dt
        mid = 0.5 * (t[:-1] + t[1:])
        off = dt * (0.5 / math.sqrt(3.0))
        tq = np.concatenate([mid - off, mid + off])
        hq = np.concatenate([profile.values[:-1] + (mid - off - t[:-1]) * slopes,
                             profile.values[:-1] + (mid + off - t[:-1]) * slopes])
        hdq = np.concatenate([slopes, slopes])
        wq = np.concatenate([0.5 * dt, 0.5 * dt])
        return tq, wq, hq, hdq
    tq, wq = gauss_legendre(annulus.inner, annulus.outer, order)
    return tq, wq, profile.eval(tq), profile.derivative(tq, 1)


def _require_positive(h: np.ndarray, t: np.ndarray):
    bad = np.nonzero(h <= 0.0)[0]
    if bad.size:
        i = int(bad[0])
        raise EvaluationError(f"profile vanishes at radius t={t[i]!r} (node {i})")


def reduced_energy(profile: RadialProfile, annulus: Annulus, radial_order: int = 64) -> float:
    """One-dimensional weighted energy of a radial profile,
    ``4 pi * integral(t^2 (H'/H)^2 + 2) dt``.

    This equals the weighted energy of the radial map built from the
    profile and an arbitrary Moebius rotation.
    """
    if annulus.inner <= 0.0:
        raise ValueError("reduced energy needs a positive inner radius")
    t, w, h, hd = _profile_quadrature(profile, annulus, radial_order)
    _require_positive(h, t)
    val = float(w @ (t**2 * (hd / h) ** 2)) + 2.0 * annulus.width
    return 4.0 * math.pi * val


def _sphere_factor(f: GeneralizedRadialMap, sphere_order: int) -> float:
    quad = make_sphere_quadrature(sphere_order)
    lam = conformal_stretch_points(f.rotation, quad.nodes)
    return float(quad.weights @ lam**2)


def _decomposed_weighted(f: GeneralizedRadialMap, pair: AnnulusPair,
                         radial_order: int, sphere_order: int):
    t, w, h, hd = _profile_quadrature(f.profile, pair.domain, radial_order)
    _require_positive(h, t)
    radial = 4.0 * math.pi * float(w @ (t**2 * (hd / h) ** 2))
    spherical = 2.0 * pair.domain.width * _sphere_factor(f, sphere_order)
    return radial, spherical


def _decomposed_dirichlet(f: GeneralizedRadialMap, pair: AnnulusPair,
                          radial_order: int, sphere_order: int):
    t, w, h, hd = _profile_quadrature(f.profile, pair.domain, radial_order)
    radial = 4.0 * math.pi * float(w @ (t**2 * hd**2))
    spherical = 2.0 * float(w @ h**2) * _sphere_factor(f, sphere_order)
    return radial, spherical


def _fd_energy(f: AnnulusMap, pair: AnnulusPair, radial_order: int,
               sphere_order: int, weighted: bool, fd_step: float | None) -> float:
    if fd_step is None:
        fd_step = f.fd_step if isinstance(f, SampledMap) else 1e-5
    t, wt = gauss_legendre(pair.domain.inner, pair.domain.outer, radial_order)
    quad = make_sphere_quadrature(sphere_order)
    centers = (t[:, None, None] * quad.nodes[None, :, :]).reshape(-1, 3)
    steps = np.repeat(fd_step * t, quad.nodes.shape[0])
    density = np.zeros(centers.shape[0])
    for k in range(3):
        shift = np.zeros(3)
        shift[k] = 1.0
        plus = map_eval_many(f, centers + steps[:, None] * shift)
        minus = map_eval_many(f, centers - steps[:, None] * shift)
        dk = (plus - minus) / (2.0 * steps[:, None])
        density += np.einsum("ij,ij->i", dk, dk)
    if weighted:
        vals = map_eval_many(f, centers)
        nsq = np.einsum("ij,ij->i", vals, vals)
        bad = np.nonzero(~np.isfinite(nsq) | (nsq <= 1e-300))[0]
        if bad.size:
            i = int(bad[0])
            raise EvaluationError(
                f"image norm vanished at quadrature node {i}, x={centers[i].tolist()}"
            )
        density = density / nsq
    weights = (wt[:, None] * t[:, None] ** 2 * quad.weights[None, :]).ravel()
    return float(weights @ density)


def _energy(f: AnnulusMap, pair: AnnulusPair, radial_order: int, sphere_order: int,
            refine: bool, weighted: bool, fd_step: float | None) -> EnergyReport:
    if radial_order < 2 or sphere_order < 2:
        raise ValueError("quadrature orders must be at least 2")
    if weighted:
        pair.require_weighted()
    if isinstance(f, GeneralizedRadialMap):
        split = _decomposed_weighted if weighted else _decomposed_dirichlet
        radial, spherical = split(f, pair, radial_order, sphere_order)
        value = radial + spherical
        delta = None
        if refine:
            r2, s2 = split(f, pair, 2 * radial_order, 2 * sphere_order)
            delta = abs((r2 + s2) - value)
        return EnergyReport(value, radial, spherical, (radial_order, sphere_order), delta)
    value = _fd_energy(f, pair, radial_order, sphere_order, weighted, fd_step)
    delta = None
    if refine:
        v2 = _fd_energy(f, pair, 2 * radial_order, 2 * sphere_order, weighted, fd_step)
        delta = abs(v2 - value)
    return EnergyReport(value, None, None, (radial_order, sphere_order), delta)


def weighted_energy(f: AnnulusMap, pair: AnnulusPair, radial_order: int = 64,
                    sphere_order: int = 32, refine: bool = True,
                    fd_step: float | None = None) -> EnergyReport:
    """Weighted Dirichlet energy ``integral(|Df|^2 / |f|^2)`` over the
    domain annulus."""
    return _energy(f, pair, radial_order, sphere_order, refine, True, fd_step)


def dirichlet_energy(f: AnnulusMap, pair: AnnulusPair, radial_order: int = 64,
                     sphere_order: int = 32, refine: bool = True,
                     fd_step: float | None = None) -> EnergyReport:
    """Plain Dirichlet energy ``integral(|Df|^2)`` over the domain
    annulus."""
    return _energy(f, pair, radial_order, sphere_order, refine, False, fd_step)


def analytic_min_weighted_energy(pair: AnnulusPair) -> float:
    """Minimum of the weighted energy over homeomorphisms between the
    shells of a pair:

    ``4 pi (2 (R - r) + r R log^2(R_star / r_star) / (R - r))``.
    """
    pair.require_weighted()
    r, R = pair.r, pair.R
    ell = math.log(pair.R_star / pair.r_star)
    return 4.0 * math.pi * (2.0 * (R - r) + r * R * ell * ell / (R - r))


def dirichlet_lower_bound(pair: AnnulusPair) -> float:
    """Lower bound for the plain Dirichlet energy of shell
    homeomorphisms.

    Since ``|f| >= r_star`` on the domain,
    ``integral(|Df|^2) >= r_star^2 * integral(|Df|^2 / |f|^2)``, and the
    right side is at least ``r_star^2`` times the weighted minimum.  The
    bound is strictly below the harmonic-map energy whenever the latter
    exists.
    """
    pair.require_weighted()
    return pair.r_star**2 * analytic_min_weighted_energy(pair)
