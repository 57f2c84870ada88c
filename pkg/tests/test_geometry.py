import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from annuli import (
    Annulus,
    AnnulusPair,
    DomainError,
    RadialGrid,
    gauss_legendre,
    make_radial_grid,
    make_sphere_quadrature,
    tangent_frame,
    tangent_frames,
)


class TestAnnulus:
    def test_valid_annulus_has_width(self):
        a = Annulus(1.0, 2.5)
        assert a.width == 1.5
        assert not a.is_degenerate

    def test_equal_radii_is_degenerate_but_legal(self):
        assert Annulus(1.5, 1.5).is_degenerate

    @pytest.mark.parametrize("inner,outer", [(2.0, 1.0), (-1.0, 1.0), (1.0, -2.0), (0.0, 0.0)])
    def test_bad_radii_rejected(self, inner, outer):
        with pytest.raises(DomainError):
            Annulus(inner, outer)

    def test_error_message_names_the_ordering(self):
        with pytest.raises(DomainError, match="inner radius must be less than outer"):
            Annulus(2.0, 1.0)

    def test_nan_radii_rejected(self):
        with pytest.raises(DomainError):
            Annulus(math.nan, 1.0)


class TestAnnulusPair:
    def test_from_radii_roundtrip(self):
        p = AnnulusPair.from_radii(1.0, 2.0, 0.5, 3.0)
        assert (p.r, p.R, p.r_star, p.R_star) == (1.0, 2.0, 0.5, 3.0)

    def test_weighted_requires_positive_inner_radii(self):
        p = AnnulusPair.from_radii(0.0, 1.0, 1.0, 2.0)
        with pytest.raises(DomainError):
            p.require_weighted()

    def test_degenerate_target_is_weighted_ok(self):
        AnnulusPair.from_radii(1.0, 2.0, 1.5, 1.5).require_weighted()


class TestRadialGrid:
    def test_uniform_grid_hits_endpoints_exactly(self):
        g = make_radial_grid(Annulus(1.0, 2.0), 7)
        assert g.nodes[0] == 1.0 and g.nodes[-1] == 2.0
        assert g.nodes.size == 8
        assert np.allclose(np.diff(g.nodes), 1.0 / 7.0)

    def test_reciprocal_grid_is_uniform_in_one_over_t(self):
        g = make_radial_grid(Annulus(1.0, 2.0), 10, "uniform-in-1/t")
        inv = 1.0 / g.nodes
        assert np.allclose(np.diff(inv), inv[1] - inv[0])
        assert g.nodes[0] == 1.0 and g.nodes[-1] == 2.0

    def test_nodes_must_increase(self):
        with pytest.raises(DomainError):
            RadialGrid(Annulus(1.0, 2.0), np.array([1.0, 1.5, 1.4, 2.0]), "uniform-in-t")

    def test_nodes_must_match_annulus(self):
        with pytest.raises(DomainError):
            RadialGrid(Annulus(1.0, 2.0), np.array([1.0, 1.5, 2.1]), "uniform-in-t")

    def test_unknown_spacing_mode_rejected(self):
        with pytest.raises(ValueError):
            make_radial_grid(Annulus(1.0, 2.0), 4, "chebyshev")

    def test_needs_at_least_one_interval(self):
        with pytest.raises(ValueError):
            make_radial_grid(Annulus(1.0, 2.0), 0)


class TestGaussLegendre:
    def test_exact_for_polynomials_below_2n(self):
        x, w = gauss_legendre(0.0, 1.0, 4)
        # degree 7 is the highest a 4-point rule integrates exactly
        assert math.isclose(float(w @ x**7), 1.0 / 8.0, rel_tol=1e-14)

    def test_interval_scaling(self):
        x, w = gauss_legendre(1.0, 3.0, 6)
        assert math.isclose(float(np.sum(w)), 2.0, rel_tol=1e-14)
        assert math.isclose(float(w @ x**2), (27.0 - 1.0) / 3.0, rel_tol=1e-14)


class TestSphereQuadrature:
    def test_weights_sum_to_sphere_area(self):
        q = make_sphere_quadrature(16)
        assert math.isclose(float(np.sum(q.weights)), 4.0 * math.pi, rel_tol=1e-13)

    def test_nodes_are_unit_vectors(self):
        q = make_sphere_quadrature(8)
        assert np.allclose(np.linalg.norm(q.nodes, axis=1), 1.0, atol=1e-14)

    def test_integrates_z_squared(self):
        # int z^2 over the unit sphere = 4 pi / 3
        q = make_sphere_quadrature(8)
        val = q.integrate(lambda p: p[:, 2] ** 2)
        assert math.isclose(val, 4.0 * math.pi / 3.0, rel_tol=1e-13)

    def test_odd_moments_vanish(self):
        q = make_sphere_quadrature(12)
        for axis in range(3):
            assert abs(q.integrate(lambda p: p[:, axis])) < 1e-13

    def test_order_must_be_positive(self):
        with pytest.raises(ValueError):
            make_sphere_quadrature(0)


@st.composite
def unit_vectors(draw):
    v = np.array([draw(st.floats(-1, 1)) for _ in range(3)])
    n = np.linalg.norm(v)
    if n < 1e-3:
        v = np.array([1.0, 0.0, 0.0])
        n = 1.0
    return v / n


class TestTangentFrames:
    @given(unit_vectors())
    @settings(max_examples=50, deadline=None)
    def test_frame_is_right_handed_orthonormal(self, n):
        frame = tangent_frame(n)
        for a in (frame.u, frame.v, frame.n):
            assert math.isclose(float(np.linalg.norm(a)), 1.0, abs_tol=1e-12)
        assert abs(float(frame.u @ frame.v)) < 1e-12
        assert abs(float(frame.u @ frame.n)) < 1e-12
        assert np.allclose(np.cross(frame.u, frame.v), frame.n, atol=1e-12)

    def test_rejects_non_unit_normal(self):
        with pytest.raises(ValueError):
            tangent_frame(np.array([0.0, 0.0, 2.0]))

    def test_vectorized_frames_match_scalar(self):
        pts = make_sphere_quadrature(4).nodes
        u, v = tangent_frames(pts)
        for i in range(pts.shape[0]):
            f = tangent_frame(pts[i])
            assert np.allclose(u[i], f.u)
            assert np.allclose(v[i], f.v)
