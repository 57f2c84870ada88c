import math

import numpy as np
import pytest

from annuli import (
    AnnulusPair,
    DomainError,
    ExponentialProfile,
    HarmonicProfile,
    analytic_min_weighted_energy,
    discrete_reduced_energy,
    el_residual,
    exp_profile_from_boundary,
    gradient_descent_minimize,
    make_radial_grid,
    minimize_reduced_energy,
    reduced_energy_gradient,
    shoot_el,
    weighted_harmonic_residual,
)
from annuli.verify import random_annulus_pair


class TestElResidual:
    """Stationarity defect 2 H H' - t H'^2 + t H H''."""

    def test_vanishes_on_the_exponential_family(self, rng):
        ts = np.linspace(0.8, 4.0, 100)
        for _ in range(20):
            p = ExponentialProfile(rng.uniform(0.5, 2.0), rng.uniform(-1.5, 1.5))
            assert np.max(np.abs(el_residual(p, ts))) < 1e-9

    def test_constant_profile_is_stationary(self):
        ts = np.linspace(0.5, 3.0, 50)
        assert np.max(np.abs(el_residual(ExponentialProfile(1.0, 0.0), ts))) < 1e-14

    def test_known_nonzero_value(self):
        # H = t + 1/t^2: H'(1) = -1, H''(1) = 6, H(1) = 2
        # residual = 2*2*(-1) - 1*1 + 1*2*6 = 7
        assert math.isclose(float(el_residual(HarmonicProfile(1.0, 1.0), 1.0)), 7.0,
                            rel_tol=1e-13)

    def test_sampled_profile_interior_only(self, canonical_pair):
        sol = minimize_reduced_energy(canonical_pair, make_radial_grid(canonical_pair.domain, 32))
        with pytest.raises(DomainError):
            el_residual(sol.profile, 1.0)


class TestWeightedHarmonicResidual:
    def test_vanishes_on_the_exponential_family(self, rng):
        ts = np.linspace(0.8, 4.0, 100)
        for _ in range(20):
            p = ExponentialProfile(rng.uniform(0.5, 2.0), rng.uniform(-1.5, 1.5))
            assert np.max(np.abs(weighted_harmonic_residual(p, ts))) < 1e-9

    def test_equals_scaled_el_residual(self, rng):
        p = ExponentialProfile(1.3, 0.7)
        ts = np.linspace(0.9, 3.0, 40)
        lhs = weighted_harmonic_residual(p, ts)
        rhs = el_residual(p, ts) / (ts**2 * p.eval(ts))
        assert np.allclose(lhs, rhs, atol=1e-12)

    def test_linear_profile_is_not_weighted_harmonic(self):
        # H = t is Euclidean harmonic yet fails the weighted equation
        val = float(weighted_harmonic_residual(HarmonicProfile(1.0, 0.0), 1.0))
        assert math.isclose(val, 1.0, rel_tol=1e-12)


class TestDiscreteMinimization:
    def test_reaches_analytic_minimum_from_above(self, canonical_pair):
        target = analytic_min_weighted_energy(canonical_pair)
        sol = minimize_reduced_energy(canonical_pair, make_radial_grid(canonical_pair.domain, 1000))
        assert sol.converged
        assert sol.energy >= target - 1e-9 * target
        assert (sol.energy - target) / target < 1e-5
        assert sol.sup_error_vs_closed_form < 1e-5

    def test_error_drops_quadratically_with_refinement(self, canonical_pair):
        sups = []
        for n in (250, 500, 1000):
            sol = minimize_reduced_energy(canonical_pair,
                                          make_radial_grid(canonical_pair.domain, n))
            sups.append(sol.sup_error_vs_closed_form)
        for coarse, fine in zip(sups, sups[1:]):
            assert 3.2 < coarse / fine < 4.8

    def test_reciprocal_grid_reproduces_closed_form_exactly(self, canonical_pair):
        # K = c1 + c2/t is affine in 1/t, hence representable on this grid
        grid = make_radial_grid(canonical_pair.domain, 1000, "uniform-in-1/t")
        sol = minimize_reduced_energy(canonical_pair, grid)
        assert sol.sup_error_vs_closed_form < 1e-12

    def test_boundary_values_exact(self, canonical_pair):
        sol = minimize_reduced_energy(canonical_pair, make_radial_grid(canonical_pair.domain, 64))
        assert sol.profile.values[0] == canonical_pair.r_star
        assert sol.profile.values[-1] == canonical_pair.R_star

    def test_degenerate_target_is_constant(self):
        pair = AnnulusPair.from_radii(1.0, 2.0, 1.5, 1.5)
        sol = minimize_reduced_energy(pair, make_radial_grid(pair.domain, 16))
        assert np.all(sol.profile.values == 1.5)
        assert math.isclose(sol.energy, 8.0 * math.pi, rel_tol=1e-15)

    def test_grid_and_pair_must_share_the_domain(self, canonical_pair):
        other = make_radial_grid(AnnulusPair.from_radii(1.0, 3.0, 1.0, 2.0).domain, 16)
        with pytest.raises(ValueError):
            minimize_reduced_energy(canonical_pair, other)


class TestEnergyGradient:
    def test_zero_at_the_discrete_minimizer(self, canonical_pair):
        grid = make_radial_grid(canonical_pair.domain, 200)
        sol = minimize_reduced_energy(canonical_pair, grid)
        g = reduced_energy_gradient(np.log(sol.profile.values), grid)
        assert np.max(np.abs(g)) < 1e-10

    def test_zero_for_constant_log_profile(self, canonical_pair):
        grid = make_radial_grid(canonical_pair.domain, 50)
        g = reduced_energy_gradient(np.full(51, 0.7), grid)
        assert np.max(np.abs(g)) == 0.0

    def test_matches_central_differences(self, canonical_pair, rng):
        grid = make_radial_grid(canonical_pair.domain, 50)
        k = np.log(exp_profile_from_boundary(canonical_pair, "increasing").eval(grid.nodes))
        k[1:-1] += rng.uniform(-0.3, 0.3, size=49)
        g = reduced_energy_gradient(k, grid)
        step = 1e-6
        fd = np.empty_like(g)
        for j in range(1, 50):
            kp = k.copy()
            kp[j] += step
            km = k.copy()
            km[j] -= step
            fd[j - 1] = (discrete_reduced_energy(kp, grid) - discrete_reduced_energy(km, grid)) / (2 * step)
        assert np.max(np.abs(g - fd)) / np.max(np.abs(fd)) < 1e-6


class TestGradientDescent:
    def test_agrees_with_direct_solve(self, canonical_pair):
        grid = make_radial_grid(canonical_pair.domain, 200)
        direct = minimize_reduced_energy(canonical_pair, grid)
        gd = gradient_descent_minimize(canonical_pair, grid)
        assert gd.converged
        assert abs(gd.energy - direct.energy) / direct.energy < 1e-6

    def test_agreement_over_random_pairs(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            pair = random_annulus_pair(rng)
            grid = make_radial_grid(pair.domain, 200)
            direct = minimize_reduced_energy(pair, grid)
            gd = gradient_descent_minimize(pair, grid)
            assert abs(gd.energy - direct.energy) / direct.energy < 1e-6

    def test_exact_line_search_also_descends(self, canonical_pair):
        grid = make_radial_grid(canonical_pair.domain, 100)
        direct = minimize_reduced_energy(canonical_pair, grid)
        gd = gradient_descent_minimize(canonical_pair, grid, step_rule="exact",
                                       max_iter=50_000)
        assert abs(gd.energy - direct.energy) / direct.energy < 1e-6

    def test_fixed_step_descends(self, canonical_pair):
        grid = make_radial_grid(canonical_pair.domain, 32)
        start = gradient_descent_minimize(canonical_pair, grid, max_iter=0)
        gd = gradient_descent_minimize(canonical_pair, grid, step_rule="fixed:0.001",
                                       max_iter=5000)
        assert gd.energy < start.energy

    def test_zero_iterations_returns_initial_guess(self, canonical_pair):
        grid = make_radial_grid(canonical_pair.domain, 32)
        gd = gradient_descent_minimize(canonical_pair, grid, max_iter=0)
        assert not gd.converged
        assert gd.iterations == 0
        # affine log interpolation between the boundary values
        k = np.log(gd.profile.values)
        assert np.allclose(np.diff(k, 2), 0.0, atol=1e-12)

    def test_degenerate_target_converges_immediately(self):
        pair = AnnulusPair.from_radii(1.0, 2.0, 2.0, 2.0)
        gd = gradient_descent_minimize(pair, make_radial_grid(pair.domain, 32))
        assert gd.converged and gd.iterations == 0

    def test_unknown_step_rule_rejected(self, canonical_pair):
        grid = make_radial_grid(canonical_pair.domain, 16)
        with pytest.raises(ValueError):
            gradient_descent_minimize(canonical_pair, grid, step_rule="newton")

    def test_nonpositive_fixed_step_rejected(self, canonical_pair):
        grid = make_radial_grid(canonical_pair.domain, 16)
        with pytest.raises(ValueError):
            gradient_descent_minimize(canonical_pair, grid, step_rule=-0.5)


class TestShooting:
    def test_recovers_the_closed_form(self, canonical_pair):
        result = shoot_el(canonical_pair)
        assert result.converged
        # initial slope of H1 at r=1 is 2 for this pair
        assert math.isclose(result.initial_slope, 2.0, abs_tol=1e-6)
        assert math.isclose(result.profile.eval(1.5), math.exp(2.0 / 3.0), rel_tol=1e-6)
        assert abs(result.boundary_miss) < 1e-9

    def test_slope_matches_profile_derivative(self, canonical_pair):
        h1 = exp_profile_from_boundary(canonical_pair, "increasing")
        result = shoot_el(canonical_pair)
        assert math.isclose(result.initial_slope, h1.derivative(1.0), abs_tol=1e-6)

    def test_profile_tracks_closed_form_on_random_pairs(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            pair = random_annulus_pair(rng, max_domain_ratio=8.0)
            orientation = "increasing" if pair.R_star >= pair.r_star else "decreasing"
            closed = exp_profile_from_boundary(pair, orientation)
            result = shoot_el(pair)
            assert result.converged
            nodes = result.profile.grid.nodes
            sup = np.max(np.abs(result.profile.values - closed.eval(nodes)))
            assert sup < 1e-5 * max(pair.r_star, pair.R_star)

    def test_degenerate_target_needs_zero_slope(self):
        pair = AnnulusPair.from_radii(1.0, 2.0, 1.5, 1.5)
        result = shoot_el(pair)
        assert result.converged
        assert result.initial_slope == 0.0
        assert np.allclose(result.profile.values, 1.5, rtol=1e-12)

    def test_bracket_failure_reports_instead_of_raising(self):
        # very wide domain: the true slope lies outside the search bracket
        pair = AnnulusPair.from_radii(0.1, 2.0, 1.0, 1.05)
        result = shoot_el(pair)
        assert not result.converged
        assert result.profile is None
