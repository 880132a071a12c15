import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isospec import (
    Grid,
    GridFunction,
    GridMismatchError,
    ZeroNormError,
    count_nodes,
    cumulative_integral,
    derivative,
    inner_product,
    normalize,
)


def grid_fn(x_min, x_max, n, fn):
    g = Grid(x_min, x_max, n)
    return GridFunction(g, fn(g.points))


class TestGrid:
    def test_spacing_and_points(self):
        g = Grid(0.0, 1.0, 101)
        assert g.h == pytest.approx(0.01)
        assert g.points[0] == 0.0
        assert g.points[50] == pytest.approx(0.5)
        assert len(g.points) == 101

    def test_invalid(self):
        with pytest.raises(ValueError):
            Grid(0.0, 1.0, 2)
        with pytest.raises(ValueError):
            Grid(1.0, 0.0, 11)

    def test_refined_keeps_nodes(self):
        g = Grid(-1.0, 3.0, 11)
        r = g.refined(2)
        assert r.n_points == 21
        assert np.allclose(r.points[::2], g.points)

    def test_values_validated(self):
        g = Grid(0.0, 1.0, 5)
        with pytest.raises(ValueError):
            GridFunction(g, np.array([0.0, 1.0, np.nan, 2.0, 3.0]))
        with pytest.raises(ValueError):
            GridFunction(g, np.zeros(4))
        flagged = GridFunction(g, np.array([0.0, 1.0, np.nan, 2.0, 3.0]),
                               flagged=True)
        assert flagged.finite_mask.sum() == 4
        with pytest.raises(ValueError):
            derivative(flagged)


class TestCumulativeIntegral:
    def test_constant_integrand_exact(self):
        f = grid_fn(0.0, 1.0, 101, lambda x: np.ones_like(x))
        out = cumulative_integral(f)
        assert out.values[0] == 0.0
        np.testing.assert_allclose(out.values, f.grid.points, atol=1e-14)

    def test_linear_integrand(self):
        f = grid_fn(0.0, 1.0, 101, lambda x: 2 * x)
        out = cumulative_integral(f)
        assert out.values[-1] == pytest.approx(1.0, abs=1e-4)

    def test_gaussian_half_mass(self):
        # oracle: error-function evaluation of the normalized Gaussian CDF
        f = grid_fn(-8.0, 8.0, 16001,
                    lambda x: np.exp(-x**2) / math.sqrt(math.pi))
        out = cumulative_integral(f)
        mid = np.argmin(np.abs(f.grid.points))
        assert out.values[mid] == pytest.approx(0.5, abs=1e-6)

    def test_monotone_for_nonnegative(self):
        f = grid_fn(-8.0, 8.0, 2001, lambda x: np.exp(-x**2))
        out = cumulative_integral(f)
        assert np.all(np.diff(out.values) >= 0)


class TestDerivative:
    def test_quadratic_exact_interior(self):
        f = grid_fn(-2.0, 2.0, 101, lambda x: x**2)
        out = derivative(f)
        np.testing.assert_allclose(out.values[1:-1], 2 * f.grid.points[1:-1],
                                   atol=1e-12)

    def test_sine_second_order(self):
        f = grid_fn(0.0, math.pi, 3143, np.sin)  # h ~ 1e-3
        out = derivative(f)
        assert np.max(np.abs(out.values - np.cos(f.grid.points))) <= 1e-6

    def test_constant_is_zero(self):
        f = grid_fn(0.0, 1.0, 51, lambda x: np.full_like(x, 4.2))
        assert np.max(np.abs(derivative(f).values)) == 0.0

    def test_roundtrip_with_integral(self):
        f = grid_fn(-8.0, 8.0, 16001, lambda x: np.exp(-x**2))
        back = cumulative_integral(derivative(f))
        drift = back.values - (f.values - f.values[0])
        assert np.max(np.abs(drift)) <= 1e-5  # O(h^2)


class TestInnerProduct:
    def test_fourier_orthogonality(self):
        f = grid_fn(0.0, 1.0, 201, lambda x: np.sin(np.pi * x))
        g = GridFunction(f.grid, np.sin(2 * np.pi * f.grid.points))
        assert abs(inner_product(f, g)) <= 1e-8

    def test_gaussian_ground_state_norm(self):
        # oracle: int exp(-x^2) dx = sqrt(pi)
        f = grid_fn(-8.0, 8.0, 16001,
                    lambda x: math.pi**-0.25 * np.exp(-x**2 / 2))
        assert inner_product(f, f) == pytest.approx(1.0, abs=1e-6)

    def test_zero_function(self):
        f = grid_fn(0.0, 1.0, 11, np.zeros_like)
        assert inner_product(f, f) == 0.0

    def test_grid_mismatch(self):
        f = grid_fn(0.0, 1.0, 11, np.ones_like)
        g = grid_fn(0.0, 2.0, 11, np.ones_like)
        with pytest.raises(GridMismatchError):
            inner_product(f, g)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=20, deadline=None)
    def test_symmetric_bilinear(self, seed):
        rng = np.random.default_rng(seed)
        g = Grid(0.0, 1.0, 64)
        f1 = GridFunction(g, rng.normal(size=64))
        f2 = GridFunction(g, rng.normal(size=64))
        f3 = GridFunction(g, rng.normal(size=64))
        a, b = rng.normal(size=2)
        assert inner_product(f1, f2) == pytest.approx(inner_product(f2, f1),
                                                      abs=1e-12)
        lhs = inner_product(GridFunction(g, a * f1.values + b * f2.values), f3)
        rhs = a * inner_product(f1, f3) + b * inner_product(f2, f3)
        assert lhs == pytest.approx(rhs, abs=1e-10)


class TestCountNodes:
    def test_second_excited_well_shape(self):
        f = grid_fn(0.0, 2.0, 4001, lambda x: np.sin(3 * np.pi * x / 2.0))
        assert count_nodes(f) == 2

    def test_oscillator_level_four(self, oscillator):
        s = oscillator.eigenstate(4)
        # oracle: real roots of the degree-4 Hermite polynomial
        roots = np.roots([16, 0, -48, 0, 12])
        assert np.isreal(roots).all() and len(roots) == 4
        assert count_nodes(s.wavefunction) == 4

    def test_positive_function(self):
        f = grid_fn(-3.0, 3.0, 301, lambda x: np.exp(-x**2) + 0.1)
        assert count_nodes(f) == 0

    @given(lam=st.sampled_from([1e-6, -1.0, 3.5, -2e6, 1e6]))
    @settings(max_examples=5, deadline=None)
    def test_scaling_invariance(self, oscillator, lam):
        s = oscillator.eigenstate(3)
        scaled = GridFunction(s.grid, lam * s.wavefunction.values)
        assert count_nodes(scaled) == count_nodes(s.wavefunction) == 3

    def test_edge_margin_suppresses_wall_noise(self):
        g = Grid(0.0, 1.0, 101)
        vals = np.sin(np.pi * g.points)
        vals[0], vals[-1] = 1e-15, -1e-15  # rounding residue at the walls
        assert count_nodes(GridFunction(g, vals)) == 0


class TestNormalize:
    def test_removes_scaling(self, oscillator):
        s = oscillator.eigenstate(0)
        doubled = GridFunction(s.grid, 2 * s.wavefunction.values)
        out = normalize(doubled)
        np.testing.assert_allclose(out.values, s.wavefunction.values,
                                   atol=1e-12)

    def test_idempotent(self):
        f = grid_fn(0.0, 1.0, 101, lambda x: x**3 - 0.2)
        once = normalize(f)
        twice = normalize(once)
        assert np.max(np.abs(twice.values - once.values)) <= 1e-12

    def test_sine_scale_factor(self):
        # oracle: int_0^1 sin^2(pi x) dx = 1/2
        f = grid_fn(0.0, 1.0, 101, lambda x: np.sin(np.pi * x))
        out = normalize(f)
        expected = math.sqrt(2) * f.values
        assert np.max(np.abs(out.values - expected)) <= 1e-4

    def test_zero_norm_rejected(self):
        f = grid_fn(0.0, 1.0, 11, np.zeros_like)
        with pytest.raises(ZeroNormError):
            normalize(f)
