"""Contraction map, reference integrator, cross-validation."""

import numpy as np
import pytest

from gdnls_lab.errors import DivergenceError
from gdnls_lab.grid import GridSpec, SpaceTimeField, profile_l2
from gdnls_lab.nonlinearity import DNLS, gauge_transform, parse_polynomial, takaoka_residual
from gdnls_lab.norms import LOCAL, sobolev_norm
from gdnls_lab.propagator import free_evolve
from gdnls_lab.solver import (contraction_constant, fixed_point_residual, mass,
                              picard_iterate, reference_solve)


@pytest.fixture
def grid():
    # small grid for iteration tests; the acceptance suite runs the full one
    return GridSpec(box_length=32 * np.pi, nx=512, t_min=-1.0, t_max=1.0, nt=256)


def small_gaussian(grid, s=0.5, size=0.05):
    prof = np.exp(-grid.x ** 2).astype(complex)
    return prof * (size / sobolev_norm(grid, prof, s))


class TestPicard:
    def test_zero_datum_stays_zero(self, grid):
        trace = picard_iterate(grid, np.zeros(grid.nx, complex), DNLS, 0.5,
                               LOCAL, k_max=2)
        assert all(d == 0.0 for d in trace.diffs)

    def test_free_equation_converges_immediately(self, grid):
        p = parse_polynomial("u^3")
        u0 = 0.0 * small_gaussian(grid)
        trace = picard_iterate(grid, u0, p, 0.5, LOCAL, k_max=2)
        assert trace.diffs[0] == 0.0

    def test_small_data_contracts(self, grid):
        u0 = small_gaussian(grid)
        trace = picard_iterate(grid, u0, DNLS, 0.5, LOCAL, k_max=4)
        assert trace.ratios
        assert all(r <= 0.5 for r in trace.ratios)

    def test_fixed_point_residual_below_geometric_bound(self, grid):
        u0 = small_gaussian(grid)
        trace = picard_iterate(grid, u0, DNLS, 0.5, LOCAL, k_max=4)
        residual = fixed_point_residual(grid, u0, DNLS, trace)
        assert residual <= trace.aposteriori_bound()

    def test_large_data_divergence_signal(self, grid):
        u0 = small_gaussian(grid, size=40.0)
        with pytest.raises(DivergenceError) as info:
            picard_iterate(grid, u0, DNLS, 0.5, LOCAL, k_max=8)
        assert info.value.trace.diffs  # partial trace attached
        assert info.value.trace.diverged


class TestContractionConstant:
    def test_cubic_plugin(self):
        assert np.isclose(contraction_constant(1.0, 1.0, 3), 8.0 ** -0.5)

    def test_quintic_plugin(self):
        assert np.isclose(contraction_constant(1.0, 1.0, 5), 8.0 ** -0.25)

    def test_second_branch_active(self):
        # tiny c1 makes the mapping bound the binding constraint
        assert np.isclose(contraction_constant(0.01, 1.0, 3), 4.0 ** -0.5)


class TestReferenceSolve:
    def test_free_case_matches_free_evolution(self, grid):
        u0 = small_gaussian(grid)
        sol = reference_solve(grid, u0, None, substeps=1)
        wave = free_evolve(grid, u0)
        assert (sol - wave).l2() < 1e-10 * wave.l2()

    def test_mass_conservation(self, grid):
        u0 = small_gaussian(grid, size=0.2)
        sol = reference_solve(grid, u0, DNLS, substeps=2)
        m0 = mass(grid, u0)
        drift = max(abs(mass(grid, sol.values[:, j]) - m0)
                    for j in range(0, grid.nt, 17))
        assert drift < 1e-8 * m0

    def test_cross_validation_against_picard(self, grid):
        u0 = small_gaussian(grid)
        trace = picard_iterate(grid, u0, DNLS, 0.5, LOCAL, k_max=4)
        sol = reference_solve(grid, u0, DNLS, substeps=2)
        diff = np.abs(trace.last.values - sol.values).max()
        assert diff < 1e-4

    def test_gauge_compatibility(self, grid):
        u0 = small_gaussian(grid, size=0.2)
        sol = reference_solve(grid, u0, DNLS, substeps=2)
        assert takaoka_residual(sol) < 1e-3

    def test_free_solution_is_negative_control(self, grid):
        # a free wave fails the transformed equation by exactly the cubic terms
        u0 = small_gaussian(grid, size=0.5)
        wave = free_evolve(grid, u0)
        assert takaoka_residual(wave) > 10 * takaoka_residual(
            reference_solve(grid, u0, DNLS, substeps=2))


class TestGaugeOnSolutions:
    def test_modulus_preserved_on_solution(self, grid):
        u0 = small_gaussian(grid, size=0.3)
        sol = reference_solve(grid, u0, DNLS, substeps=1)
        v = gauge_transform(sol, -1.0)
        assert np.abs(np.abs(v.values) - np.abs(sol.values)).max() < 1e-13
