"""Free evolution, Duhamel integral, band kernels."""

import numpy as np
import pytest

from gdnls_lab.dyadic import psi_band
from gdnls_lab.errors import BandUnrepresentableError, GridAlignmentError
from gdnls_lab.grid import GridSpec, SpaceTimeField, profile_l2
from gdnls_lab.norms import equation_residual, time_bump
from gdnls_lab.propagator import (duhamel, free_evolve, free_shift, kernel,
                                  kernel_bound)


@pytest.fixture
def grid():
    return GridSpec(box_length=16 * np.pi, nx=256, t_min=-1.0, t_max=1.0, nt=256)


def band_profile(grid, n=1.0, seed=0):
    rng = np.random.default_rng(seed)
    hat = np.zeros(grid.nx, complex)
    live = psi_band(grid.xi, n) > 0
    hat[live] = rng.standard_normal(live.sum()) + 1j * rng.standard_normal(live.sum())
    return grid.inverse_fourier_x(hat)


class TestFreeEvolve:
    def test_plane_wave_dispersion(self, grid):
        xi0 = grid.xi[5]
        wave = free_evolve(grid, np.exp(1j * xi0 * grid.x))
        expect = np.exp(1j * (xi0 * grid.x[:, None]) - 1j * xi0 ** 2 * grid.t[None, :])
        assert np.abs(wave.values - expect).max() < 1e-12

    def test_initial_slice(self, grid):
        u0 = band_profile(grid)
        wave = free_evolve(grid, u0)
        assert np.abs(wave.values[:, grid.t0_index] - u0).max() < 1e-12

    def test_unitarity(self, grid):
        u0 = band_profile(grid, seed=1)
        wave = free_evolve(grid, u0)
        mass0 = profile_l2(grid, u0)
        for j in range(0, grid.nt, 37):
            assert abs(profile_l2(grid, wave.values[:, j]) - mass0) < 1e-12 * mass0

    def test_group_law(self, grid):
        u0 = band_profile(grid, seed=2)
        a = free_shift(grid, free_shift(grid, u0, 0.3), 0.4)
        b = free_shift(grid, u0, 0.7)
        assert np.abs(a - b).max() < 1e-12 * np.abs(b).max()

    def test_dispersive_decay_rate(self):
        # sup_x of a Gaussian free wave decays like t^{-1/2}
        g = GridSpec(256 * np.pi, 8192, -16.0, 16.0, 64)
        u0 = np.exp(-g.x ** 2).astype(complex)
        wave = free_evolve(g, u0)
        ts = np.array([1.0, 2.0, 4.0, 8.0])
        sups = []
        for t in ts:
            j = int(np.argmin(np.abs(g.t - t)))
            sups.append(np.abs(wave.values[:, j]).max())
        slope = np.polyfit(np.log(ts), np.log(sups), 1)[0]
        assert abs(slope + 0.5) < 0.05


class TestDuhamel:
    def test_zero_forcing(self, grid):
        w = duhamel(SpaceTimeField(grid, np.zeros((grid.nx, grid.nt), complex)))
        assert np.abs(w.values).max() == 0.0

    def test_resonant_free_wave_forcing(self, grid):
        # F = free wave of g: the integrand is s-independent after conjugation
        g0 = band_profile(grid, seed=3)
        forcing = free_evolve(grid, g0)
        w = duhamel(forcing)
        expect = -1j * grid.t[None, :] * forcing.values
        err = np.abs(w.values - expect).max() / np.abs(expect).max()
        assert err < 1e-10

    def test_vanishes_at_time_zero(self, grid):
        eta, _ = time_bump(grid)
        f = SpaceTimeField(grid, band_profile(grid, seed=4)[:, None] * eta[None, :])
        w = duhamel(f)
        assert np.abs(w.values[:, grid.t0_index]).max() == 0.0

    def test_equation_residual(self):
        g = GridSpec(16 * np.pi, 256, -1.0, 1.0, 512)
        eta, _ = time_bump(g)
        env = eta * np.exp(-1.5j * g.t)
        f = SpaceTimeField(g, band_profile(g, seed=5)[:, None] * env[None, :])
        w = duhamel(f)
        assert equation_residual(w, f) < 1e-3

    def test_linearity(self, grid):
        eta, _ = time_bump(grid)
        f1 = SpaceTimeField(grid, band_profile(grid, seed=6)[:, None] * eta[None, :])
        f2 = SpaceTimeField(grid, band_profile(grid, seed=7)[:, None]
                            * (eta * np.exp(1j * grid.t))[None, :])
        lhs = duhamel(f1 + f2)
        rhs = duhamel(f1) + duhamel(f2)
        assert (lhs - rhs).l2() < 1e-10 * rhs.l2()

    def test_requires_time_zero_on_grid(self):
        g = GridSpec(16 * np.pi, 64, -0.95, 1.05, 64)
        f = SpaceTimeField(g, np.ones((g.nx, g.nt), complex))
        with pytest.raises(GridAlignmentError):
            duhamel(f)


class TestKernel:
    def test_truncated_kernel_vanishes_beyond_two(self):
        g = GridSpec(2 * np.pi, 256, -4.0, 4.0, 128)
        k = kernel(g, 1.0, "K1_truncated")
        outside = np.abs(g.t) > 2.0
        assert np.abs(k.values[:, outside]).max() == 0.0
        inside = np.abs(g.t) <= 2.0
        assert np.abs(k.values[:, inside]).max() > 0.0

    def test_untruncated_kernel_time_zero_integral(self):
        g = GridSpec(2 * np.pi, 256, -4.0, 4.0, 128)
        k = kernel(g, 1.0, "K2_untruncated")
        j0 = g.t0_index
        integral = g.dx * k.values[:, j0].sum()
        assert np.isclose(integral.real, 2 * np.pi, rtol=1e-8)
        assert abs(integral.imag) < 1e-8

    def test_band_guard(self):
        g = GridSpec(2 * np.pi, 256, -4.0, 4.0, 128)
        with pytest.raises(BandUnrepresentableError):
            kernel(g, 64.0, "K2_untruncated")

    def test_bound_domain_errors(self):
        with pytest.raises(ValueError):
            kernel_bound(4.0, "K2_untruncated", 2.0)
        with pytest.raises(ValueError):
            kernel_bound(4.0, "K1_truncated", 1.0)

    def test_bound_uniform_over_bands(self):
        vals = [kernel_bound(n, "K1_truncated", 2.0, theta_max=512.0)
                for n in (4.0, 8.0, 16.0)]
        assert max(vals) <= 4.0 * vals[0]

    def test_truncated_norm_growth_rate(self):
        ns = np.array([4.0, 8.0, 16.0])
        bounds = np.array([kernel_bound(n, "K1_truncated", 2.0, theta_max=512.0)
                           for n in ns])
        norms = bounds * ns  # 2 s0 = 1 at gamma = 2
        slope = np.polyfit(np.log2(ns), np.log2(norms), 1)[0]
        assert abs(slope - 1.0) < 0.1
