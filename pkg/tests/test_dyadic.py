"""Band cutoffs, projections, half-line projections, derivative gain."""

import numpy as np
import pytest

from gdnls_lab.dyadic import (DyadicBand, bernstein_ratio, psi, psi_band,
                              psi_leq, project, representable_bands, riesz)
from gdnls_lab.errors import BandUnrepresentableError, UndefinedRatioError
from gdnls_lab.grid import GridSpec, SpaceTimeField


@pytest.fixture
def grid():
    return GridSpec(box_length=16 * np.pi, nx=512, t_min=-1.0, t_max=1.0, nt=64)


def mode_field(grid, xi0, om=0.0):
    vals = np.exp(1j * xi0 * grid.x)[:, None] * np.exp(-1j * om * grid.t)[None, :]
    return SpaceTimeField(grid, vals)


def random_band_field(grid, n, seed=0):
    rng = np.random.default_rng(seed)
    hat = np.zeros((grid.nx, grid.nt), dtype=complex)
    live = psi_band(grid.xi, n) > 0
    hat[live] = rng.standard_normal((live.sum(), grid.nt)) \
        + 1j * rng.standard_normal((live.sum(), grid.nt))
    return SpaceTimeField(grid, grid.inverse_fourier_x(hat))


class TestCutoff:
    def test_mother_cutoff_plateau_and_support(self):
        xi = np.array([0.0, 1.0, 2.0, 3.0, 4.0, 5.0])
        vals = psi(xi)
        assert np.all(vals[:3] == 1.0)
        assert 0.0 < vals[3] < 1.0
        assert np.all(vals[4:] == 0.0)

    def test_band_multiplier_window(self):
        n = 2.0
        assert psi_band(2 * n, n) == 1.0
        assert psi_band(n, n) == 0.0
        assert psi_band(4 * n, n) == 0.0
        xi = np.linspace(-10, 10, 301)
        vals = psi_band(xi, n)
        assert np.all((vals >= 0.0) & (vals <= 1.0))
        assert np.all(vals[np.abs(xi) <= n] == 0.0)
        assert np.all(vals[np.abs(xi) >= 4 * n] == 0.0)

    def test_partition_of_unity_on_resolved_modes(self, grid):
        bands = representable_bands(grid)
        n0 = bands[2]
        total = psi_leq(grid.xi, n0)
        for n in bands:
            if n > n0:
                total = total + psi_band(grid.xi, n)
        top = max(bands)
        resolved = np.abs(grid.xi) <= 2 * top
        assert np.abs(total[resolved] - 1.0).max() < 1e-12


class TestProjection:
    def test_mode_at_2n_unchanged(self, grid):
        f = mode_field(grid, 2.0)
        pf = project(f, DyadicBand(1.0))
        assert np.abs(pf.values - f.values).max() < 1e-12

    def test_mode_at_half_n_killed(self, grid):
        f = mode_field(grid, 0.5)
        pf = project(f, DyadicBand(1.0))
        assert np.abs(pf.values).max() < 1e-12

    def test_unrepresentable_band_raises(self, grid):
        with pytest.raises(BandUnrepresentableError):
            project(mode_field(grid, 1.0), DyadicBand(grid.nyquist / 2))

    def test_leq_projection_idempotent_below_ramp(self, grid):
        # the low-pass multiplier equals 1 up to 2N, so it is exactly
        # idempotent on content below its ramp (its use case: the low lump)
        rng = np.random.default_rng(1)
        hat = np.zeros((grid.nx, grid.nt), dtype=complex)
        low = np.abs(grid.xi) <= 1.9
        hat[low] = rng.standard_normal((low.sum(), grid.nt))
        f = SpaceTimeField(grid, grid.inverse_fourier_x(hat))
        once = project(f, DyadicBand(1.0, "leq"))
        twice = project(once, DyadicBand(1.0, "leq"))
        assert np.abs(twice.values - once.values).max() < 1e-12
        assert np.abs(once.values - f.values).max() < 1e-12

    def test_band_projection_squares_multiplier(self, grid):
        f = random_band_field(grid, 2.0, seed=2)
        band = DyadicBand(2.0)
        twice = project(project(f, band), band)
        m = band.multiplier(grid.xi)[:, None]
        expect = grid.inverse_fourier_x(m ** 2 * f.hat_x)
        assert np.abs(twice.values - expect).max() < 1e-11

    def test_telescoping_reconstructs_band_limited_field(self, grid):
        f = random_band_field(grid, 1.0, seed=3)
        bands = representable_bands(grid)
        total = project(f, DyadicBand(bands[0], "leq"))
        for n in bands:
            if n > bands[0]:
                total = total + project(f, DyadicBand(n))
        assert (total - f).l2() < 1e-10 * f.l2()


class TestRiesz:
    def test_positive_mode_passes_plus(self, grid):
        f = mode_field(grid, 3.0)
        assert np.abs(riesz(f, "+").values - f.values).max() < 1e-12
        assert np.abs(riesz(f, "-").values).max() < 1e-13

    def test_complementary(self, grid):
        f = random_band_field(grid, 2.0, seed=4)
        s = riesz(f, "+") + riesz(f, "-")
        assert np.abs(s.values - f.values).max() < 1e-12

    def test_parseval_on_disjoint_supports(self, grid):
        f = random_band_field(grid, 2.0, seed=5)
        plus, minus = riesz(f, "+"), riesz(f, "-")
        total = plus.l2() ** 2 + minus.l2() ** 2
        assert abs(total - f.l2() ** 2) < 1e-12 * f.l2() ** 2

    def test_real_field_hermitian_symmetry(self, grid):
        rng = np.random.default_rng(6)
        f = SpaceTimeField(grid, rng.standard_normal((grid.nx, grid.nt)) + 0j)
        plus_hat = riesz(f, "+").hat_x
        minus_hat = riesz(f, "-").hat_x
        # spectra of the two halves are conjugate reflections of each other
        k = np.rint(np.fft.fftfreq(grid.nx) * grid.nx).astype(int)
        order = np.argsort(k)
        ks, ph, mh = k[order], plus_hat[order], minus_hat[order]
        for idx, kk in enumerate(ks):
            if 0 < kk < grid.nx // 2 - 1:
                j = np.nonzero(ks == -kk)[0][0]
                assert np.abs(np.conj(ph[idx]) - mh[j]).max() < 1e-9


class TestBernstein:
    def test_pure_mode_ratio_two(self, grid):
        n = 1.0
        f = mode_field(grid, 2 * n, om=4.0)
        assert np.isclose(bernstein_ratio(f, n, 2, 2), 2.0)
        assert np.isclose(bernstein_ratio(f, n, np.inf, np.inf), 2.0, atol=1e-6)

    def test_scaling_invariance(self, grid):
        f = random_band_field(grid, 2.0, seed=7)
        r1 = bernstein_ratio(f, 2.0, 1, 2)
        r2 = bernstein_ratio(37.1j * f, 2.0, 1, 2)
        assert np.isclose(r1, r2, rtol=1e-12)

    def test_sweep_bounded(self, grid):
        worst = 0.0
        for seed in range(100):
            f = random_band_field(grid, 2.0, seed=seed)
            worst = max(worst, bernstein_ratio(f, 2.0, 1, 2))
        assert worst <= 8.0

    def test_zero_field_raises(self, grid):
        zero = SpaceTimeField(grid, np.zeros((grid.nx, grid.nt), complex))
        with pytest.raises(UndefinedRatioError):
            bernstein_ratio(zero, 2.0, 2, 2)
