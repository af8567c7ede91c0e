"""Grid, transform, and field invariants."""

import numpy as np
import pytest

from gdnls_lab.errors import GridAlignmentError, ShapeError
from gdnls_lab.grid import GridSpec, SpaceTimeField, profile_l2


@pytest.fixture
def grid():
    return GridSpec(box_length=16 * np.pi, nx=256, t_min=-1.0, t_max=1.0, nt=64)


def random_field(grid, seed=0):
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal((grid.nx, grid.nt)) \
        + 1j * rng.standard_normal((grid.nx, grid.nt))
    return SpaceTimeField(grid, vals)


class TestGridSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            GridSpec(-1.0, 256, -1.0, 1.0, 64)
        with pytest.raises(ValueError):
            GridSpec(10.0, 100, -1.0, 1.0, 64)  # not a power of two
        with pytest.raises(ValueError):
            GridSpec(10.0, 256, 0.5, 1.0, 64)  # 0 not inside window

    def test_wavenumbers(self, grid):
        assert np.isclose(grid.xi[1], 2 * np.pi / grid.box_length)
        assert np.isclose(grid.nyquist, np.pi / grid.dx)

    def test_tau_offset_keeps_modulation_positive(self, grid):
        assert grid.modulation.min() > 0.0

    def test_t0_on_grid(self, grid):
        assert grid.t[grid.t0_index] == 0.0

    def test_t0_missing_raises(self):
        g = GridSpec(10.0, 64, -0.95, 1.05, 64)
        with pytest.raises(GridAlignmentError):
            g.t0_index


class TestTransforms:
    def test_round_trip_x(self, grid):
        f = random_field(grid)
        back = grid.inverse_fourier_x(grid.fourier_x(f.values))
        assert np.abs(back - f.values).max() < 1e-12 * np.abs(f.values).max()

    def test_round_trip_xt(self, grid):
        f = random_field(grid, 1)
        back = grid.inverse_fourier_xt(grid.fourier_xt(f.values))
        assert np.abs(back - f.values).max() < 1e-12 * np.abs(f.values).max()

    def test_parseval_equality(self, grid):
        f = random_field(grid, 2)
        assert abs(f.l2() - f.spectral_l2()) < 1e-10 * f.l2()

    def test_pure_mode_is_a_delta_in_frequency(self, grid):
        xi0 = grid.xi[7]
        prof = np.exp(1j * xi0 * grid.x)
        hat = grid.fourier_x(prof)
        k = np.argmax(np.abs(hat))
        assert k == 7
        others = np.delete(np.abs(hat), 7)
        assert others.max() < 1e-9 * np.abs(hat[7])

    def test_constant_field_hits_zero_mode_only(self, grid):
        hat = grid.fourier_x(np.ones(grid.nx, dtype=complex))
        assert np.argmax(np.abs(hat)) == 0
        assert np.isclose(hat[0].real, grid.box_length)

    def test_l2_preserved_by_round_trip(self, grid):
        f = random_field(grid, 3)
        back = SpaceTimeField(grid, grid.inverse_fourier_xt(grid.fourier_xt(f.values)))
        assert abs(back.l2() - f.l2()) < 1e-12 * f.l2()

    def test_fourier_t_at_matches_grid_frequencies(self, grid):
        rng = np.random.default_rng(4)
        sig = rng.standard_normal(grid.nt) + 1j * rng.standard_normal(grid.nt)
        tilde = grid.fourier_t(sig)
        probe = grid.fourier_t_at(sig, grid.tau[:5])
        assert np.abs(probe - tilde[:5]).max() < 1e-10 * np.abs(tilde[:5]).max()


class TestField:
    def test_shape_mismatch(self, grid):
        with pytest.raises(ShapeError):
            SpaceTimeField(grid, np.zeros((3, 3)))

    def test_algebra(self, grid):
        f = random_field(grid, 5)
        g2 = random_field(grid, 6)
        s = f + g2 - 0.5 * f
        expect = 0.5 * f.values + g2.values
        assert np.abs(s.values - expect).max() < 1e-14

    def test_profile_l2(self, grid):
        prof = np.ones(grid.nx, dtype=complex)
        assert np.isclose(profile_l2(grid, prof), np.sqrt(grid.box_length))
