"""Polynomial parsing, dealiased evaluation, gauge map, scaling map."""

import numpy as np
import pytest

from gdnls_lab.errors import DegreeError, PolynomialParseError, RangeError
from gdnls_lab.grid import GridSpec, SpaceTimeField, profile_l2
from gdnls_lab.nonlinearity import (DNLS, evaluate, evaluate_profile,
                                    gauge_transform, multiply_fields,
                                    parse_polynomial, rescale, rescale_profile)
from gdnls_lab.norms import sobolev_norm


@pytest.fixture
def grid():
    return GridSpec(box_length=16 * np.pi, nx=512, t_min=-1.0, t_max=1.0, nt=32)


def gaussian_field(grid, width=1.0, amp=1.0):
    prof = amp * np.exp(-(grid.x / width) ** 2).astype(complex)
    env = np.exp(1j * 0.3 * grid.t)
    return SpaceTimeField(grid, prof[:, None] * env[None, :])


class TestParse:
    def test_derivative_cubic_expansion(self):
        p = parse_polynomial("i*dx(|u|^2*u)")
        assert p.monomials == ((2j, (1, 1, 1, 0)), (1j, (2, 0, 0, 1)))
        assert p.min_degree == 3
        assert p.one_derivative_per_term

    def test_two_derivative_term_classified(self):
        p = parse_polynomial("u*ux^2")
        assert p.monomials == ((1 + 0j, (1, 0, 2, 0)),)
        assert not p.one_derivative_per_term
        assert p.max_derivative_count == 2

    def test_conjugate_power_divergence(self):
        p = parse_polynomial("dx(ubar^5)")
        assert p.monomials == ((5 + 0j, (0, 4, 0, 1)),)
        assert p.min_degree == 5
        assert p.one_derivative_per_term

    def test_divergence_form_always_single_derivative(self):
        for text in ("dx(u^3)", "dx(|u|^4*u)", "dx(u^2*ubar^3)"):
            assert parse_polynomial(text).one_derivative_per_term

    def test_sum_and_coefficients(self):
        p = parse_polynomial("2i*u^2*ubar - 0.5*u*ux^2 + u^3")
        powers = {m[1]: m[0] for m in p.monomials}
        assert powers[(2, 1, 0, 0)] == 2j
        assert powers[(1, 0, 2, 0)] == -0.5
        assert powers[(3, 0, 0, 0)] == 1.0

    def test_low_degree_rejected(self):
        with pytest.raises(DegreeError):
            parse_polynomial("u*ubar")

    def test_malformed_terms(self):
        for bad in ("u^^2", "2i*", "dx(ux)", "|u|^3", "spam*u^3", "u^3)("):
            with pytest.raises((PolynomialParseError, DegreeError)):
                parse_polynomial(bad)


class TestEvaluate:
    def test_zero(self, grid):
        p = parse_polynomial("u^3")
        zero = SpaceTimeField(grid, np.zeros((grid.nx, grid.nt), complex))
        assert evaluate(p, zero).l2() == 0.0

    def test_cubic_plane_wave(self, grid):
        p = parse_polynomial("u^3")
        xi0 = grid.xi[4]
        f = SpaceTimeField(grid, np.exp(1j * xi0 * grid.x)[:, None]
                           * np.ones(grid.nt)[None, :])
        got = evaluate(p, f)
        expect = np.exp(3j * xi0 * grid.x)[:, None] * np.ones(grid.nt)[None, :]
        assert np.abs(got.values - expect).max() < 1e-10

    def test_monomial_scaling_slots(self, grid):
        f = gaussian_field(grid)
        c = 0.7 - 0.3j
        for text, a in (("u^2*ubar*ux", (2, 1, 1, 0)), ("ubar^2*uxbar*u", (1, 2, 0, 1))):
            p = parse_polynomial(text)
            base = evaluate(p, f)
            scaled = evaluate(p, c * f)
            factor = c ** (a[0] + a[2]) * np.conj(c) ** (a[1] + a[3])
            assert np.abs(scaled.values - factor * base.values).max() < 1e-10

    def test_against_finite_differences(self, grid):
        # independent oracle: 8x finer grid, 4th-order centered differences
        fine = GridSpec(grid.box_length, 8 * grid.nx, grid.t_min, grid.t_max, 8)
        prof_f = np.exp(-(fine.x / 2.0) ** 2) * np.exp(0.4j * fine.x)
        dx = fine.dx
        ux_fd = (np.roll(prof_f, -2) - 8 * np.roll(prof_f, -1)
                 + 8 * np.roll(prof_f, 1) - np.roll(prof_f, 2)) / (-12 * dx)
        dnls_fd = 1j * (2 * prof_f * np.conj(prof_f) * ux_fd
                        + prof_f ** 2 * np.conj(ux_fd))
        got_f = evaluate_profile(DNLS, fine, prof_f)
        err = np.abs(got_f - dnls_fd).max() / np.abs(dnls_fd).max()
        assert err < 1e-6

    def test_product_helper_matches_monomial(self, grid):
        f = gaussian_field(grid)
        p = parse_polynomial("u^2*ubar^1")
        via_eval = evaluate(p, f)
        via_prod = multiply_fields([(f, False, 0), (f, False, 0), (f, True, 0)])
        assert (via_eval - via_prod).l2() < 1e-12 * via_prod.l2()


class TestGauge:
    def test_identity_at_zero(self, grid):
        f = gaussian_field(grid)
        g2 = gauge_transform(f, 0.0)
        assert np.abs(g2.values - f.values).max() == 0.0

    def test_modulus_preserved(self, grid):
        f = gaussian_field(grid)
        g2 = gauge_transform(f, -1.0)
        assert np.abs(np.abs(g2.values) - np.abs(f.values)).max() < 1e-14

    def test_exponent_additivity(self, grid):
        f = gaussian_field(grid)
        a = gauge_transform(gauge_transform(f, 0.7), -0.2)
        b = gauge_transform(f, 0.5)
        assert np.abs(a.values - b.values).max() < 1e-10

    def test_mass_preserved_per_slice(self, grid):
        f = gaussian_field(grid)
        g2 = gauge_transform(f, -1.0)
        m1 = np.sum(np.abs(f.values) ** 2, axis=0)
        m2 = np.sum(np.abs(g2.values) ** 2, axis=0)
        assert np.abs(m1 - m2).max() < 1e-12 * m1.max()

    def test_boundary_mass_warning(self, grid):
        vals = np.ones((grid.nx, grid.nt), complex)
        with pytest.warns(UserWarning):
            gauge_transform(SpaceTimeField(grid, vals), 1.0)


class TestRescale:
    def test_identity(self, grid):
        f = gaussian_field(grid)
        g2 = rescale(f, 1.0, 3)
        assert np.abs(g2.values - f.values).max() < 1e-12

    def test_l2_change_of_variables(self, grid):
        d, lam = 3, 2.0
        prof = np.exp(-(grid.x / 1.5) ** 2).astype(complex) * np.exp(1j * grid.x)
        out = rescale_profile(grid, prof, lam, d)
        expect = lam ** (1.0 / (d - 1) - 0.5) * profile_l2(grid, prof)
        assert np.isclose(profile_l2(grid, out), expect, rtol=1e-10)

    def test_critical_norm_invariance_quintic(self, grid):
        d, lam, s0 = 5, 2.0, 0.25
        prof = np.exp(-grid.x ** 2).astype(complex) * np.exp(0.5j * grid.x)
        out = rescale_profile(grid, prof, lam, d)
        a = sobolev_norm(grid, prof, s0, homogeneous=True)
        b = sobolev_norm(grid, out, s0, homogeneous=True)
        assert abs(a - b) < 1e-6 * a

    def test_non_dyadic_factor_rejected(self, grid):
        with pytest.raises(RangeError):
            rescale_profile(grid, np.ones(grid.nx, complex), 3.0, 3)

    def test_too_wide_spectrum_rejected(self, grid):
        prof = np.exp(1j * 0.8 * grid.nyquist * grid.x)
        with pytest.raises(RangeError):
            rescale_profile(grid, prof, 2.0, 3)
