"""Periodic space-time grids and the discrete Fourier calculus on them.

Transform conventions (fixed once, used everywhere):

    forward in x:   u_hat(xi)  = integral e^{-i xi x} u(x) dx
    inverse in x:   u(x)       = (1/2pi) integral e^{+i xi x} u_hat(xi) dxi

and the same pair in t with dual variable tau.  Integrals are Riemann sums
with cell weights dx, dt, so the pair is an exact inverse on the grid and
Parseval holds as an equality when the Fourier side carries the measure
dxi/(2pi) (and dtau/(2pi)).

Spatial wavenumbers are xi_k = 2 pi k / L, k in [-nx/2, nx/2).  Temporal
frequencies carry a half-bin offset,

    tau_j = 2 pi j / (t_max - t_min) + pi / (t_max - t_min),

so tau + xi^2 never vanishes exactly on the grid; every denominator built
from the dispersion relation stays finite without flooring.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import GridAlignmentError, ShapeError


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Periodic discretization of the box [-L/2, L/2) x [t_min, t_max).

    nx and nt must be powers of two (>= 8); the box plays the role of the
    real line for data that decays well inside it.
    """

    box_length: float
    nx: int
    t_min: float
    t_max: float
    nt: int

    def __post_init__(self):
        if not self.box_length > 0:
            raise ValueError(f"box_length must be positive, got {self.box_length}")
        if not (_is_pow2(self.nx) and self.nx >= 8):
            raise ValueError(f"nx must be a power of two >= 8, got {self.nx}")
        if not (_is_pow2(self.nt) and self.nt >= 8):
            raise ValueError(f"nt must be a power of two >= 8, got {self.nt}")
        if not (self.t_min < 0.0 < self.t_max):
            raise ValueError(f"need t_min < 0 < t_max, got [{self.t_min}, {self.t_max}]")

    # ---- geometry -------------------------------------------------------

    @property
    def dx(self) -> float:
        return self.box_length / self.nx

    @property
    def t_len(self) -> float:
        return self.t_max - self.t_min

    @property
    def dt(self) -> float:
        return self.t_len / self.nt

    @cached_property
    def x(self) -> np.ndarray:
        return -0.5 * self.box_length + self.dx * np.arange(self.nx)

    @cached_property
    def t(self) -> np.ndarray:
        return self.t_min + self.dt * np.arange(self.nt)

    @cached_property
    def xi(self) -> np.ndarray:
        """Spatial wavenumbers in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.nx, d=self.dx)

    @property
    def dxi(self) -> float:
        return 2.0 * np.pi / self.box_length

    @property
    def nyquist(self) -> float:
        """Largest magnitude wavenumber scale pi/dx."""
        return np.pi / self.dx

    @property
    def tau_offset(self) -> float:
        return np.pi / self.t_len

    @cached_property
    def tau(self) -> np.ndarray:
        """Temporal frequencies in FFT order, including the half-bin offset."""
        return 2.0 * np.pi * np.fft.fftfreq(self.nt, d=self.dt) + self.tau_offset

    @property
    def dtau(self) -> float:
        return 2.0 * np.pi / self.t_len

    @cached_property
    def t0_index(self) -> int:
        """Index of the sample t = 0; raises if 0 is not a grid time."""
        j = int(np.argmin(np.abs(self.t)))
        if abs(self.t[j]) > 1e-9 * self.dt:
            raise GridAlignmentError(
                f"t = 0 is not a grid time (closest sample {self.t[j]:.3e})")
        return j

    @cached_property
    def modulation(self) -> np.ndarray:
        """|tau + xi^2| on the (xi, tau) grid, shape (nx, nt); strictly positive."""
        return np.abs(self.tau[None, :] + self.xi[:, None] ** 2)

    # ---- transform phases ----------------------------------------------

    @cached_property
    def _phase_x(self) -> np.ndarray:
        # e^{i xi_k L/2} = (-1)^k, exact in integer arithmetic
        k = np.rint(np.fft.fftfreq(self.nx) * self.nx).astype(int)
        return np.where(k % 2 == 0, 1.0, -1.0).astype(complex)

    @cached_property
    def _anchor_t(self) -> np.ndarray:
        # e^{-i tau_base_k t_min} for the base (unoffset) frequencies
        tau_base = 2.0 * np.pi * np.fft.fftfreq(self.nt, d=self.dt)
        return np.exp(-1j * tau_base * self.t_min)

    @cached_property
    def _mod_t(self) -> np.ndarray:
        # e^{-i offset t_j}: shifts the transform onto the half-bin grid
        return np.exp(-1j * self.tau_offset * self.t)

    # ---- transforms ------------------------------------------------------

    def fourier_x(self, values: np.ndarray) -> np.ndarray:
        """Forward x-transform along axis 0 (profiles or fields)."""
        ph = self._phase_x if values.ndim == 1 else self._phase_x[:, None]
        return self.dx * ph * np.fft.fft(values, axis=0)

    def inverse_fourier_x(self, hat: np.ndarray) -> np.ndarray:
        ph = self._phase_x if hat.ndim == 1 else self._phase_x[:, None]
        return np.fft.ifft(ph * hat, axis=0) / self.dx

    def fourier_t(self, values: np.ndarray) -> np.ndarray:
        """Forward t-transform along the last axis, on the offset tau grid."""
        mod = self._mod_t if values.ndim == 1 else self._mod_t[None, :]
        anchor = self._anchor_t if values.ndim == 1 else self._anchor_t[None, :]
        return self.dt * anchor * np.fft.fft(values * mod, axis=-1)

    def inverse_fourier_t(self, tilde: np.ndarray) -> np.ndarray:
        mod = self._mod_t if tilde.ndim == 1 else self._mod_t[None, :]
        anchor = self._anchor_t if tilde.ndim == 1 else self._anchor_t[None, :]
        return np.fft.ifft(np.conj(anchor) * tilde, axis=-1) * np.conj(mod) / self.dt

    def fourier_xt(self, values: np.ndarray) -> np.ndarray:
        return self.fourier_t(self.fourier_x(values))

    def inverse_fourier_xt(self, tilde: np.ndarray) -> np.ndarray:
        return self.inverse_fourier_x(self.inverse_fourier_t(tilde))

    def fourier_t_at(self, values: np.ndarray, tau_star: np.ndarray) -> np.ndarray:
        """Evaluate the t-transform at arbitrary frequencies tau_star.

        Direct summation Dt * sum_j values(t_j) e^{-i tau* t_j}; this is the
        band-limited (Dirichlet-kernel) interpolation of the discrete spectrum.
        """
        tau_star = np.atleast_1d(np.asarray(tau_star, dtype=float))
        return self.dt * np.exp(-1j * np.outer(tau_star, self.t)) @ values


@dataclass(frozen=True)
class SpaceTimeField:
    """Complex samples u(x_m, t_j) on a GridSpec; immutable by convention."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.nx, self.grid.nt):
            raise ShapeError(
                f"field shape {v.shape} does not match grid ({self.grid.nx}, {self.grid.nt})")
        object.__setattr__(self, "values", v)

    # ---- spectra ---------------------------------------------------------

    @cached_property
    def hat_x(self) -> np.ndarray:
        """Spatial spectrum, shape (nx, nt)."""
        return self.grid.fourier_x(self.values)

    @cached_property
    def tilde(self) -> np.ndarray:
        """Space-time spectrum on the (xi, tau) grid."""
        return self.grid.fourier_xt(self.values)

    # ---- basic norms -----------------------------------------------------

    def l2(self) -> float:
        """Physical-side L^2_{x,t} norm."""
        g = self.grid
        return float(np.sqrt(g.dx * g.dt * np.sum(np.abs(self.values) ** 2)))

    def spectral_l2(self) -> float:
        """Fourier-side L^2_{xi,tau} norm with measure dxi dtau/(2 pi)^2."""
        g = self.grid
        w = 1.0 / (g.box_length * g.t_len)
        return float(np.sqrt(w * np.sum(np.abs(self.tilde) ** 2)))

    def slice_t0(self) -> np.ndarray:
        """Spatial profile at t = 0."""
        return self.values[:, self.grid.t0_index].copy()

    # ---- algebra ---------------------------------------------------------

    def _check(self, other: "SpaceTimeField"):
        if other.grid != self.grid:
            raise ShapeError("fields live on different grids")

    def __add__(self, other):
        self._check(other)
        return SpaceTimeField(self.grid, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return SpaceTimeField(self.grid, self.values - other.values)

    def __mul__(self, c):
        return SpaceTimeField(self.grid, self.values * c)

    __rmul__ = __mul__

    def conj(self) -> "SpaceTimeField":
        return SpaceTimeField(self.grid, np.conj(self.values))


def zeros_field(grid: GridSpec) -> SpaceTimeField:
    return SpaceTimeField(grid, np.zeros((grid.nx, grid.nt), dtype=complex))


def profile_l2(grid: GridSpec, profile: np.ndarray) -> float:
    """L^2_x norm of a spatial profile."""
    return float(np.sqrt(grid.dx * np.sum(np.abs(profile) ** 2)))


def signal_l2(grid: GridSpec, signal: np.ndarray) -> float:
    """L^2_t norm of a time signal."""
    return float(np.sqrt(grid.dt * np.sum(np.abs(signal) ** 2)))
