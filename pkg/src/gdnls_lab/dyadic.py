"""Dyadic frequency bands: smooth cutoffs, band projections, half-line projections.

The mother cutoff psi equals 1 on |xi| <= 2, vanishes for |xi| >= 4, and ramps
smoothly in between with the bump profile exp(1 - 1/(1 - s^2)), s = (|xi|-2)/2.
The band multiplier is psi_N(xi) = psi(xi/N) - psi(2 xi/N): it vanishes for
|xi| <= N and |xi| >= 4N, equals 1 at |xi| = 2N, and the family telescopes to a
partition of unity.  A band N is representable on a grid only when 4N lies
strictly below the Nyquist wavenumber and N is at least one box wavenumber.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BandUnrepresentableError, UndefinedRatioError
from .grid import GridSpec, SpaceTimeField


def psi(xi) -> np.ndarray:
    """Mother cutoff: 1 on |xi| <= 2, 0 on |xi| >= 4, smooth bump ramp between."""
    a = np.abs(np.asarray(xi, dtype=float))
    out = np.zeros_like(a)
    out[a <= 2.0] = 1.0
    mid = (a > 2.0) & (a < 4.0)
    s = (a[mid] - 2.0) / 2.0
    out[mid] = np.exp(1.0 - 1.0 / (1.0 - s * s))
    return out


def psi_band(xi, n: float) -> np.ndarray:
    """Band multiplier psi_N(xi) = psi(xi/N) - psi(2 xi/N)."""
    return psi(np.asarray(xi) / n) - psi(2.0 * np.asarray(xi) / n)


def psi_leq(xi, n: float) -> np.ndarray:
    """Low-pass multiplier: the telescoped sum of bands at and below N.

    Equals psi(xi/N); in particular the xi = 0 mode is kept.
    """
    return psi(np.asarray(xi) / n)


def psi_gt(xi, n: float) -> np.ndarray:
    """High-pass multiplier 1 - psi(xi/N)."""
    return 1.0 - psi(np.asarray(xi) / n)


@dataclass(frozen=True)
class DyadicBand:
    """A dyadic frequency selector: N = 2^j with kind band / leq / gt."""

    n: float
    kind: str = "band"

    def __post_init__(self):
        if self.kind not in ("band", "leq", "gt"):
            raise ValueError(f"unknown band kind {self.kind!r}")
        j = np.log2(self.n)
        if not np.isclose(j, np.rint(j), atol=1e-12):
            raise ValueError(f"N must be a power of two, got {self.n}")

    def multiplier(self, xi) -> np.ndarray:
        if self.kind == "band":
            return psi_band(xi, self.n)
        if self.kind == "leq":
            return psi_leq(xi, self.n)
        return psi_gt(xi, self.n)


def band_representable(grid: GridSpec, n: float) -> bool:
    """True when the band multiplier psi_N fits on the grid: 4N < Nyquist, N >= 2 pi/L."""
    return 4.0 * n < grid.nyquist and n >= grid.dxi


def require_band(grid: GridSpec, n: float):
    if not band_representable(grid, n):
        raise BandUnrepresentableError(
            f"band N={n} not representable: need {grid.dxi} <= N and 4N < {grid.nyquist}")


def representable_bands(grid: GridSpec) -> list:
    """All representable dyadic N on this grid, ascending."""
    lo = int(np.ceil(np.log2(grid.dxi) - 1e-9))
    hi = int(np.floor(np.log2(grid.nyquist / 4.0) + 1e-9))
    out = [2.0 ** j for j in range(lo, hi + 1)]
    return [n for n in out if band_representable(grid, n)]


def project(f: SpaceTimeField, band: DyadicBand) -> SpaceTimeField:
    """Littlewood-Paley projection of a field: multiply the x-spectrum by the band cutoff."""
    if band.kind == "band":
        require_band(f.grid, band.n)
    m = band.multiplier(f.grid.xi)
    return SpaceTimeField(f.grid, f.grid.inverse_fourier_x(m[:, None] * f.hat_x))


def project_profile(grid: GridSpec, profile: np.ndarray, band: DyadicBand) -> np.ndarray:
    """Littlewood-Paley projection of a spatial profile."""
    if band.kind == "band":
        require_band(grid, band.n)
    m = band.multiplier(grid.xi)
    return grid.inverse_fourier_x(m * grid.fourier_x(profile))


def riesz(f: SpaceTimeField, sign: str) -> SpaceTimeField:
    """Half-line frequency projection: keep xi >= 0 for '+', xi < 0 for '-'.

    The two projections are exactly complementary: riesz(f,'+') + riesz(f,'-') == f.
    """
    if sign not in ("+", "-"):
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    mask = f.grid.xi >= 0.0 if sign == "+" else f.grid.xi < 0.0
    return SpaceTimeField(f.grid, f.grid.inverse_fourier_x(mask[:, None] * f.hat_x))


def riesz_profile(grid: GridSpec, profile: np.ndarray, sign: str) -> np.ndarray:
    mask = grid.xi >= 0.0 if sign == "+" else grid.xi < 0.0
    return grid.inverse_fourier_x(mask * grid.fourier_x(profile))


def derivative_x(f: SpaceTimeField, order: int = 1) -> SpaceTimeField:
    """Spectral x-derivative of a field."""
    sym = (1j * f.grid.xi[:, None]) ** order
    return SpaceTimeField(f.grid, f.grid.inverse_fourier_x(sym * f.hat_x))


def bernstein_ratio(f: SpaceTimeField, n: float, p: float, q: float) -> float:
    """Measured derivative gain on a band: ||d_x P_N f|| / (N ||P_N f||) in L^p_x L^q_t.

    The field is projected to the band first; the contract is a grid-independent
    upper bound on the ratio.
    """
    from .norms import mixed_norm  # local import to avoid a cycle

    pf = project(f, DyadicBand(n))
    denom = mixed_norm(pf, p, q, "x_then_t")
    if denom == 0.0:
        raise UndefinedRatioError("band projection vanishes; ratio undefined")
    num = mixed_norm(derivative_x(pf), p, q, "x_then_t")
    return num / (n * denom)
