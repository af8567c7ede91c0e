"""The contraction map u -> free wave + Duhamel(P(u)) and an independent oracle.

picard_iterate runs the fixed-point iteration started at the free evolution,
recording the block-norm size of successive differences; a contraction
certificate is the observed sequence of difference ratios.  reference_solve
integrates the same equation by an integrating-factor classical Runge-Kutta
scheme, giving a cross-validation path that shares nothing with the Duhamel
quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .errors import (DealiasError, DivergenceError, MissingMeasurementError,
                     ResolutionError)
from .grid import GridSpec, SpaceTimeField
from .nonlinearity import PolynomialSpec, evaluate, evaluate_profile
from .norms import NormVariant, xs_norm
from .propagator import duhamel, free_evolve


@dataclass
class PicardTrace:
    """Iterates and contraction diagnostics of the fixed-point map."""

    iterates: List[SpaceTimeField]
    forcings: List[Optional[SpaceTimeField]]
    diffs: List[float] = field(default_factory=list)
    ratios: List[float] = field(default_factory=list)
    s: float = 0.5
    variant: Optional[NormVariant] = None
    diverged: bool = False

    @property
    def last(self) -> SpaceTimeField:
        return self.iterates[-1]

    def aposteriori_bound(self) -> float:
        """Geometric tail bound (last diff)/(1 - last ratio) for the fixed point."""
        if not self.ratios or self.ratios[-1] >= 1.0:
            return float("inf")
        return self.diffs[-1] / (1.0 - self.ratios[-1])


def picard_map(grid: GridSpec, u0: np.ndarray, p: PolynomialSpec,
               u: SpaceTimeField):
    """One application of the contraction map; returns (Lu, forcing P(u))."""
    forcing = evaluate(p, u)
    return free_evolve(grid, u0) + duhamel(forcing), forcing


def picard_iterate(grid: GridSpec, u0: np.ndarray, p: PolynomialSpec,
                   s: float, variant: NormVariant, k_max: int = 6,
                   bands: Optional[Sequence[float]] = None,
                   divergence_factor: float = 10.0) -> PicardTrace:
    """Iterate the contraction map from the free evolution.

    Differences are measured in the aggregated solution norm; the forcing of
    each difference is known exactly from the construction, so no spectral
    extraction is involved.  Raises DivergenceError (carrying the partial
    trace) when differences grow by more than divergence_factor on two
    consecutive steps.
    """
    trace = PicardTrace(iterates=[free_evolve(grid, u0)], forcings=[None],
                        s=s, variant=variant)
    for _ in range(k_max):
        try:
            new, forcing = picard_map(grid, u0, p, trace.iterates[-1])
        except DealiasError:
            # iterates blowing up spread their spectrum to the grid edge
            trace.diverged = True
            raise DivergenceError(
                "iterate spectrum reached the grid edge; iteration diverging",
                trace)
        prev_forcing = trace.forcings[-1]
        diff_forcing = forcing - prev_forcing if prev_forcing is not None else forcing
        diff = xs_norm(new - trace.iterates[-1], s, variant,
                       forcing=diff_forcing, bands=bands)
        trace.iterates.append(new)
        trace.forcings.append(forcing)
        trace.diffs.append(diff)
        if len(trace.diffs) >= 2 and trace.diffs[-2] > 0:
            trace.ratios.append(trace.diffs[-1] / trace.diffs[-2])
        if len(trace.diffs) >= 3:
            growing = (trace.diffs[-1] > divergence_factor * trace.diffs[-2]
                       and trace.diffs[-2] > divergence_factor * trace.diffs[-3])
            if growing:
                trace.diverged = True
                raise DivergenceError("fixed-point iteration diverging", trace)
        if diff == 0.0:
            break
    return trace


def fixed_point_residual(grid: GridSpec, u0: np.ndarray, p: PolynomialSpec,
                         trace: PicardTrace) -> float:
    """||u_K - L u_K|| in the trace's aggregated norm."""
    new, forcing = picard_map(grid, u0, p, trace.last)
    prev_forcing = trace.forcings[-1]
    diff_forcing = forcing - prev_forcing if prev_forcing is not None else forcing
    return xs_norm(new - trace.last, trace.s, trace.variant, forcing=diff_forcing)


def contraction_constant(c1: float, c2: float, d: int) -> float:
    """Smallness threshold min{(8 c1 c2)^{-1/(d-1)}, (4 c2)^{-1/(d-1)}}.

    c1 and c2 are the measured constants of the linear and multilinear
    estimates; the returned value is an empirical surrogate for the analytic
    data-size threshold, valid only as far as those measurements are.
    """
    e = 1.0 / (d - 1)
    return min((8.0 * c1 * c2) ** -e, (4.0 * c2) ** -e)


def contraction_constant_from_report(fits: dict, d: int,
                                     linear_case: str, multilinear_case: str) -> float:
    """Plug measured constants out of a run-record fits mapping."""
    for case in (linear_case, multilinear_case):
        if case not in fits:
            raise MissingMeasurementError(f"case {case!r} missing from report")
    c1 = fits[linear_case]["max_ratio"]
    c2 = fits[multilinear_case]["max_ratio"]
    return contraction_constant(c1, c2, d)


def reference_solve(grid: GridSpec, u0: np.ndarray, p: Optional[PolynomialSpec],
                    substeps: int = 2, check_halving: bool = False,
                    halving_tol: float = 1e-6) -> SpaceTimeField:
    """Integrating-factor classical RK4 march through the grid times.

    Written on the spectral side: v = e^{i xi^2 t} u_hat obeys
    v' = -i e^{i xi^2 t} P_hat(u), which RK4 integrates with `substeps`
    stages per grid interval, forward and backward from t = 0.
    """
    out = _if_rk4(grid, u0, p, substeps)
    if check_halving:
        fine = _if_rk4(grid, u0, p, 2 * substeps)
        err = np.abs(out - fine).max()
        scale = np.abs(out).max() + 1e-300
        if err / scale > halving_tol:
            raise ResolutionError(
                f"halving the step moves the solution by {err / scale:.2e}")
        out = fine
    return SpaceTimeField(grid, out)


def _if_rk4(grid: GridSpec, u0: np.ndarray, p: Optional[PolynomialSpec],
            substeps: int) -> np.ndarray:
    xi2 = grid.xi ** 2
    j0 = grid.t0_index

    def rhs(v, t):
        if p is None:
            return np.zeros_like(v)
        u_phys = grid.inverse_fourier_x(np.exp(-1j * xi2 * t) * v)
        f_hat = grid.fourier_x(evaluate_profile(p, grid, u_phys))
        return -1j * np.exp(1j * xi2 * t) * f_hat

    def march(v, t, h, nsteps):
        for _ in range(nsteps):
            k1 = rhs(v, t)
            k2 = rhs(v + 0.5 * h * k1, t + 0.5 * h)
            k3 = rhs(v + 0.5 * h * k2, t + 0.5 * h)
            k4 = rhs(v + h * k3, t + h)
            v = v + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
        return v

    values = np.empty((grid.nx, grid.nt), dtype=complex)
    hat0 = grid.fourier_x(np.asarray(u0, dtype=complex))
    values[:, j0] = grid.inverse_fourier_x(hat0)

    v = hat0.copy()
    t = 0.0
    for j in range(j0, grid.nt - 1):
        v = march(v, t, grid.dt / substeps, substeps)
        t += grid.dt
        values[:, j + 1] = grid.inverse_fourier_x(np.exp(-1j * xi2 * t) * v)

    v = hat0.copy()
    t = 0.0
    for j in range(j0, 0, -1):
        v = march(v, t, -grid.dt / substeps, substeps)
        t -= grid.dt
        values[:, j - 1] = grid.inverse_fourier_x(np.exp(-1j * xi2 * t) * v)
    return values


def mass(grid: GridSpec, profile: np.ndarray) -> float:
    """Conserved L^2 mass of a spatial slice."""
    return float(grid.dx * np.sum(np.abs(profile) ** 2))
