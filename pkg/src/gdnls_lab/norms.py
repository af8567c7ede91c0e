"""Norm families: mixed Lebesgue, dyadic Sobolev, block norms, modulation norms.

Block norms come in five sectional flavors selected by a NormVariant:

    generic(d)   per-band solution norm with the degree-dependent maximal term
                 N^{-s0} ||u||_{L^{d-1}_x L^inf_t}; time window [-1,1] for
                 d in {3,4}, the whole grid window otherwise
    local        the d=3,4 contraction norms on [-1,1] with the Strichartz
                 cluster L^inf_t L^2_x, L^4_t L^inf_x, L^6_{x,t} and the
                 low-frequency block lumped at N = 1
    global       the homogeneous family used for degree >= 6 global theory
    modulation   solution norm ||u(0)||_{L^2} + forcing norm, with the forcing
                 space enlarged by the dyadic modulation space X^{0,-1/2,1}
    gwp          same formulas as `global` (kept as a separate tag)

Forcing-space (Y) norms that are defined as infima over splittings are
evaluated as minima over a finite split family: the trivial splits plus
modulation-threshold splits at dyadic |tau + xi^2| levels.  The returned value
is an upper bound for the true infimum, which is the useful direction for
every bounded-ratio check in the laboratory.

L^infinity norms are maxima over grid samples; finite exponents are Riemann
sums with cell weights dx, dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dyadic import DyadicBand, project, psi, psi_band, representable_bands
from .errors import BandUnrepresentableError
from .grid import GridSpec, SpaceTimeField, profile_l2

VARIANT_TAGS = ("generic", "local", "global", "modulation", "gwp")


@dataclass(frozen=True)
class NormVariant:
    """Selects which sectional norm family an evaluation uses."""

    tag: str
    degree: int = 3

    def __post_init__(self):
        if self.tag not in VARIANT_TAGS:
            raise ValueError(f"unknown variant tag {self.tag!r}")
        if self.tag == "generic" and self.degree < 3:
            raise ValueError("generic variant needs degree >= 3")

    @property
    def s0(self) -> float:
        """Maximal-estimate exponent tied to the degree: gamma = d - 1."""
        gamma = self.degree - 1
        if gamma in (2, 3):
            return 1.0 / gamma
        return (gamma - 2.0) / (2.0 * gamma)

    def time_window(self, grid: GridSpec) -> Optional[tuple]:
        if self.tag == "local" or (self.tag == "generic" and self.degree in (3, 4)):
            return (-1.0, 1.0)
        return None


LOCAL = NormVariant("local")
GLOBAL = NormVariant("global")
MODULATION = NormVariant("modulation", degree=5)
GWP = NormVariant("gwp", degree=5)


def generic(degree: int) -> NormVariant:
    return NormVariant("generic", degree=degree)


# ---------------------------------------------------------------------------
# mixed Lebesgue norms
# ---------------------------------------------------------------------------

def _axis_norm(a: np.ndarray, p: float, weight: float, axis: int) -> np.ndarray:
    if np.isinf(p):
        return np.max(a, axis=axis)
    return (weight * np.sum(a ** p, axis=axis)) ** (1.0 / p)


def _window_mask(grid: GridSpec, t_window) -> slice:
    if t_window is None:
        return slice(None)
    lo, hi = t_window
    idx = np.nonzero((grid.t >= lo - 1e-12) & (grid.t <= hi + 1e-12))[0]
    return slice(int(idx[0]), int(idx[-1]) + 1)


def mixed_norm(f: SpaceTimeField, p: float, q: float, order: str = "x_then_t",
               t_window=None) -> float:
    """Mixed space-time Lebesgue norm of a field.

    order 'x_then_t' is the L^p_x L^q_t norm (q over time inside, p over space
    outside); 't_then_x' is L^p_t L^q_x.  An optional t_window restricts the
    time samples, matching the finite-time conventions of the local theory.
    """
    if order not in ("x_then_t", "t_then_x"):
        raise ValueError(f"unknown order {order!r}")
    g = f.grid
    a = np.abs(f.values[:, _window_mask(g, t_window)])
    if order == "x_then_t":
        inner = _axis_norm(a, q, g.dt, axis=1)
        return float(_axis_norm(inner, p, g.dx, axis=0))
    inner = _axis_norm(a, q, g.dx, axis=0)
    return float(_axis_norm(inner, p, g.dt, axis=0))


# ---------------------------------------------------------------------------
# dyadic Sobolev norms of spatial profiles
# ---------------------------------------------------------------------------

def _band_exponents(grid: GridSpec) -> range:
    # every nonzero grid mode sits in some band of this range, and the band
    # multipliers telescope to exactly 1 there
    lo = int(math.floor(math.log2(grid.dxi))) - 1
    hi = int(math.ceil(math.log2(grid.nyquist))) + 1
    return range(lo, hi + 1)


def sobolev_band_masses(grid: GridSpec, profile: np.ndarray):
    """Quadratic-form band masses m_N^2 = (1/2pi) int psi_N(xi) |u_hat|^2 dxi.

    The single power of psi_N makes the masses sum exactly to the L^2 mass of
    the nonzero modes (the multipliers form a partition of unity), at the
    price of a factor <= 2 against the squared-multiplier convention on any
    one band.
    """
    hat2 = np.abs(grid.fourier_x(profile)) ** 2 * (grid.dxi / (2.0 * np.pi))
    ns, masses = [], []
    for j in _band_exponents(grid):
        n = 2.0 ** j
        m2 = float(np.sum(psi_band(grid.xi, n) * hat2))
        ns.append(n)
        masses.append(m2)
    return np.array(ns), np.array(masses)


def sobolev_norm(grid: GridSpec, profile: np.ndarray, s: float,
                 homogeneous: bool = False) -> float:
    """Dyadic-sum Sobolev norm of a spatial profile.

    The homogeneous norm is (sum_N N^{2s} m_N^2)^{1/2} over all dyadic bands
    with grid support (the zero mode carries no band weight and is dropped).
    The inhomogeneous norm lumps everything at and below N = 1 into a single
    low block and sums N >= 2.
    """
    ns, m2 = sobolev_band_masses(grid, profile)
    if homogeneous:
        return float(np.sqrt(np.sum(ns ** (2.0 * s) * m2)))
    hat2 = np.abs(grid.fourier_x(profile)) ** 2 * (grid.dxi / (2.0 * np.pi))
    low = float(np.sum(psi(grid.xi) * hat2))
    high = ns >= 2.0
    return float(np.sqrt(low) + np.sqrt(np.sum(ns[high] ** (2.0 * s) * m2[high])))


# ---------------------------------------------------------------------------
# modulation shells and modulation norms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModulationShell:
    """Dyadic shell M <= |tau + xi^2| < 2M of the space-time frequency grid."""

    m: float
    mask: np.ndarray


def modulation_shells(grid: GridSpec) -> list:
    """Dyadic shells partitioning the (xi, tau) grid.

    The half-bin tau offset keeps |tau + xi^2| strictly positive, so every
    grid point lands in exactly one shell.
    """
    mod = grid.modulation
    lo = int(math.floor(math.log2(float(mod.min()))))
    hi = int(math.floor(math.log2(float(mod.max()))))
    shells = []
    for j in range(lo, hi + 1):
        m = 2.0 ** j
        mask = (mod >= m) & (mod < 2.0 * m)
        if mask.any():
            shells.append(ModulationShell(m, mask))
    return shells


def _spectral_weight(grid: GridSpec) -> float:
    return 1.0 / (grid.box_length * grid.t_len)


def shell_masses(f: SpaceTimeField) -> tuple:
    """(levels M, Fourier-side L^2 mass of the field on each shell)."""
    w = _spectral_weight(f.grid)
    t2 = np.abs(f.tilde) ** 2
    ms, masses = [], []
    for sh in modulation_shells(f.grid):
        ms.append(sh.m)
        masses.append(math.sqrt(w * float(t2[sh.mask].sum())))
    return np.array(ms), np.array(masses)


def modulation_norm(f: SpaceTimeField, b: float, q: float) -> float:
    """Dyadic modulation norm: l^q over shells of M^b times the shell mass."""
    ms, masses = shell_masses(f)
    terms = ms ** b * masses
    if np.isinf(q):
        return float(terms.max(initial=0.0))
    return float(np.sum(terms ** q) ** (1.0 / q))


def modulation_split(f: SpaceTimeField, threshold: float) -> tuple:
    """Split u = u_low + u_high at the modulation threshold |tau+xi^2| <= L."""
    mask = f.grid.modulation <= threshold
    low = f.grid.inverse_fourier_xt(np.where(mask, f.tilde, 0.0))
    low_f = SpaceTimeField(f.grid, low)
    return low_f, f - low_f


# ---------------------------------------------------------------------------
# forcing extraction (windowed spectral application of i d_t + Laplacian)
# ---------------------------------------------------------------------------

def _bump_ramp(s: np.ndarray) -> np.ndarray:
    out = np.ones_like(s)
    out[s >= 1.0] = 0.0
    mid = (s > 0.0) & (s < 1.0)
    out[mid] = np.exp(1.0 - 1.0 / (1.0 - s[mid] ** 2))
    return out


def time_bump(grid: GridSpec, flat: float = 0.6) -> tuple:
    """Smooth window eta(t) = 1 on the central `flat` fraction, 0 at the edges.

    Returns (eta, eta_dot) sampled on grid times; eta_dot is the analytic
    derivative of the bump ramp.
    """
    center = 0.5 * (grid.t_min + grid.t_max)
    half = 0.5 * grid.t_len
    z = (grid.t - center) / half
    s = (np.abs(z) - flat) / (1.0 - flat)
    eta = _bump_ramp(s)
    deta = np.zeros_like(eta)
    mid = (s > 0.0) & (s < 1.0)
    sm = s[mid]
    deta[mid] = eta[mid] * (-2.0 * sm / (1.0 - sm ** 2) ** 2)
    deta *= np.sign(z) / ((1.0 - flat) * half)
    return eta, deta


def apparent_forcing(f: SpaceTimeField, flat: float = 0.6) -> SpaceTimeField:
    """Windowed spectral evaluation of (i d_t + Laplacian) u.

    Works on eta*u so the time spectrum sees a function that vanishes at the
    window seam; the commutator i eta' u is removed analytically.  For u
    solving (i d_t + Lap) u = F this returns eta*F up to discretization error.
    """
    g = f.grid
    eta, deta = time_bump(g, flat)
    windowed = SpaceTimeField(g, f.values * eta[None, :])
    sym = -(g.tau[None, :] + g.xi[:, None] ** 2)
    lhs = g.inverse_fourier_xt(sym * windowed.tilde)
    return SpaceTimeField(g, lhs - 1j * deta[None, :] * f.values)


def equation_residual(f: SpaceTimeField, rhs: SpaceTimeField, flat: float = 0.6) -> float:
    """Relative residual ||eta*((i d_t + Lap)u - F)||_2 / ||eta*F||_2."""
    g = f.grid
    eta, _ = time_bump(g, flat)
    got = apparent_forcing(f, flat)
    want = SpaceTimeField(g, rhs.values * eta[None, :])
    denom = want.l2()
    if denom == 0.0:
        return (got - want).l2()
    return (got - want).l2() / denom


# ---------------------------------------------------------------------------
# block norms X_N / Y_N / Z_N and their dyadic aggregates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class YSplit:
    """A concrete splitting u = u1 + u2 achieving the reported Y_N value."""

    u1: SpaceTimeField
    u2: SpaceTimeField
    value: float


def _threshold_levels(grid: GridSpec, max_levels: int = 7) -> list:
    shells = modulation_shells(grid)
    ms = [sh.m for sh in shells]
    if len(ms) <= max_levels:
        return ms
    idx = np.linspace(0, len(ms) - 1, max_levels).astype(int)
    return [ms[i] for i in idx]


def _split_candidates(f: SpaceTimeField, max_levels: int = 7):
    zero = SpaceTimeField(f.grid, np.zeros_like(f.values))
    yield f, zero
    yield zero, f
    for lam in _threshold_levels(f.grid, max_levels):
        low, high = modulation_split(f, lam)
        yield high, low
        yield low, high


def y_split(f: SpaceTimeField, n: float, variant: NormVariant,
            max_levels: int = 7) -> YSplit:
    """Minimize the two-slot forcing norm over the finite split family."""
    tw = variant.time_window(f.grid)
    best = None
    for u1, u2 in _split_candidates(f, max_levels):
        if variant.tag == "modulation":
            val = (n ** -0.5) * mixed_norm(u1, 1, 2, "x_then_t", tw) \
                + modulation_norm(u2, -0.5, 1)
        else:
            val = (n ** -0.5) * mixed_norm(u1, 1, 2, "x_then_t", tw) \
                + mixed_norm(u2, 1, 2, "t_then_x", tw)
        if best is None or val < best.value:
            best = YSplit(u1, u2, val)
    return best


def yn_norm(f: SpaceTimeField, n: float, variant: NormVariant) -> float:
    """Forcing-space norm at band N for the chosen variant."""
    tw = variant.time_window(f.grid)
    if variant.tag in ("global", "gwp"):
        return (n ** -0.5) * mixed_norm(f, 1, 2, "x_then_t", tw)
    return y_split(f, n, variant).value


def _forcing_for(f: SpaceTimeField, forcing: Optional[SpaceTimeField]) -> SpaceTimeField:
    return forcing if forcing is not None else apparent_forcing(f)


def xn_norm(f: SpaceTimeField, n: float, variant: NormVariant,
            forcing: Optional[SpaceTimeField] = None) -> float:
    """Solution-space norm at band N.

    `forcing` may supply (i d_t + Lap) u when the caller knows it exactly
    (e.g. fields built by the Duhamel integrator); otherwise it is extracted
    spectrally through a smooth time window.
    """
    g = f.grid
    tw = variant.time_window(g)
    tag = variant.tag
    if tag == "modulation":
        u0 = profile_l2(g, f.slice_t0())
        return u0 + yn_norm(_forcing_for(f, forcing), n, variant)
    if tag in ("global", "gwp"):
        ff = _forcing_for(f, forcing)
        return (mixed_norm(f, np.inf, 2, "t_then_x", tw)
                + n ** -0.25 * mixed_norm(f, 4, np.inf, "x_then_t", tw)
                + n ** 0.5 * mixed_norm(f, np.inf, 2, "x_then_t", tw)
                + n ** -0.5 * mixed_norm(ff, 1, 2, "x_then_t", tw))
    if tag == "local":
        ff = _forcing_for(f, forcing)
        z = max(mixed_norm(f, np.inf, 2, "t_then_x", tw),
                mixed_norm(f, 4, np.inf, "t_then_x", tw),
                mixed_norm(f, 6, 6, "x_then_t", tw)) \
            + n ** -0.5 * mixed_norm(f, 2, np.inf, "x_then_t", tw) \
            + n ** 0.5 * mixed_norm(f, np.inf, 2, "x_then_t", tw)
        return z + yn_norm(ff, n, variant)
    # generic(d)
    ff = _forcing_for(f, forcing)
    d = variant.degree
    return (mixed_norm(f, np.inf, 2, "t_then_x", tw)
            + n ** -variant.s0 * mixed_norm(f, d - 1, np.inf, "x_then_t", tw)
            + n ** 0.5 * mixed_norm(f, np.inf, 2, "x_then_t", tw)
            + n ** -0.5 * yn_norm(ff, n, variant))


def _band_set(f: SpaceTimeField, bands: Optional[Sequence[float]],
              drop_below: float = 1e-24) -> list:
    if bands is not None:
        return list(bands)
    g = f.grid
    out = []
    hat2 = np.abs(f.hat_x) ** 2
    total = hat2.sum() + 1e-300
    for n in representable_bands(g):
        w = psi_band(g.xi, n)
        if float((w[:, None] ** 2 * hat2).sum()) / total > drop_below:
            out.append(n)
    return out


def _project_pair(f, forcing, n, kind="band"):
    band = DyadicBand(n, kind)
    pf = project(f, band)
    pff = project(forcing, band) if forcing is not None else None
    return pf, pff


def xs_norm(f: SpaceTimeField, s: float, variant: NormVariant,
            forcing: Optional[SpaceTimeField] = None,
            bands: Optional[Sequence[float]] = None) -> float:
    """Aggregated solution norm.

    local: low block at N = 1 (all frequencies at and below 1 lumped) plus the
    l^2 dyadic sum over N >= 2.  Other variants: homogeneous sum over the
    representable bands, inhomogeneous combination (s = 0 copy added).
    """
    if variant.tag == "local":
        low_f, low_ff = _project_pair(f, forcing, 1.0, "leq")
        total = xn_norm(low_f, 1.0, variant, low_ff)
        acc = 0.0
        for n in _band_set(f, bands):
            if n < 2.0:
                continue
            pf, pff = _project_pair(f, forcing, n)
            acc += n ** (2.0 * s) * xn_norm(pf, n, variant, pff) ** 2
        return total + math.sqrt(acc)
    dot0 = xs_dot_norm(f, 0.0, variant, forcing, bands)
    dots = xs_dot_norm(f, s, variant, forcing, bands) if s != 0.0 else dot0
    return dot0 + dots


def xs_dot_norm(f: SpaceTimeField, s: float, variant: NormVariant,
                forcing: Optional[SpaceTimeField] = None,
                bands: Optional[Sequence[float]] = None) -> float:
    """Homogeneous l^2 dyadic aggregate of the per-band solution norm."""
    acc = 0.0
    for n in _band_set(f, bands):
        pf, pff = _project_pair(f, forcing, n)
        acc += n ** (2.0 * s) * xn_norm(pf, n, variant, pff) ** 2
    return math.sqrt(acc)


def ys_norm(f: SpaceTimeField, s: float, variant: NormVariant,
            bands: Optional[Sequence[float]] = None) -> float:
    """Aggregated forcing norm, mirroring the xs_norm aggregation."""
    if variant.tag == "local":
        low = project(f, DyadicBand(1.0, "leq"))
        total = yn_norm(low, 1.0, variant)
        acc = 0.0
        for n in _band_set(f, bands):
            if n < 2.0:
                continue
            acc += n ** (2.0 * s) * yn_norm(project(f, DyadicBand(n)), n, variant) ** 2
        return total + math.sqrt(acc)
    dot0 = ys_dot_norm(f, 0.0, variant, bands)
    dots = ys_dot_norm(f, s, variant, bands) if s != 0.0 else dot0
    return dot0 + dots


def ys_dot_norm(f: SpaceTimeField, s: float, variant: NormVariant,
                bands: Optional[Sequence[float]] = None) -> float:
    acc = 0.0
    for n in _band_set(f, bands):
        acc += n ** (2.0 * s) * yn_norm(project(f, DyadicBand(n)), n, variant) ** 2
    return math.sqrt(acc)
