"""Classical density and wave function, with the continuity check."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import quadrature
from .core_model import AnnulusChart, OrbitParams, radial_momentum_sq
from .errors import DegenerateAnnulusError, DensitySingularityError, DomainError
from .grid import PolarGrid, ResidualReport
from .hamilton_jacobi import PrincipalFunction
from .operator_lab import d_dr, d_dphi

CONTINUITY_STEP_FRACTION = 1e-5
MIN_ECCENTRICITY = 1e-6


@dataclass(frozen=True)
class FieldSample:
    rho: np.ndarray
    S: np.ndarray
    psi: np.ndarray


def density(p: OrbitParams, C, r):
    """Amplitude ``C / (sqrt(r |l|) f(r)**(1/4))``; ``rho**2`` is the ensemble density."""
    if not C > 0:
        raise DomainError("normalisation constant must be positive")
    f = radial_momentum_sq(p, r)
    if np.any(~(f > 0)):
        raise DensitySingularityError("radius at or beyond a turning point")
    r = np.asarray(r, dtype=float)
    return C / (np.sqrt(r * abs(p.l)) * f**0.25)


def radial_mass(p: OrbitParams, C, r_a, r_b, tol=1e-12):
    """``int_{r_a}^{r_b} int_0^{2 pi} rho**2 r dr dphi``.

    The integrand ``2 pi C**2 / (|l| p_r)`` is integrated on the ``sin**2``
    chart, which makes it smooth even when a limit is a turning point.
    """
    chart = AnnulusChart.of(p)
    ua, ub = chart.u_of_r(r_a), chart.u_of_r(r_b)
    pref = 2.0 * np.pi * C * C / abs(p.l)
    val, _ = quadrature.integrate(chart.dr_over_p, float(ua), float(ub), tol=tol / pref)
    return pref * val


def bin_masses(p: OrbitParams, C, edges, tol=1e-12):
    """Probability mass of each radial bin, via the same chart integrand."""
    chart = AnnulusChart.of(p)
    u = chart.u_of_r(np.asarray(edges, dtype=float))
    pref = 2.0 * np.pi * C * C / abs(p.l)
    vals, _ = quadrature.segment_integrals(chart.dr_over_p, u, tol=tol / pref)
    return pref * vals


def normalize(p: OrbitParams):
    """Return ``C > 0`` making ``int rho**2 r dr dphi = 1`` over the annulus."""
    p.require_bound()
    chart = AnnulusChart.of(p)
    if chart.turning.eccentricity_like < MIN_ECCENTRICITY:
        raise DegenerateAnnulusError(
            f"eccentricity {chart.turning.eccentricity_like:.2e} below {MIN_ECCENTRICITY:g}"
        )
    mass = radial_mass(p, 1.0, chart.turning.r_min, chart.turning.r_max)
    return float(1.0 / np.sqrt(mass))


def wavefunction(pf: PrincipalFunction, C, r, phi, t) -> FieldSample:
    """``psi = rho exp(i S)`` at the given points (broadcast)."""
    rho = density(pf.params, C, r)
    S = pf(r, phi, t)
    rho, S = np.broadcast_arrays(rho, S)
    return FieldSample(rho=rho, S=S, psi=rho * np.exp(1j * S))


def field_grid(pf: PrincipalFunction, C, grid: PolarGrid, t=0.0) -> FieldSample:
    rr, pp = grid.mesh()
    return wavefunction(pf, C, rr, pp, t)


def write_field_csv(path, grid: PolarGrid, sample: FieldSample):
    rr, pp = grid.mesh()
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "phi", "rho", "S", "re_psi", "im_psi"])
        cols = [rr, pp, sample.rho, sample.S, sample.psi.real, sample.psi.imag]
        for row in zip(*(np.ravel(c) for c in cols)):
            w.writerow([f"{v:.17g}" for v in row])


def continuity_residual_field(p: OrbitParams, pf: PrincipalFunction, C, grid: PolarGrid, h=None):
    """``div(rho**2 grad S) + m d(rho**2)/dt`` at the grid nodes.

    ``dS/dr`` is a centred difference of the interpolated action with step
    ``h``; the outer derivatives use the grid stencils.  ``rho`` is
    stationary, so the time term vanishes.  Boundary rows are NaN.
    """
    tp = pf.profile.turning
    if h is None:
        h = CONTINUITY_STEP_FRACTION * tp.width
    grid.check_inside(tp.r_min, tp.r_max, reach=h)
    rr, _ = grid.mesh()
    rho2 = density(p, C, rr) ** 2
    dSdr = pf.dS_dr(rr, h)
    radial = d_dr(rr * rho2 * dSdr, grid) / rr
    angular = d_dphi(rho2 * pf.dS_dphi, grid) / rr**2
    return radial + angular, rho2 * dSdr


def continuity_residual(p: OrbitParams, pf: PrincipalFunction, C, grid: PolarGrid, h=None) -> ResidualReport:
    """Continuity residual normalised by ``max|rho**2 dS/dr| / (r_max - r_min)``."""
    tp = pf.profile.turning
    if h is None:
        h = CONTINUITY_STEP_FRACTION * tp.width
    res, flux = continuity_residual_field(p, pf, C, grid, h=h)
    scale = float(np.max(np.abs(flux))) / tp.width
    return ResidualReport.from_field("Continuity", grid, res, scale, h_r=h)


def separated_exponent(pf: PrincipalFunction, alpha, beta, r, phi, t):
    """Exponent of the general separated density solution.

    ``-(alpha/m) (t - t(r)) - beta (phi(r) - phi) / l`` where ``t(r)`` and
    ``phi(r)`` are the profile's flight time and swept angle.  It is constant
    along every outgoing trajectory, so multiplying the density by its
    exponential preserves the continuity equation.  With
    ``alpha = beta = 0`` the plain density is recovered.
    """
    prof = pf.profile
    p = prof.params
    t_r = prof.time(r)
    phi_r = prof.angle(r)
    return -(alpha / p.m) * (np.asarray(t) - t_r) - beta * (phi_r - np.asarray(phi)) / p.l
