"""Grid operators and the Schroedinger-like residual of the classical Hamiltonian.

Fields live on ``(n_r, n_phi)`` arrays over a :class:`~cwflab.grid.PolarGrid`.
Radial derivatives use three-point stencils that account for non-uniform
node spacing; the first and last radial rows are left as NaN.  Angular
derivatives are spectral.  A field that picks up a factor
``exp(2 pi i twist)`` per revolution (``exp(i l phi)`` with non-integer
``l``) is handled by passing ``twist``.
"""

from __future__ import annotations

import numpy as np

from .core_model import OrbitParams, potential, turning_points
from .errors import DomainError
from .grid import PolarGrid, ResidualReport


def _check(field, grid: PolarGrid):
    field = np.asarray(field)
    if field.shape != grid.shape:
        raise DomainError(f"field shape {field.shape} does not match grid {grid.shape}")
    return field


def _spacings(grid):
    r = grid.r
    h1 = (r[1:-1] - r[:-2])[:, None]
    h2 = (r[2:] - r[1:-1])[:, None]
    return h1, h2


def d_dr(field, grid: PolarGrid):
    """Second-order first radial derivative; boundary rows NaN."""
    f = _check(field, grid)
    h1, h2 = _spacings(grid)
    out = np.full(f.shape, np.nan, dtype=np.result_type(f, float))
    out[1:-1] = (
        -h2 / (h1 * (h1 + h2)) * f[:-2]
        + (h2 - h1) / (h1 * h2) * f[1:-1]
        + h1 / (h2 * (h1 + h2)) * f[2:]
    )
    return out


def _twist(twist):
    return float(twist) - float(np.round(twist))


def _spectral_phi(field, grid: PolarGrid, order, twist):
    f = _check(field, grid)
    n = grid.n_phi
    kappa = _twist(twist)
    waves = np.fft.fftfreq(n, d=1.0 / n)
    if kappa != 0.0:
        carrier = np.exp(1j * kappa * grid.phi)[None, :]
        g = f / carrier
    else:
        carrier = None
        g = f
    ghat = np.fft.fft(g, axis=1)
    k = waves + kappa
    if order == 1:
        mult = 1j * k
        if kappa == 0.0 and n % 2 == 0:
            mult[n // 2] = 0.0
    else:
        mult = -(k**2)
    out = np.fft.ifft(ghat * mult[None, :], axis=1)
    if carrier is not None:
        out = out * carrier
    elif not np.iscomplexobj(f):
        out = out.real
    return out


def d_dphi(field, grid: PolarGrid, twist=0.0):
    return _spectral_phi(field, grid, 1, twist)


def d2_dphi2(field, grid: PolarGrid, twist=0.0):
    return _spectral_phi(field, grid, 2, twist)


def polar_laplacian(field, grid: PolarGrid, twist=0.0):
    """``(1/r) d_r(r d_r f) + (1/r**2) d_phi**2 f``.

    The radial part is the conservative three-point form with fluxes at cell
    midpoints.  It maps ``r**2`` to ``4 + (h2 - h1) / r``, which is exactly 4
    on a uniform grid.  Boundary rows are NaN.
    """
    f = _check(field, grid)
    r = grid.r
    h1, h2 = _spacings(grid)
    r_in = (0.5 * (r[1:-1] + r[:-2]))[:, None]
    r_out = (0.5 * (r[2:] + r[1:-1]))[:, None]
    ri = r[1:-1, None]
    out = np.full(f.shape, np.nan, dtype=np.result_type(f, float))
    flux_out = r_out * (f[2:] - f[1:-1]) / h2
    flux_in = r_in * (f[1:-1] - f[:-2]) / h1
    out[1:-1] = (flux_out - flux_in) / (0.5 * (h1 + h2)) / ri
    out[1:-1] += d2_dphi2(f, grid, twist)[1:-1] / ri**2
    return out


def quantum_potential(rho, grid: PolarGrid, m=1.0):
    """``(1/2m) lap(rho) / rho`` for a density-amplitude field."""
    rho = _check(rho, grid)
    return polar_laplacian(rho, grid) / (2.0 * m * rho)


def quantum_potential_for(p: OrbitParams, C, grid: PolarGrid):
    """Quantum-potential term for the orbit's own density on ``grid``."""
    from .wavefunction import density

    _require_interior(p, grid)
    rr, _ = grid.mesh()
    return quantum_potential(density(p, C, rr), grid, p.m)


def _require_interior(p: OrbitParams, grid: PolarGrid):
    tp = turning_points(p)
    grid.check_inside(tp.r_min, tp.r_max)


def sle_residual_from_fields(rho, S, grid: PolarGrid, m, V, E, twist=0.0):
    """``H_cl psi - E psi`` for ``psi = rho exp(iS)``.

    ``S`` is the spatial phase; for a stationary state ``i d_t psi = E psi``
    so the time derivative never needs to be evaluated.

    Returns
    -------
    residual, psi : ndarray
        Complex arrays on the grid (boundary rows NaN in ``residual``).
    """
    rho = _check(rho, grid)
    psi = rho * np.exp(1j * np.asarray(S))
    kinetic = -polar_laplacian(psi, grid, twist) / (2.0 * m)
    q = quantum_potential(rho, grid, m)
    res = kinetic + (V + q - E) * psi
    return res, psi


def sle_residual_field(p: OrbitParams, pf, C, grid: PolarGrid):
    from .wavefunction import density

    _require_interior(p, grid)
    rr, pp = grid.mesh()
    rho = density(p, C, rr)
    S = pf(rr, pp, 0.0)
    return sle_residual_from_fields(rho, S, grid, p.m, potential(p, rr), p.E, twist=p.l)


def sle_residual(p: OrbitParams, pf, C, grid: PolarGrid) -> ResidualReport:
    """Normalised ``|H_cl psi - E psi| / (|E| |psi|)``."""
    res, psi = sle_residual_field(p, pf, C, grid)
    return ResidualReport.from_field("SLE", grid, np.abs(res) / np.abs(psi), abs(p.E))
