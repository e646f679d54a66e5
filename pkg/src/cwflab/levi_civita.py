"""Levi-Civita map between the planar oscillator and the planar Kepler problem.

Conventions: oscillator quantities carry the coordinates ``(rt, theta)`` and
time ``tau``; Kepler quantities ``(r, phi)`` and ``t``.  The map is

    r = rt**2,   phi = 2 theta,   dt = (rt**2 / c) dtau,

with parameters ``E = -2 c**2 k'``, ``k = 4 c**2 E'`` and ``l = 2 c l'``.

The stationary phases are related by ``S = 4c S~`` only once the energy
terms are identified through ``E dt = 4c E' dtau`` on a constant-energy
surface; comparisons of wave functions therefore assign the Kepler time
``t = 4c E' tau / E`` to a matched oscillator event.  The Sundman time
``t(tau)`` is still tabulated (it fixes the period correspondence) and its
phase offset against ``4c S~`` is reported for information.
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.integrate import cumulative_simpson

from . import quadrature
from .core_model import OrbitParams, System, potential, turning_points
from .errors import DomainError, UnmappedParametersError
from .grid import PolarGrid, ResidualReport
from .hamilton_jacobi import PrincipalFunction, RadialProfile, build_radial_profile, default_step
from .operator_lab import d_dphi, d_dr, sle_residual_from_fields
from .wavefunction import CONTINUITY_STEP_FRACTION, density, normalize

PAIR_RTOL = 1e-12


@dataclass(frozen=True)
class LeviCivitaConfig:
    c: float = 0.25
    gamma: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise DomainError(f"map constant c must be positive, got {self.c}")
        if self.gamma != 1.0:
            raise DomainError("only gamma = 1 is supported")

    @property
    def exact_phase(self) -> bool:
        """True when ``4c = 1`` so that ``exp(iS) = exp(iS~)``."""
        return abs(4.0 * self.c - 1.0) < 1e-14


def map_coordinates(cfg: LeviCivitaConfig, rt, theta):
    rt = np.asarray(rt, dtype=float)
    if np.any(~(rt > 0)):
        raise DomainError("oscillator radius must be positive")
    return cfg.gamma * rt**2, 2.0 * np.asarray(theta, dtype=float)


def map_parameters(cfg: LeviCivitaConfig, osc: OrbitParams) -> OrbitParams:
    """Kepler parameters whose orbits are the images of ``osc``'s orbits."""
    if osc.system is not System.OSCILLATOR:
        raise DomainError("map_parameters expects oscillator parameters")
    osc.require_bound()
    c = cfg.c
    return OrbitParams(
        System.KEPLER,
        E=-2.0 * c * c * osc.coupling,
        l=2.0 * c * osc.l,
        coupling=4.0 * c * c * osc.E,
        m=osc.m,
    )


def unmap_parameters(cfg: LeviCivitaConfig, kep: OrbitParams) -> OrbitParams:
    """Inverse of :func:`map_parameters`."""
    if kep.system is not System.KEPLER:
        raise DomainError("unmap_parameters expects Kepler parameters")
    kep.require_bound()
    c = cfg.c
    return OrbitParams(
        System.OSCILLATOR,
        E=kep.coupling / (4.0 * c * c),
        l=kep.l / (2.0 * c),
        coupling=-kep.E / (2.0 * c * c),
        m=kep.m,
    )


def check_pair(cfg: LeviCivitaConfig, osc: OrbitParams, kep: OrbitParams, rtol=PAIR_RTOL):
    """Raise :class:`UnmappedParametersError` unless ``kep`` is the image of ``osc``."""
    expected = map_parameters(cfg, osc)
    bad = [
        name for name in ("E", "l", "coupling", "m")
        if not np.isclose(getattr(kep, name), getattr(expected, name), rtol=rtol, atol=0)
    ]
    if kep.system is not System.KEPLER or bad:
        raise UnmappedParametersError(
            "kepler " + ", ".join(f"{n}={getattr(kep, n):g} (expected {getattr(expected, n):g})" for n in bad)
        )


def map_momenta(cfg: LeviCivitaConfig, rt, p_rt, p_theta):
    rt = np.asarray(rt, dtype=float)
    if np.any(~(rt > 0)):
        raise DomainError("oscillator radius must be positive")
    return 2.0 * cfg.c / rt * np.asarray(p_rt), 2.0 * cfg.c * np.asarray(p_theta)


def turning_point_correspondence(cfg: LeviCivitaConfig, osc: OrbitParams) -> dict:
    """Sorted Kepler turning radii against the squared oscillator turning radii."""
    kep = map_parameters(cfg, osc)
    tk, to = turning_points(kep), turning_points(osc)
    kepler = np.array([tk.r_min, tk.r_max])
    squared = np.sort(np.array([to.r_min, to.r_max]) ** 2)
    return {
        "kepler": kepler.tolist(),
        "oscillator_squared": squared.tolist(),
        "max_rel_deviation": float(np.max(np.abs(kepler - squared) / squared)),
    }


def energy_surface_identity(cfg: LeviCivitaConfig, osc: OrbitParams) -> dict:
    """Compare ``E A**2`` with ``4 c**2 E'`` for the amplitude ``A = sqrt(2E'/k')``.

    Under ``E = -2 c**2 k'`` the two agree in magnitude and differ in sign.
    """
    kep = map_parameters(cfg, osc)
    amp = turning_points(osc).amplitude
    lhs = kep.E * amp**2
    rhs = 4.0 * cfg.c**2 * osc.E
    return {
        "amplitude": amp,
        "E_A2": lhs,
        "four_c2_Eprime": rhs,
        "magnitude_rel_deviation": abs(abs(lhs) - abs(rhs)) / abs(rhs),
    }


# --- time ---------------------------------------------------------------------


@dataclass(frozen=True)
class TimeMap:
    """Monotone table ``tau -> t`` with cubic interpolation both ways."""

    tau: np.ndarray
    t: np.ndarray
    rt: np.ndarray
    c: float

    def __post_init__(self):
        if not (np.all(np.diff(self.tau) > 0) and np.all(np.diff(self.t) > 0)):
            raise ValueError("time map must be strictly increasing")
        rate = self.rt**2 / self.c
        object.__setattr__(self, "_fwd", CubicHermiteSpline(self.tau, self.t, rate))
        object.__setattr__(self, "_inv", CubicHermiteSpline(self.t, self.tau, 1.0 / rate))

    def t_of_tau(self, tau):
        return self._fwd(tau)

    def tau_of_t(self, t):
        return self._inv(t)

    def pairs(self):
        return list(zip(self.tau.tolist(), self.t.tolist()))


def sundman_time(cfg: LeviCivitaConfig, tau, rt):
    """``t(tau) = int rt(tau)**2 / c dtau`` for sampled ``rt``, starting at 0."""
    tau = np.asarray(tau, dtype=float)
    rate = np.asarray(rt, dtype=float) ** 2 / cfg.c
    return cumulative_simpson(rate, x=tau, initial=0.0)


def map_time(cfg: LeviCivitaConfig, osc_profile: RadialProfile, tol=1e-10) -> TimeMap:
    """Sundman time along an oscillator profile, by quadrature on its chart."""
    chart = osc_profile.chart
    m = osc_profile.params.m

    def rate(u):
        return chart.r_of_u(u) ** 2 / cfg.c * m * chart.dr_over_p(u)

    t, _ = quadrature.cumulative(rate, osc_profile.u, tol=tol)
    i_ref = int(np.argmin(np.abs(osc_profile.r - osc_profile.r_ref)))
    t = t - t[i_ref]
    return TimeMap(tau=osc_profile.t.copy(), t=t, rt=osc_profile.r.copy(), c=cfg.c)


# --- action -------------------------------------------------------------------


@dataclass(frozen=True)
class PairedProfiles:
    cfg: LeviCivitaConfig
    osc: OrbitParams
    kep: OrbitParams
    osc_profile: RadialProfile = field(repr=False)
    kep_profile: RadialProfile = field(repr=False)

    @classmethod
    def build(cls, cfg, osc, kep=None, n_osc=512, n_kep=2048):
        if kep is None:
            kep = map_parameters(cfg, osc)
        else:
            check_pair(cfg, osc, kep)
        return cls(cfg, osc, kep, build_radial_profile(osc, n_osc), build_radial_profile(kep, n_kep))


@dataclass(frozen=True)
class ActionReport:
    n_nodes: int
    max_action_deviation: float
    reference_actions: tuple
    ratio_dS_dSt: float
    max_ratio_deviation: float
    max_sundman_time_offset: float

    def to_dict(self):
        return asdict(self)


def matched_trajectory(pair: PairedProfiles, tmap: TimeMap | None = None):
    """Oscillator events on the outgoing branch and their Kepler images.

    Returns a dict of arrays: ``rt, theta, tau`` and ``r, phi``, with Kepler
    times ``t_surface = 4c E' tau / E`` and ``t_sundman``.
    """
    cfg, osc, kep = pair.cfg, pair.osc, pair.kep
    op = pair.osc_profile
    rt, theta, tau = op.r, op.phi, op.t
    r, phi = map_coordinates(cfg, rt, theta)
    r = np.clip(r, pair.kep_profile.turning.r_min, pair.kep_profile.turning.r_max)
    if tmap is None:
        tmap = map_time(cfg, op)
    return {
        "rt": rt,
        "theta": theta,
        "tau": tau,
        "r": r,
        "phi": phi,
        "t_surface": 4.0 * cfg.c * osc.E * tau / kep.E,
        "t_sundman": tmap.t,
    }


def map_action(cfg: LeviCivitaConfig, osc: OrbitParams, kep: OrbitParams | None = None,
               n_nodes=512, pair: PairedProfiles | None = None) -> ActionReport:
    """Check ``R(rt**2) = 4c R~(rt)`` and ``S = 4c S~`` along matched events."""
    if pair is None:
        pair = PairedProfiles.build(cfg, osc, kep, n_osc=n_nodes)
    osc, kep = pair.osc, pair.kep
    ev = matched_trajectory(pair)
    R_k = pair.kep_profile.action(ev["r"])
    R_o = pair.osc_profile.R
    action_dev = float(np.max(np.abs(R_k - 4.0 * cfg.c * R_o)))

    S_t = R_o + osc.l * ev["theta"] - osc.E * ev["tau"]
    S_surface = R_k + kep.l * ev["phi"] - kep.E * ev["t_surface"]
    S_sundman = R_k + kep.l * ev["phi"] - kep.E * ev["t_sundman"]

    dS = S_surface[2:] - S_surface[:-2]
    dSt = S_t[2:] - S_t[:-2]
    # dS~ vanishes where rt**2 = E'/k' along the orbit; skip that neighbourhood
    keep = np.abs(dSt) > 1e-3 * np.max(np.abs(dSt))
    ratio = dS[keep] / dSt[keep]
    slope = float(np.sum(dS * dSt) / np.sum(dSt * dSt))

    return ActionReport(
        n_nodes=int(R_o.size),
        max_action_deviation=action_dev,
        reference_actions=(float(R_k[0]), float(R_o[0])),
        ratio_dS_dSt=slope,
        max_ratio_deviation=float(np.max(np.abs(ratio - 4.0 * cfg.c))),
        max_sundman_time_offset=float(np.max(np.abs(S_sundman - 4.0 * cfg.c * S_t))),
    )


# --- wave functions -----------------------------------------------------------


@dataclass
class EquivalenceReport:
    c: float
    parameters: dict
    turning_points: dict
    energy_surface: dict
    action: dict
    phase_comparison: str
    max_phase_deviation: float
    max_modulus_deviation: float
    fitted_K: float
    closed_form_K: float
    K_rel_deviation: float
    reference_phases: tuple
    residuals: dict
    matched: dict = field(default_factory=dict, repr=False)

    def to_dict(self):
        d = asdict(self)
        d.pop("matched")
        d["reference_phases"] = list(self.reference_phases)
        return d

    def write_matched_csv(self, path):
        cols = ["rt", "theta", "tau", "abs_psi", "abs_K_phi", "delta_S"]
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for row in zip(*(np.ravel(self.matched[c]) for c in cols)):
                w.writerow([f"{v:.17g}" for v in row])


def _wrap(x):
    return (np.asarray(x) + np.pi) % (2.0 * np.pi) - np.pi


def map_wavefunction(cfg: LeviCivitaConfig, osc: OrbitParams, kep: OrbitParams | None = None,
                     n_r=64, n_theta=16, margin=0.05, pair: PairedProfiles | None = None,
                     with_residuals=True) -> EquivalenceReport:
    """Compare the Kepler wave function with the mapped oscillator wave function.

    Matched events are a clustered ``rt`` grid over the oscillator annulus
    times a uniform ``theta`` grid, each at the oscillator time ``tau(rt)``
    of the outgoing branch.  A single positive constant ``K`` is fitted to
    the moduli by least squares.
    """
    if pair is None:
        pair = PairedProfiles.build(cfg, osc, kep)
    osc, kep = pair.osc, pair.kep
    grid = PolarGrid.for_params(osc, n_r=n_r, n_phi=n_theta, margin=margin)
    rt2, th2 = grid.mesh()
    tau = pair.osc_profile.time(rt2)
    r, phi = map_coordinates(cfg, rt2, th2)
    t_surface = 4.0 * cfg.c * osc.E * tau / kep.E
    tmap = map_time(cfg, pair.osc_profile)
    t_sundman = tmap.t_of_tau(tau)

    C_k, C_o = normalize(kep), normalize(osc)
    pf_k, pf_o = PrincipalFunction(pair.kep_profile), PrincipalFunction(pair.osc_profile)
    rho_k, rho_o = density(kep, C_k, r), density(osc, C_o, rt2)
    S_k, S_o = pf_k(r, phi, t_surface), pf_o(rt2, th2, tau)

    K_fit = float(np.sum(rho_k * rho_o) / np.sum(rho_o * rho_o))
    K_closed = C_k / (2.0 * cfg.c * C_o)
    mod_dev = float(np.max(np.abs(rho_k - K_fit * rho_o) / rho_k))
    if cfg.exact_phase:
        mode = "phase of psi against phase of Phi"
        dS = _wrap(S_k - S_o)
    else:
        mode = "phase comparison against 4cS~"
        dS = S_k - 4.0 * cfg.c * S_o

    tp_o, tp_k = pair.osc_profile.turning, pair.kep_profile.turning
    ref = (float(pf_k(tp_k.r_min, 0.0, 0.0)), float(pf_o(tp_o.r_min, 0.0, 0.0)))
    action = map_action(cfg, osc, pair=pair).to_dict()
    action["sundman_phase_offset_max"] = float(
        np.max(np.abs(_wrap(pf_k(r, phi, t_sundman) - 4.0 * cfg.c * S_o)))
    )

    residuals = {}
    if with_residuals and cfg.exact_phase:
        sle = transform_sle(cfg, kep, pair=pair)
        native = native_oscillator_sle(osc, pair=pair)
        residuals = {
            "mapped_sle": sle.to_dict(),
            "native_sle": native.to_dict(),
            "mapped_hj": mapped_hj_residual(cfg, kep, pair=pair).to_dict(),
            "mapped_continuity": mapped_continuity_residual(cfg, kep, pair=pair).to_dict(),
        }

    return EquivalenceReport(
        c=cfg.c,
        parameters={"oscillator": osc.to_record(), "kepler": kep.to_record()},
        turning_points=turning_point_correspondence(cfg, osc),
        energy_surface=energy_surface_identity(cfg, osc),
        action=action,
        phase_comparison=mode,
        max_phase_deviation=float(np.max(np.abs(dS))),
        max_modulus_deviation=mod_dev,
        fitted_K=K_fit,
        closed_form_K=float(K_closed),
        K_rel_deviation=float(abs(K_fit - K_closed) / K_closed),
        reference_phases=ref,
        residuals=residuals,
        matched={
            "rt": rt2,
            "theta": th2,
            "tau": tau,
            "abs_psi": rho_k,
            "abs_K_phi": K_fit * rho_o,
            "delta_S": dS,
        },
    )


# --- mapped operator equations -------------------------------------------------


def _mapped_fields(cfg, kep, pair, grid):
    """Oscillator-chart fields obtained only from the Kepler solution."""
    if not cfg.exact_phase:
        raise DomainError("mapped operator equations are only exact for c = 1/4")
    if pair is None:
        osc = unmap_parameters(cfg, kep)
        pair = PairedProfiles.build(cfg, osc, kep)
    osc = pair.osc
    if grid is None:
        grid = PolarGrid.for_params(osc)
    rt, th = grid.mesh()
    r, phi = map_coordinates(cfg, rt, th)
    rho = density(kep, 1.0, r)
    S = PrincipalFunction(pair.kep_profile)(r, phi, 0.0) / (4.0 * cfg.c)
    return pair, grid, rt, th, rho, S


def transform_sle(cfg: LeviCivitaConfig, kep: OrbitParams, grid: PolarGrid | None = None,
                  pair: PairedProfiles | None = None) -> ResidualReport:
    """Oscillator Schroedinger-like residual of the mapped Kepler wave function.

    The density and phase are the Kepler ones evaluated at ``(rt**2, 2 theta)``;
    no oscillator quadrature enters.  Normalised by ``|E'| |Phi|``.
    """
    pair, grid, rt, th, rho, S = _mapped_fields(cfg, kep, pair, grid)
    osc = pair.osc
    res, psi = sle_residual_from_fields(rho, S, grid, osc.m, potential(osc, rt), osc.E, twist=osc.l)
    return ResidualReport.from_field("SLE", grid, np.abs(res) / np.abs(psi), abs(osc.E))


def native_oscillator_sle(osc: OrbitParams, grid: PolarGrid | None = None,
                          pair: PairedProfiles | None = None) -> ResidualReport:
    from .operator_lab import sle_residual

    prof = pair.osc_profile if pair is not None else build_radial_profile(osc)
    if grid is None:
        grid = PolarGrid.for_params(osc)
    return sle_residual(osc, PrincipalFunction(prof), normalize(osc), grid)


def mapped_hj_residual(cfg: LeviCivitaConfig, kep: OrbitParams, grid: PolarGrid | None = None,
                       pair: PairedProfiles | None = None, h=None) -> ResidualReport:
    """Oscillator Hamilton-Jacobi residual of ``S~ = S(rt**2, 2 theta, t) / 4c``."""
    pair, grid, rt, _, _, _ = _mapped_fields(cfg, kep, pair, grid)
    osc = pair.osc
    if h is None:
        h = default_step(pair.osc_profile)
    tp = pair.osc_profile.turning
    grid.check_inside(tp.r_min, tp.r_max, reach=h)
    R = pair.kep_profile.action
    x = grid.r
    dS = (R((x + h) ** 2) - R((x - h) ** 2)) / (2.0 * h) / (4.0 * cfg.c)
    dS_dtheta = 2.0 * kep.l / (4.0 * cfg.c)
    res = dS**2 / (2 * osc.m) + dS_dtheta**2 / (2 * osc.m * x * x) + potential(osc, x) - osc.E
    field_ = np.broadcast_to(res[:, None], grid.shape)
    return ResidualReport.from_field("HJ", grid, field_, abs(osc.E), h_r=h)


def mapped_continuity_residual(cfg: LeviCivitaConfig, kep: OrbitParams, grid: PolarGrid | None = None,
                               pair: PairedProfiles | None = None, h=None) -> ResidualReport:
    """``div'(rho~**2 grad' S~)`` for the mapped fields, normalised as for the native residual."""
    pair, grid, rt, _, rho, _ = _mapped_fields(cfg, kep, pair, grid)
    tp = pair.osc_profile.turning
    if h is None:
        h = CONTINUITY_STEP_FRACTION * tp.width
    grid.check_inside(tp.r_min, tp.r_max, reach=h)
    R = pair.kep_profile.action
    dSdr = (R((rt + h) ** 2) - R((rt - h) ** 2)) / (2.0 * h) / (4.0 * cfg.c)
    dS_dtheta = 2.0 * kep.l / (4.0 * cfg.c)
    rho2 = rho**2
    res = d_dr(rt * rho2 * dSdr, grid) / rt + d_dphi(rho2 * dS_dtheta, grid) / rt**2
    scale = float(np.max(np.abs(rho2 * dSdr))) / tp.width
    return ResidualReport.from_field("Continuity", grid, res, scale, h_r=h)
