"""Radial integrals on the outgoing branch and the principal function built from them.

The three integrals

    R(r)   = int p_r dr
    t(r)   = int m dr / p_r
    phi(r) = int l / r**2 dr / p_r

are tabulated from the reference radius by quadrature on the chart
``r = r_min + (r_max - r_min) sin(u)**2``, where all three integrands are
smooth.  Between nodes, values are interpolated in ``u`` with cubic Hermite
splines whose node slopes are the exact integrands.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from . import quadrature
from .core_model import AnnulusChart, OrbitParams, potential
from .errors import DomainError
from .grid import PolarGrid, ResidualReport

DEFAULT_NODES = 2048
# Finite-difference step for dR/dr, as a fraction of r_max - r_min.
HJ_STEP_FRACTION = 1e-4


@dataclass(frozen=True)
class RadialProfile:
    """Tabulated ``R, t, phi`` over the annulus, measured from ``r_ref``.

    Nodes cover the whole annulus ``[r_min, r_max]``; ``R``, ``t`` and ``phi``
    vanish at ``r_ref`` and are negative below it.
    """

    params: OrbitParams
    chart: AnnulusChart = field(repr=False)
    r_ref: float
    u: np.ndarray = field(repr=False)
    r: np.ndarray = field(repr=False)
    p_r: np.ndarray = field(repr=False)
    R: np.ndarray = field(repr=False)
    t: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    quad_error: float = 0.0
    branch: str = "outgoing"

    def __post_init__(self):
        c = self.chart
        drdu = c.drdu(self.u)
        dtdu = self.params.m * c.dr_over_p(self.u)
        splines = {
            "R": CubicHermiteSpline(self.u, self.R, self.p_r * drdu),
            "t": CubicHermiteSpline(self.u, self.t, dtdu),
            "phi": CubicHermiteSpline(self.u, self.phi, self.params.l * c.dr_over_p(self.u) / self.r**2),
        }
        object.__setattr__(self, "_splines", splines)

    @property
    def turning(self):
        return self.chart.turning

    @property
    def nodes(self):
        """Node table as an ``(n, 5)`` array with columns ``r, p_r, R, t, phi``."""
        return np.column_stack([self.r, self.p_r, self.R, self.t, self.phi])

    def _u(self, r):
        r = np.asarray(r, dtype=float)
        tp = self.turning
        # allow a few ulps of slop at the turning points
        slop = 8 * np.finfo(float).eps * tp.r_max
        if np.any(r < tp.r_min - slop) or np.any(r > tp.r_max + slop):
            raise DomainError(f"radius outside the accessible annulus [{tp.r_min:g}, {tp.r_max:g}]")
        return self.chart.u_of_r(r)

    def action(self, r):
        return self._splines["R"](self._u(r))

    def time(self, r):
        return self._splines["t"](self._u(r))

    def angle(self, r):
        return self._splines["phi"](self._u(r))

    def to_csv(self, path):
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["r", "p_r", "R", "t", "phi"])
            for row in self.nodes:
                w.writerow([f"{v:.17g}" for v in row])


def build_radial_profile(p: OrbitParams, n_nodes=DEFAULT_NODES, r_ref=None, tol=1e-10):
    """Tabulate the outgoing-branch integrals for a bound orbit.

    Parameters
    ----------
    p : OrbitParams
        Bound orbit parameters.
    n_nodes : int
        Number of nodes, uniform in the chart variable ``u``; at least 16.
    r_ref : float, optional
        Lower integration limit; defaults to ``r_min`` so that ``t`` and
        ``phi`` are measured from the inner turning point.
    tol : float
        Absolute quadrature error target per node.

    Raises
    ------
    UnboundStateError, DegenerateAnnulusError
        For unbound or circular parameters.
    QuadratureError
        If adaptive refinement cannot reach ``tol``.
    """
    if n_nodes < 16:
        raise DomainError("n_nodes must be at least 16")
    p.require_bound()
    chart = AnnulusChart.of(p)
    tp = chart.turning
    if r_ref is None:
        r_ref = tp.r_min
    if not tp.r_min <= r_ref < tp.r_max:
        raise DomainError(f"r_ref must lie in [r_min, r_max), got {r_ref:g}")

    u = np.linspace(0.0, 0.5 * np.pi, n_nodes)
    u_ref = float(chart.u_of_r(r_ref))
    j = np.searchsorted(u, u_ref)
    if not np.isclose(u[min(j, n_nodes - 1)], u_ref, rtol=0, atol=1e-14):
        u = np.insert(u, j, u_ref)
    i_ref = int(np.argmin(np.abs(u - u_ref)))

    m, l = p.m, p.l
    integrands = {
        "R": lambda x: chart.radial_momentum(x) * chart.drdu(x),
        "t": lambda x: m * chart.dr_over_p(x),
        "phi": lambda x: l * chart.dr_over_p(x) / chart.r_of_u(x) ** 2,
    }
    tables = {}
    total_err = 0.0
    for name, fn in integrands.items():
        vals, err = quadrature.cumulative(fn, u, tol=tol)
        tables[name] = vals - vals[i_ref]
        total_err = max(total_err, err)

    r = chart.r_of_u(u)
    r[0], r[-1] = tp.r_min, tp.r_max
    return RadialProfile(
        params=p,
        chart=chart,
        r_ref=float(r_ref),
        u=u,
        r=r,
        p_r=chart.radial_momentum(u),
        R=tables["R"],
        t=tables["t"],
        phi=tables["phi"],
        quad_error=total_err,
    )


@dataclass(frozen=True)
class PrincipalFunction:
    """``S(r, phi, t) = R(r) + l phi - E t`` built on a radial profile."""

    profile: RadialProfile
    order: int = 3

    @property
    def params(self):
        return self.profile.params

    def __call__(self, r, phi, t):
        p = self.params
        return self.profile.action(r) + p.l * np.asarray(phi) - p.E * np.asarray(t)

    @property
    def dS_dphi(self):
        return self.params.l

    @property
    def dS_dt(self):
        return -self.params.E

    def dS_dr(self, r, h):
        """Centred finite difference of the interpolated radial action."""
        r = np.asarray(r, dtype=float)
        return (self.profile.action(r + h) - self.profile.action(r - h)) / (2.0 * h)


def principal_function(pf: PrincipalFunction, r, phi, t):
    return pf(r, phi, t)


def default_step(p_or_profile, fraction=HJ_STEP_FRACTION):
    prof = p_or_profile
    return fraction * prof.turning.width


def hj_residual_field(pf: PrincipalFunction, grid: PolarGrid, h=None, analytic=False):
    """Left side of the Hamilton-Jacobi equation at every grid node.

    ``dS/dphi`` and ``dS/dt`` are exact; ``dS/dr`` is a centred difference of
    ``R`` with step ``h`` unless ``analytic`` substitutes ``sqrt(f)``.
    Returns an ``(n_r, n_phi)`` array (the residual does not depend on phi).
    """
    prof = pf.profile
    p = prof.params
    tp = prof.turning
    if h is None:
        h = default_step(prof)
    grid.check_inside(tp.r_min, tp.r_max, reach=0.0 if analytic else h)
    r = grid.r
    if analytic:
        dSdr = prof.chart.radial_momentum(prof.chart.u_of_r(r))
    else:
        dSdr = pf.dS_dr(r, h)
    res = (
        dSdr**2 / (2.0 * p.m)
        + pf.dS_dphi**2 / (2.0 * p.m * r * r)
        + potential(p, r)
        + pf.dS_dt
    )
    return np.broadcast_to(res[:, None], grid.shape).copy()


def hj_residual(pf: PrincipalFunction, grid: PolarGrid, h=None, analytic=False) -> ResidualReport:
    """Max / RMS Hamilton-Jacobi residual normalised by ``|E|``."""
    if h is None:
        h = default_step(pf.profile)
    field_ = hj_residual_field(pf, grid, h=h, analytic=analytic)
    return ResidualReport.from_field("HJ", grid, field_, abs(pf.params.E), h_r=h)
