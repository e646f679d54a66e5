"""Leapfrog trajectories and the radial histograms sampled from them.

Nothing here uses the quadrature tables of :mod:`cwflab.hamilton_jacobi`;
the only shared inputs are the orbit parameters and the closed-form turning
points used as start state and histogram range.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..core_model import OrbitParams, System, effective_potential, turning_points
from ..errors import DegenerateAnnulusError, DomainError, EnergySurfaceError
from . import _leapfrog_py

DEFAULT_STEPS_PER_PERIOD = 100_000
ENERGY_SURFACE_TOL = 1e-8
MIN_SAMPLES = 10_000


def _kernel(backend):
    if backend is None:
        from . import leapfrog

        return leapfrog
    if backend == "python":
        return _leapfrog_py.leapfrog
    if backend == "cython":
        from ._leapfrog import leapfrog

        return leapfrog
    raise ValueError(f"unknown backend {backend!r}")


@dataclass(frozen=True)
class TrajectoryState:
    r: float
    phi: float
    p_r: float
    t: float = 0.0


def periapsis_state(p: OrbitParams) -> TrajectoryState:
    return TrajectoryState(r=turning_points(p).r_min, phi=0.0, p_r=0.0, t=0.0)


def nominal_radial_period(p: OrbitParams) -> float:
    """Closed-form radial period, used only to size the time step."""
    if p.system is System.KEPLER:
        a = -p.coupling / (2.0 * p.E)
        return 2.0 * math.pi * math.sqrt(p.m / p.coupling) * a**1.5
    return math.pi * math.sqrt(p.m / p.coupling)


def hamiltonian(p: OrbitParams, r, p_r):
    return np.asarray(p_r) ** 2 / (2.0 * p.m) + effective_potential(p, r)


def _radial_force(p: OrbitParams, r):
    # -dV_eff/dr
    l2 = p.l * p.l
    if p.system is System.KEPLER:
        return -p.coupling / r**2 + l2 / (p.m * r**3)
    return -p.coupling * r + l2 / (p.m * r**3)


@dataclass(frozen=True)
class Trajectory:
    params: OrbitParams
    t: np.ndarray
    r: np.ndarray
    p_r: np.ndarray
    phi: np.ndarray

    @property
    def step(self):
        return float(self.t[1] - self.t[0])

    def energy(self):
        return hamiltonian(self.params, self.r, self.p_r)

    def energy_drift(self) -> float:
        """Relative energy error at the final state."""
        E = self.params.E
        return float(abs(self.energy()[-1] - E) / abs(E))

    def max_energy_error(self) -> float:
        E = self.params.E
        return float(np.max(np.abs(self.energy() - E)) / abs(E))

    # Cubic Hermite interpolation within a step, using the exact time
    # derivatives available at the nodes (dr/dt = p/m, dp/dt = force,
    # dphi/dt = l/(m r^2)).
    def _hermite(self, i, s, y, dy):
        h = self.step
        s2, s3 = s * s, s * s * s
        h00 = 2 * s3 - 3 * s2 + 1
        h10 = s3 - 2 * s2 + s
        h01 = -2 * s3 + 3 * s2
        h11 = s3 - s2
        return h00 * y[i] + h10 * h * dy[i] + h01 * y[i + 1] + h11 * h * dy[i + 1]

    def radius_at(self, t):
        """Radius at arbitrary times inside the integrated span."""
        t = np.asarray(t, dtype=float)
        h = self.step
        i = np.clip(((t - self.t[0]) / h).astype(np.int64), 0, self.t.size - 2)
        s = (t - self.t[i]) / h
        return self._hermite(i, s, self.r, self.p_r / self.params.m)

    def _crossing(self, y, dy, target, rising):
        """First time ``y`` crosses ``target`` in the given direction."""
        d = y - target
        if rising:
            idx = np.nonzero((d[:-1] < 0) & (d[1:] >= 0))[0]
        else:
            idx = np.nonzero((d[:-1] > 0) & (d[1:] <= 0))[0]
        if idx.size == 0:
            raise DomainError("trajectory never crosses the target value")
        i = int(idx[0])
        s = d[i] / (d[i] - d[i + 1])
        for _ in range(8):
            val = self._hermite(i, s, y, dy) - target
            s1, s2 = s, s * s
            dval = (
                (6 * s2 - 6 * s1) * y[i]
                + (3 * s2 - 4 * s1 + 1) * self.step * dy[i]
                + (-6 * s2 + 6 * s1) * y[i + 1]
                + (3 * s2 - 2 * s1) * self.step * dy[i + 1]
            )
            if dval == 0:
                break
            s = min(max(s - val / dval, 0.0), 1.0)
        return i, s

    def crossing_time_radius(self, r_target):
        """Time and swept angle at the first outgoing passage through ``r_target``."""
        m = self.params.m
        i, s = self._crossing(self.r, self.p_r / m, r_target, rising=True)
        dphi = self.params.l / (m * self.r**2)
        return self.t[i] + s * self.step, float(self._hermite(i, s, self.phi, dphi))

    def turning_time(self, outgoing_to_incoming=True):
        """Time at which ``p_r`` first changes sign (apoapsis or return to periapsis)."""
        force = _radial_force(self.params, self.r)
        i, s = self._crossing(self.p_r, force, 0.0, rising=not outgoing_to_incoming)
        return float(self.t[i] + s * self.step)


def integrate_orbit(p: OrbitParams, initial: TrajectoryState, duration, step, backend=None) -> Trajectory:
    """Leapfrog in ``(r, p_r)`` with the effective potential; ``phi`` by quadrature.

    Raises
    ------
    EnergySurfaceError
        If ``initial`` is off the energy surface by more than ``1e-8`` relative.
    """
    p.require_bound()
    if not step > 0 or not duration > 0:
        raise DomainError("duration and step must be positive")
    h0 = float(hamiltonian(p, initial.r, initial.p_r))
    if abs(h0 - p.E) > ENERGY_SURFACE_TOL * abs(p.E):
        raise EnergySurfaceError(
            f"initial state has H = {h0:.12g}, expected E = {p.E:.12g}"
        )
    n = int(math.ceil(duration / step - 1e-9))
    code = 0 if p.system is System.KEPLER else 1
    r, pr, phi = _kernel(backend)(code, p.m, p.coupling, p.l, initial.r, initial.p_r, initial.phi, step, n)
    t = initial.t + step * np.arange(n + 1)
    return Trajectory(params=p, t=t, r=r, p_r=pr, phi=phi)


def _outgoing_flight(p, r_a, r_b, steps_per_period, backend):
    T = nominal_radial_period(p)
    step = T / steps_per_period
    traj = integrate_orbit(p, periapsis_state(p), 0.55 * T, step, backend=backend)
    ta, pa = traj.crossing_time_radius(r_a)
    tb, pb = traj.crossing_time_radius(r_b)
    return tb - ta, pb - pa


def time_of_flight(p: OrbitParams, r_a, r_b, steps_per_period=DEFAULT_STEPS_PER_PERIOD,
                   richardson=True, backend=None):
    """Elapsed time and swept angle between two radii on the outgoing branch.

    Starts at periapsis.  With ``richardson`` the second-order leapfrog
    estimates at ``step`` and ``step/2`` are combined to cancel the leading
    error term.
    """
    tp = turning_points(p)
    if not tp.r_min < r_a < r_b < tp.r_max:
        raise DomainError("need r_min < r_a < r_b < r_max")
    coarse = np.array(_outgoing_flight(p, r_a, r_b, steps_per_period, backend))
    if not richardson:
        return tuple(coarse)
    fine = np.array(_outgoing_flight(p, r_a, r_b, 2 * steps_per_period, backend))
    return tuple((4.0 * fine - coarse) / 3.0)


@dataclass(frozen=True)
class RadialHistogram:
    edges: np.ndarray
    counts: np.ndarray
    total: int

    def __post_init__(self):
        if not np.all(np.diff(self.edges) > 0):
            raise ValueError("histogram edges must increase")
        if int(np.sum(self.counts)) != self.total:
            raise ValueError("histogram counts do not sum to total")

    @property
    def probabilities(self):
        return self.counts / self.total

    def l1_distance(self, masses) -> float:
        """``sum |p_i - q_i|`` against bin masses (or another histogram)."""
        if isinstance(masses, RadialHistogram):
            masses = masses.probabilities
        return float(np.sum(np.abs(self.probabilities - np.asarray(masses))))

    def to_csv(self, path, analytic_mass=None):
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["bin_lo", "bin_hi", "count", "analytic_mass"])
            if analytic_mass is None:
                analytic_mass = np.full(self.counts.size, np.nan)
            for lo, hi, c, a in zip(self.edges[:-1], self.edges[1:], self.counts, analytic_mass):
                w.writerow([f"{lo:.17g}", f"{hi:.17g}", int(c), f"{a:.17g}"])


def sample_density(p: OrbitParams, n_samples, n_bins=100, seed=0,
                   steps_per_period=DEFAULT_STEPS_PER_PERIOD, backend=None) -> RadialHistogram:
    """Histogram of radii at instants drawn uniformly over one radial period.

    The period is the integrator's own return time to periapsis.  Each
    sampled instant is mapped to a radius by Hermite interpolation inside
    the enclosing step.
    """
    p.require_bound()
    if n_samples < MIN_SAMPLES:
        raise DomainError(f"need at least {MIN_SAMPLES} samples")
    tp = turning_points(p)
    if tp.eccentricity_like < 1e-6 or not tp.width > 0:
        raise DegenerateAnnulusError("circular orbit has no radial extent to sample")
    T = nominal_radial_period(p)
    traj = integrate_orbit(p, periapsis_state(p), 1.05 * T, T / steps_per_period, backend=backend)
    period = traj.turning_time(outgoing_to_incoming=False)
    rng = np.random.default_rng(seed)
    times = rng.uniform(0.0, period, size=int(n_samples))
    radii = np.clip(traj.radius_at(times), tp.r_min, tp.r_max)
    edges = np.linspace(tp.r_min, tp.r_max, n_bins + 1)
    counts, _ = np.histogram(radii, bins=edges)
    return RadialHistogram(edges=edges, counts=counts, total=int(n_samples))
