"""Orbit parameters and the radial structure of bound orbits.

Two planar central potentials are supported:

* Kepler, ``V(r) = -k/r``
* isotropic oscillator, ``V(r) = k' r**2 / 2``

Throughout, ``f(r)`` denotes the squared radial momentum on the energy
surface, ``f = 2m(E - V(r)) - l**2/r**2``.  The accessible annulus is the set
where ``f >= 0``, bounded by the two turning points.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping

import numpy as np

from .errors import ConfigError, DegenerateAnnulusError, DomainError, UnboundStateError

# Relative slack when deciding that a discriminant is zero rather than negative.
_DISC_EPS = 1e-13


class System(str, Enum):
    KEPLER = "kepler"
    OSCILLATOR = "oscillator"


@dataclass(frozen=True)
class OrbitParams:
    """Parameters of one bound or unbound orbit family.

    Parameters
    ----------
    system : System
        Which central potential.
    E : float
        Total energy.
    l : float
        Angular momentum (nonzero; may be negative).
    coupling : float
        ``k`` for Kepler, ``k'`` for the oscillator; must be positive.
    m : float
        Particle mass.
    """

    system: System
    E: float
    l: float
    coupling: float
    m: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "system", System(self.system))
        for name in ("E", "l", "coupling", "m"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not self.m > 0:
            raise DomainError(f"mass must be positive, got {self.m}")
        if not self.coupling > 0:
            raise DomainError(f"coupling must be positive, got {self.coupling}")
        if self.l == 0:
            raise DomainError("angular momentum l = 0 (radial orbit) is not supported")

    @property
    def k(self) -> float:
        return self.coupling

    @property
    def discriminant(self) -> float:
        """``e**2`` (Kepler) or ``s**2`` (oscillator); nonnegative for bound orbits."""
        m, E, l, k = self.m, self.E, self.l, self.coupling
        if self.system is System.KEPLER:
            return 1.0 + 2.0 * l * l * E / (m * k * k)
        return 1.0 - l * l * k / (m * E * E) if E != 0 else -np.inf

    @property
    def is_bound(self) -> bool:
        if self.system is System.KEPLER and not self.E < 0:
            return False
        if self.system is System.OSCILLATOR and not self.E > 0:
            return False
        return self.discriminant >= -_DISC_EPS

    def require_bound(self) -> None:
        if not self.is_bound:
            raise UnboundStateError(
                f"{self.system.value} E={self.E:g}, l={self.l:g}, coupling={self.coupling:g}"
            )

    def to_record(self) -> dict:
        return {
            "system": self.system.value,
            "m": self.m,
            "E": self.E,
            "l": self.l,
            "coupling": self.coupling,
        }

    @classmethod
    def from_record(cls, record: Mapping) -> "OrbitParams":
        missing = [key for key in ("system", "E", "l", "coupling") if key not in record]
        if missing:
            raise ConfigError(f"missing orbit keys: {', '.join(missing)}")
        try:
            system = System(str(record["system"]).lower())
        except ValueError as exc:
            raise ConfigError(f"unknown system {record['system']!r}") from exc
        return cls(
            system=system,
            E=float(record["E"]),
            l=float(record["l"]),
            coupling=float(record["coupling"]),
            m=float(record.get("m", 1.0)),
        )


@dataclass(frozen=True)
class TurningPoints:
    r_min: float
    r_max: float
    eccentricity_like: float
    # oscillator only: sqrt(2E'/k'), the radius where E' = k' A**2 / 2
    amplitude: float | None = None

    @property
    def width(self) -> float:
        return self.r_max - self.r_min


def _as_radius(r):
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0)):
        raise DomainError("radius must be positive")
    return r


def potential(p: OrbitParams, r):
    r = _as_radius(r)
    if p.system is System.KEPLER:
        return -p.coupling / r
    return 0.5 * p.coupling * r * r


def potential_gradient(p: OrbitParams, r):
    """dV/dr."""
    r = _as_radius(r)
    if p.system is System.KEPLER:
        return p.coupling / (r * r)
    return p.coupling * r


def effective_potential(p: OrbitParams, r):
    """``V(r) + l**2 / (2 m r**2)``."""
    r = _as_radius(r)
    return potential(p, r) + p.l * p.l / (2.0 * p.m * r * r)


def radial_momentum_sq(p: OrbitParams, r):
    """Squared radial momentum ``2m(E - V) - l**2/r**2``; negative outside the annulus."""
    r = _as_radius(r)
    m, E, l, k = p.m, p.E, p.l, p.coupling
    if p.system is System.KEPLER:
        return 2.0 * m * E + 2.0 * m * k / r - l * l / (r * r)
    return 2.0 * m * E - m * k * r * r - l * l / (r * r)


def turning_points(p: OrbitParams) -> TurningPoints:
    """Closed-form turning radii, sorted ascending.

    The smaller root is taken from the product of roots to avoid
    cancellation at high eccentricity.
    """
    p.require_bound()
    m, E, l, k = p.m, p.E, p.l, p.coupling
    disc = max(p.discriminant, 0.0)
    ecc = float(np.sqrt(disc))
    if p.system is System.KEPLER:
        a = -k / (2.0 * E)
        r_max = a * (1.0 + ecc)
        # product of roots of 2mE r^2 + 2mk r - l^2 = 0
        r_min = (-l * l / (2.0 * m * E)) / r_max
        return TurningPoints(r_min=r_min, r_max=r_max, eccentricity_like=ecc)
    x_max = (E / k) * (1.0 + ecc)
    # product of roots of m k' x^2 - 2 m E' x + l'^2 = 0, x = r^2
    x_min = (l * l / (m * k)) / x_max
    return TurningPoints(
        r_min=float(np.sqrt(x_min)),
        r_max=float(np.sqrt(x_max)),
        eccentricity_like=ecc,
        amplitude=float(np.sqrt(2.0 * E / k)),
    )


# --- regularised chart --------------------------------------------------------
#
# r(u) = r_min + (r_max - r_min) sin(u)**2,  u in [0, pi/2].
# On this chart f factorises as  f = (r - r_min)(r_max - r) * a(r), with a(r)
# smooth and positive on the closed annulus, so that p_r = D sin u cos u sqrt(a)
# and dr/du = 2 D sin u cos u.  Every radial integrand then becomes smooth in u.


@dataclass(frozen=True)
class AnnulusChart:
    params: OrbitParams
    turning: TurningPoints

    @classmethod
    def of(cls, p: OrbitParams) -> "AnnulusChart":
        tp = turning_points(p)
        if not tp.width > 0:
            raise DegenerateAnnulusError("circular orbit has zero radial extent")
        return cls(p, tp)

    @property
    def width(self) -> float:
        return self.turning.width

    def r_of_u(self, u):
        return self.turning.r_min + self.width * np.sin(u) ** 2

    def u_of_r(self, r):
        x = (np.asarray(r, dtype=float) - self.turning.r_min) / self.width
        return np.arcsin(np.sqrt(np.clip(x, 0.0, 1.0)))

    def a_factor(self, r):
        """Smooth factor ``f / ((r - r_min)(r_max - r))``."""
        p, tp = self.params, self.turning
        if p.system is System.KEPLER:
            return 2.0 * p.m * (-p.E) / (r * r)
        return p.m * p.coupling * (r + tp.r_min) * (r + tp.r_max) / (r * r)

    def radial_momentum(self, u):
        """``sqrt(f)`` at ``r(u)`` without endpoint cancellation."""
        r = self.r_of_u(u)
        return self.width * np.sin(u) * np.cos(u) * np.sqrt(self.a_factor(r))

    def drdu(self, u):
        return 2.0 * self.width * np.sin(u) * np.cos(u)

    def dr_over_p(self, u):
        """``(dr/du) / p_r``, finite at both turning points."""
        return 2.0 / np.sqrt(self.a_factor(self.r_of_u(u)))
