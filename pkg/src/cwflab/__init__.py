"""Classical wave functions for central-force orbits.

Submodules
----------
core_model       orbit parameters, potentials, turning points
hamilton_jacobi  radial action, time and angle tables; principal function
wavefunction     density, normalisation, continuity residual
operator_lab     polar grid operators and the Schroedinger-like residual
levi_civita      oscillator <-> Kepler map and equivalence checks
ensemble         leapfrog trajectory oracle
cli              ``cwf-lab`` scenario runner
"""

from .core_model import OrbitParams, System, TurningPoints, turning_points
from .errors import CwfError, DomainError
from .grid import PolarGrid, ResidualReport
from .hamilton_jacobi import PrincipalFunction, build_radial_profile
from .wavefunction import density, normalize

__version__ = "0.1.0"

__all__ = [
    "CwfError",
    "DomainError",
    "OrbitParams",
    "PolarGrid",
    "PrincipalFunction",
    "ResidualReport",
    "System",
    "TurningPoints",
    "build_radial_profile",
    "density",
    "normalize",
    "turning_points",
]
