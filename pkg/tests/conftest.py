import numpy as np
import pytest

from cwflab.core_model import OrbitParams, System
from cwflab.grid import PolarGrid
from cwflab.hamilton_jacobi import PrincipalFunction, build_radial_profile
from cwflab.wavefunction import normalize

KEPLER = OrbitParams(System.KEPLER, E=-0.125, l=0.25, coupling=0.25)
OSCILLATOR = OrbitParams(System.OSCILLATOR, E=1.0, l=0.5, coupling=1.0)


def random_bound(rng, system, m_range=(0.5, 2.0)):
    """Bound parameters with eccentricity well away from 0 and 1."""
    m = rng.uniform(*m_range)
    k = rng.uniform(0.2, 3.0)
    l = rng.uniform(0.2, 2.0) * rng.choice([-1.0, 1.0])
    x = rng.uniform(0.05, 0.95)  # e**2 or s**2
    if system is System.KEPLER:
        E = -(1 - x) * m * k * k / (2 * l * l)
    else:
        E = abs(l) * np.sqrt(k / m) / np.sqrt(1 - x)
    return OrbitParams(system, E=E, l=l, coupling=k, m=m)


@pytest.fixture(scope="session")
def canonical():
    out = {}
    for p in (KEPLER, OSCILLATOR):
        prof = build_radial_profile(p)
        out[p.system.value] = {
            "params": p,
            "profile": prof,
            "pf": PrincipalFunction(prof),
            "C": normalize(p),
            "grid": PolarGrid.for_params(p, n_r=256, n_phi=64, margin=0.05),
        }
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


ACCEPTANCE_LINES = []


def record_acceptance(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
