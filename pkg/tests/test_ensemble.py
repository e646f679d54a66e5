import numpy as np
import pytest

from cwflab import ensemble
from cwflab.core_model import OrbitParams, System, turning_points
from cwflab.ensemble import _leapfrog_py
from cwflab.ensemble.oracle import RadialHistogram, hamiltonian
from cwflab.errors import DegenerateAnnulusError, DomainError, EnergySurfaceError
from cwflab.wavefunction import bin_masses, normalize
from conftest import KEPLER, OSCILLATOR

CIRCULAR = OrbitParams(System.KEPLER, E=-0.5, l=1.0, coupling=1.0)


def expected_two_sample_l1(q, n):
    # E|X - Y| / n for independent multinomial counts, normal approximation per bin
    return float(np.sum(np.sqrt(4 * q * (1 - q) / (np.pi * n))))


@pytest.fixture(scope="module")
def masses():
    out = {}
    for p in (KEPLER, OSCILLATOR):
        tp = turning_points(p)
        out[p.system] = bin_masses(p, normalize(p), np.linspace(tp.r_min, tp.r_max, 101))
    return out


def test_backends_agree():
    args = (0, 1.0, 0.25, 0.25, turning_points(KEPLER).r_min, 0.0, 0.0, 1e-3, 5000)
    py = _leapfrog_py.leapfrog(*args)
    fast = ensemble.leapfrog(*args)
    for a, b in zip(py, fast):
        assert np.allclose(a, b, rtol=1e-14, atol=1e-15)


def test_circular_orbit_fixed_point():
    T = 2 * np.pi
    traj = ensemble.integrate_orbit(CIRCULAR, ensemble.TrajectoryState(1.0, 0.0, 0.0), 10 * T, T / 10_000)
    assert np.max(np.abs(traj.r - 1.0)) < 1e-9


def test_off_surface_start_rejected():
    with pytest.raises(EnergySurfaceError):
        ensemble.integrate_orbit(KEPLER, ensemble.TrajectoryState(0.5, 0.0, 0.0), 1.0, 1e-3)


@pytest.mark.parametrize("p,half", [(KEPLER, 2 * np.pi), (OSCILLATOR, np.pi / 2)])
def test_apoapsis_time(p, half):
    T = ensemble.nominal_radial_period(p)
    traj = ensemble.integrate_orbit(p, ensemble.periapsis_state(p), 0.75 * T, T / 100_000)
    t_apo = traj.turning_time(outgoing_to_incoming=True)
    # single-step leapfrog timing is O(dt**2) accurate, about 1e-6 here
    assert t_apo == pytest.approx(half, rel=1e-5)
    assert traj.radius_at(t_apo) == pytest.approx(turning_points(p).r_max, rel=1e-5)


def test_oscillator_period_independent_of_energy():
    for E, l in ((1.0, 0.5), (3.0, 0.2), (1.2, 1.1)):
        p = OrbitParams(System.OSCILLATOR, E=E, l=l, coupling=1.0)
        traj = ensemble.integrate_orbit(p, ensemble.periapsis_state(p), 1.2 * np.pi, np.pi / 100_000)
        assert traj.turning_time(outgoing_to_incoming=False) == pytest.approx(np.pi, rel=1e-5)


@pytest.mark.parametrize("p", [KEPLER, OSCILLATOR])
def test_energy_drift_per_period(p):
    T = ensemble.nominal_radial_period(p)
    traj = ensemble.integrate_orbit(p, ensemble.periapsis_state(p), T, T / ensemble.DEFAULT_STEPS_PER_PERIOD)
    assert traj.energy_drift() < 1e-9
    assert traj.params.l == p.l


def test_energy_error_second_order():
    p = KEPLER
    T = ensemble.nominal_radial_period(p)
    errs = [ensemble.integrate_orbit(p, ensemble.periapsis_state(p), T / 2, T / n).max_energy_error()
            for n in (10_000, 20_000, 40_000)]
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(rates - 2) < 0.1), rates


@pytest.mark.parametrize("system", ["kepler", "oscillator"])
def test_flight_time_matches_profile(canonical, system):
    c = canonical[system]
    p, prof = c["params"], c["profile"]
    tp = prof.turning
    for fa, fb in ((0.1, 0.9), (0.3, 0.6)):
        ra, rb = tp.r_min + fa * tp.width, tp.r_min + fb * tp.width
        dt, dphi = ensemble.time_of_flight(p, ra, rb)
        assert dt == pytest.approx(prof.time(rb) - prof.time(ra), rel=1e-6)
        assert dphi == pytest.approx(prof.angle(rb) - prof.angle(ra), rel=1e-6)


def test_flight_time_domain():
    with pytest.raises(DomainError):
        ensemble.time_of_flight(KEPLER, 0.5, 0.4)


@pytest.mark.parametrize("p", [KEPLER, OSCILLATOR])
def test_histogram_matches_density(p, masses):
    h = ensemble.sample_density(p, 1_000_000, 100, seed=1)
    assert h.total == 1_000_000 and h.counts.sum() == h.total
    assert h.l1_distance(masses[p.system]) < 0.05
    assert h.counts[0] > h.counts[50] and h.counts[-1] > h.counts[50]


def test_histogram_seed_consistency(masses):
    a = ensemble.sample_density(KEPLER, 1_000_000, 100, seed=1)
    b = ensemble.sample_density(KEPLER, 1_000_000, 100, seed=2)
    l1 = a.l1_distance(b)
    assert l1 == pytest.approx(expected_two_sample_l1(masses[System.KEPLER], 1_000_000), rel=0.2)
    assert l1 < 0.01


def test_histogram_deterministic():
    a = ensemble.sample_density(OSCILLATOR, 20_000, 50, seed=7)
    b = ensemble.sample_density(OSCILLATOR, 20_000, 50, seed=7)
    assert np.array_equal(a.counts, b.counts)


def test_histogram_convergence_rate(masses):
    q = masses[System.KEPLER]
    scaled = []
    for n in (10_000, 100_000, 1_000_000):
        l1 = ensemble.sample_density(KEPLER, n, 100, seed=3).l1_distance(q)
        scaled.append(l1 * np.sqrt(n))
    assert max(scaled) / min(scaled) < 2


def test_circular_sampling_rejected():
    with pytest.raises(DegenerateAnnulusError):
        ensemble.sample_density(CIRCULAR, 20_000)


def test_histogram_invariants():
    with pytest.raises(ValueError):
        RadialHistogram(np.array([0.0, 1.0, 0.5]), np.array([1, 1]), 2)
    with pytest.raises(ValueError):
        RadialHistogram(np.array([0.0, 1.0, 2.0]), np.array([1, 1]), 3)


def test_hamiltonian_at_periapsis():
    s = ensemble.periapsis_state(KEPLER)
    assert hamiltonian(KEPLER, s.r, s.p_r) == pytest.approx(KEPLER.E, rel=1e-13)


def test_pure_python_fallback_selected_by_env():
    import os
    import subprocess
    import sys

    env = dict(os.environ, CWFLAB_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from cwflab import ensemble; print(ensemble.BACKEND)"],
                         capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "python"
