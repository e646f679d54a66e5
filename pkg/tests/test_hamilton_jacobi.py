import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from cwflab.core_model import OrbitParams, System, radial_momentum_sq, turning_points
from cwflab.errors import DomainError, UnboundStateError
from cwflab.grid import PolarGrid
from cwflab.hamilton_jacobi import (
    PrincipalFunction,
    build_radial_profile,
    hj_residual,
    hj_residual_field,
    principal_function,
)
from cwflab import ensemble
from conftest import KEPLER, OSCILLATOR, random_bound


def test_kepler_half_period_third_law(canonical):
    prof = canonical["kepler"]["profile"]
    a = -KEPLER.coupling / (2 * KEPLER.E)
    T = 2 * np.pi * np.sqrt(KEPLER.m / KEPLER.coupling) * a**1.5
    assert prof.time(prof.turning.r_max) == pytest.approx(T / 2, rel=1e-10)
    assert T / 2 == pytest.approx(2 * np.pi, rel=1e-15)


def test_kepler_apsidal_sweep(canonical):
    prof = canonical["kepler"]["profile"]
    assert prof.angle(prof.turning.r_max) == pytest.approx(np.pi, rel=1e-10)


def test_oscillator_half_period_and_sweep(canonical):
    prof = canonical["oscillator"]["profile"]
    assert prof.time(prof.turning.r_max) == pytest.approx(np.pi / 2, rel=1e-10)
    assert prof.angle(prof.turning.r_max) == pytest.approx(np.pi / 2, rel=1e-10)


def test_kepler_radial_action_closed_form(canonical):
    # full radial action is 2 pi (k sqrt(m / 2|E|) - |l|)
    prof = canonical["kepler"]["profile"]
    p = KEPLER
    expected = np.pi * (p.coupling * np.sqrt(p.m / (2 * abs(p.E))) - abs(p.l))
    assert prof.action(prof.turning.r_max) == pytest.approx(expected, rel=1e-10)
    assert expected == pytest.approx(np.pi / 4, rel=1e-15)


def test_radial_action_against_trajectory(canonical):
    # int p_r dr over the outgoing half = int p_r**2 / m dt along the integrated orbit
    p = KEPLER
    T = ensemble.nominal_radial_period(p)
    traj = ensemble.integrate_orbit(p, ensemble.periapsis_state(p), T / 2, T / 200_000)
    w = np.full(traj.t.size, 1.0)
    w[0] = w[-1] = 0.5
    line = float(np.sum(w * traj.p_r**2) / p.m * traj.step)
    prof = canonical["kepler"]["profile"]
    assert prof.action(prof.turning.r_max) == pytest.approx(line, rel=1e-6)


def test_profile_invariants(canonical):
    for key in ("kepler", "oscillator"):
        prof = canonical[key]["profile"]
        tp = prof.turning
        assert np.all(np.diff(prof.r) > 0)
        assert prof.r[0] == tp.r_min and prof.r[-1] == tp.r_max
        for col in (prof.R, prof.t, prof.phi):
            assert np.all(np.diff(col) >= 0)
            assert col[0] == 0.0


def test_reference_radius_zeroes_tables():
    tp = turning_points(KEPLER)
    r_ref = tp.r_min + 0.3 * tp.width
    prof = build_radial_profile(KEPLER, 512, r_ref=r_ref)
    for fn in (prof.action, prof.time, prof.angle):
        assert abs(fn(r_ref)) < 1e-14
    assert prof.time(tp.r_min) < 0


def test_dR_dr_matches_momentum(canonical):
    for key in ("kepler", "oscillator"):
        c = canonical[key]
        p, pf = c["params"], c["pf"]
        tp = pf.profile.turning
        r = np.linspace(tp.r_min + 0.05 * tp.width, tp.r_max - 0.05 * tp.width, 200)
        # fourth-order Richardson difference keeps truncation below the target
        h = 1e-3 * tp.width
        d = (4 * pf.dS_dr(r, h / 2) - pf.dS_dr(r, h)) / 3
        assert np.allclose(d, np.sqrt(radial_momentum_sq(p, r)), rtol=1e-8, atol=0)


@pytest.mark.parametrize("system", ["kepler", "oscillator"])
def test_time_against_scipy_quad(canonical, system):
    c = canonical[system]
    p, prof = c["params"], c["profile"]
    tp = prof.turning
    a, b = tp.r_min + 0.2 * tp.width, tp.r_min + 0.7 * tp.width
    t_ref = quad(lambda r: p.m / np.sqrt(radial_momentum_sq(p, r)), a, b, epsabs=1e-13, epsrel=1e-13)[0]
    phi_ref = quad(lambda r: p.l / (r * r * np.sqrt(radial_momentum_sq(p, r))), a, b, epsabs=1e-13, epsrel=1e-13)[0]
    assert prof.time(b) - prof.time(a) == pytest.approx(t_ref, rel=1e-10)
    assert prof.angle(b) - prof.angle(a) == pytest.approx(phi_ref, rel=1e-10)


def test_principal_function_values(canonical):
    pf = canonical["kepler"]["pf"]
    r0 = pf.profile.r_ref
    assert principal_function(pf, r0, 0.0, 0.0) == 0.0
    assert pf(r0, 2 * np.pi, 0.0) == pytest.approx(np.pi / 2, rel=1e-15)
    assert pf.dS_dphi == KEPLER.l and pf.dS_dt == -KEPLER.E


def test_outside_annulus_rejected(canonical):
    prof = canonical["kepler"]["profile"]
    with pytest.raises(DomainError):
        prof.action(prof.turning.r_max * 1.01)


def test_unbound_profile_rejected():
    with pytest.raises(UnboundStateError):
        build_radial_profile(OrbitParams(System.KEPLER, E=0.2, l=0.25, coupling=0.25))


def test_analytic_residual_vanishes(canonical):
    for key in ("kepler", "oscillator"):
        c = canonical[key]
        rep = hj_residual(c["pf"], c["grid"], analytic=True)
        assert rep.max_residual < 1e-13


@pytest.mark.parametrize("system", ["kepler", "oscillator"])
def test_hj_residual_tolerance(canonical, system):
    c = canonical[system]
    rep = hj_residual(c["pf"], c["grid"])
    assert rep.max_residual < 1e-5
    assert rep.max_residual >= rep.rms_residual >= 0


@pytest.mark.parametrize("system", ["kepler", "oscillator"])
def test_hj_second_order_ladder(canonical, system):
    c = canonical[system]
    # finer profile so the interpolation floor sits below the coarsest FD error
    pf = PrincipalFunction(build_radial_profile(c["params"], 8192))
    w = pf.profile.turning.width
    errs = [hj_residual(pf, c["grid"], h=h * w).max_residual for h in (4e-3, 2e-3, 1e-3)]
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(rates - 2) < 0.15), rates


def test_residual_field_shape(canonical):
    c = canonical["kepler"]
    f = hj_residual_field(c["pf"], c["grid"])
    assert f.shape == c["grid"].shape
    assert np.ptp(f, axis=1).max() == 0


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), system=st.sampled_from(list(System)))
def test_profile_periods_property(seed, system):
    p = random_bound(np.random.default_rng(seed), system)
    prof = build_radial_profile(p, 256)
    T = ensemble.nominal_radial_period(p)
    assert 2 * prof.time(prof.turning.r_max) == pytest.approx(T, rel=1e-9)
    # Kepler orbits close after one radial period, oscillator orbits after half a turn
    sweep = np.pi if system is System.KEPLER else np.pi / 2
    assert abs(prof.angle(prof.turning.r_max)) == pytest.approx(sweep, rel=1e-9)
