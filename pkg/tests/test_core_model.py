import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq, minimize_scalar

from cwflab.core_model import (
    AnnulusChart,
    OrbitParams,
    System,
    effective_potential,
    radial_momentum_sq,
    turning_points,
)
from cwflab.errors import ConfigError, DegenerateAnnulusError, DomainError, UnboundStateError
from conftest import random_bound


def kep(E, l, k=1.0, m=1.0):
    return OrbitParams(System.KEPLER, E=E, l=l, coupling=k, m=m)


def osc(E, l, k=1.0, m=1.0):
    return OrbitParams(System.OSCILLATOR, E=E, l=l, coupling=k, m=m)


def test_effective_potential_values():
    assert effective_potential(kep(-0.5, 1.0), 1.0) == pytest.approx(-0.5, abs=1e-15)
    assert effective_potential(osc(1.0, 1.0), 1.0) == pytest.approx(1.0, abs=1e-15)


def test_effective_potential_minimum_matches_optimizer():
    p = kep(-0.5, 1.0)
    res = minimize_scalar(lambda r: float(effective_potential(p, r)), bounds=(1e-3, 100.0),
                          method="bounded", options={"xatol": 1e-10})
    assert res.x == pytest.approx(1.0, rel=1e-6)
    assert res.fun == pytest.approx(-0.5, rel=1e-12)


def test_radial_momentum_sq_values():
    assert radial_momentum_sq(kep(-0.5, 1.0), 1.0) == pytest.approx(0.0, abs=1e-15)
    assert radial_momentum_sq(osc(1.0, 1.0), 1.0) == pytest.approx(0.0, abs=1e-15)
    # quadratic 2mE r^2 + 2mk r - l^2 = 0
    root = max(np.roots([2 * -0.125, 2.0, -0.25]))
    assert root == pytest.approx(7.87298, abs=1e-5)
    assert abs(radial_momentum_sq(kep(-0.125, 0.5), root)) < 1e-6


def test_nonpositive_radius_rejected():
    with pytest.raises(DomainError):
        radial_momentum_sq(kep(-0.125, 0.5), 0.0)


@pytest.mark.parametrize("bad", [dict(m=0.0), dict(k=-1.0), dict(l=0.0)])
def test_param_invariants(bad):
    kw = dict(E=-0.1, l=bad.get("l", 0.5), k=bad.get("k", 1.0), m=bad.get("m", 1.0))
    with pytest.raises(DomainError):
        kep(**kw)


def test_unbound_raises():
    with pytest.raises(UnboundStateError, match="unbound state"):
        turning_points(kep(0.1, 0.5))
    with pytest.raises(UnboundStateError):
        turning_points(kep(-0.6, 1.0))  # below the potential minimum
    with pytest.raises(UnboundStateError):
        turning_points(osc(-1.0, 0.5))


def test_circular_kepler():
    tp = turning_points(kep(-0.5, 1.0))
    assert tp.r_min == pytest.approx(1.0, abs=1e-7)
    assert tp.r_max == pytest.approx(1.0, abs=1e-7)
    assert tp.eccentricity_like == pytest.approx(0.0, abs=1e-7)
    with pytest.raises(DegenerateAnnulusError):
        AnnulusChart.of(kep(-0.5, 1.0))


def test_kepler_turning_points_quadratic_oracle():
    p = kep(-0.125, 0.5)
    tp = turning_points(p)
    roots = np.sort(np.roots([2 * p.E, 2 * p.coupling, -p.l**2]))
    # root-consistent eccentricity: r_max - r_min = 2 a e with a = -k/(2E)
    a = -p.coupling / (2 * p.E)
    assert tp.eccentricity_like == pytest.approx((roots[1] - roots[0]) / (2 * a), rel=1e-12)
    assert tp.eccentricity_like == pytest.approx(0.968246, abs=1e-6)
    assert tp.r_min == pytest.approx(roots[0], rel=1e-12)
    assert tp.r_max == pytest.approx(roots[1], rel=1e-12)
    assert tp.r_min == pytest.approx(0.127017, abs=1e-6)
    assert tp.r_max == pytest.approx(7.872983, abs=1e-6)


def test_oscillator_turning_points_quadratic_oracle():
    p = osc(1.0, 0.5)
    tp = turning_points(p)
    # m k x^2 - 2 m E x + l^2 = 0 with x = r^2
    x = np.sort(np.roots([p.m * p.coupling, -2 * p.m * p.E, p.l**2]))
    assert tp.r_min**2 == pytest.approx(x[0], rel=1e-12)
    assert tp.r_max**2 == pytest.approx(x[1], rel=1e-12)
    assert (tp.r_min, tp.r_max) == pytest.approx((0.366025, 1.366025), abs=1e-6)
    assert tp.amplitude == pytest.approx(np.sqrt(2.0), rel=1e-15)


def _bisect_roots(p):
    f = lambda r: float(radial_momentum_sq(p, r))
    tp = turning_points(p)
    # bracket each root around the potential minimum, independent of the closed form
    if p.system is System.KEPLER:
        r_c = p.l**2 / (p.m * p.coupling)
        lo, hi = 1e-12 * r_c, 1e6 * r_c
    else:
        r_c = (p.l**2 / (p.m * p.coupling)) ** 0.25
        lo, hi = 1e-9 * r_c, 1e4 * r_c
    a = brentq(f, lo, r_c, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    b = brentq(f, r_c, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return tp, a, b


@pytest.mark.parametrize("system", list(System))
def test_turning_points_vs_root_finder(system, rng):
    for _ in range(50):
        p = random_bound(rng, system)
        tp, a, b = _bisect_roots(p)
        assert tp.r_min == pytest.approx(a, rel=1e-10)
        assert tp.r_max == pytest.approx(b, rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(
    system=st.sampled_from(list(System)),
    m=st.floats(0.3, 3.0),
    k=st.floats(0.2, 3.0),
    l=st.floats(0.1, 2.0),
    x=st.floats(0.02, 0.98),
)
def test_momentum_sign_structure(system, m, k, l, x):
    if system is System.KEPLER:
        E = -(1 - x) * m * k * k / (2 * l * l)
    else:
        E = l * np.sqrt(k / m) / np.sqrt(1 - x)
    p = OrbitParams(system, E=E, l=l, coupling=k, m=m)
    tp = turning_points(p)
    assert 0 < tp.r_min <= tp.r_max
    inner = np.linspace(tp.r_min, tp.r_max, 1002)[1:-1]
    assert np.all(radial_momentum_sq(p, inner) > 0)
    assert radial_momentum_sq(p, tp.r_min / 2) <= 0
    if system is System.KEPLER:
        assert radial_momentum_sq(p, 2 * tp.r_max) <= 0
    scale = 2 * m * abs(E)
    assert abs(radial_momentum_sq(p, tp.r_min)) < 1e-10 * scale
    assert abs(radial_momentum_sq(p, tp.r_max)) < 1e-10 * scale


def test_width_shrinks_towards_circular():
    E_c = -0.5
    widths = [turning_points(kep(E_c * s, 1.0)).width for s in np.linspace(0.5, 0.999, 20)]
    assert np.all(np.diff(widths) < 0)


def test_negative_l_same_turning_points():
    a, b = turning_points(kep(-0.125, 0.5)), turning_points(kep(-0.125, -0.5))
    assert (a.r_min, a.r_max) == (b.r_min, b.r_max)


def test_record_round_trip():
    p = osc(1.0, 0.5, k=2.0, m=1.5)
    assert OrbitParams.from_record(p.to_record()) == p
    with pytest.raises(ConfigError):
        OrbitParams.from_record({"system": "kepler", "E": -1})
    with pytest.raises(ConfigError):
        OrbitParams.from_record({"system": "comet", "E": -1, "l": 1, "coupling": 1})


def test_chart_round_trip():
    p = kep(-0.125, 0.5)
    ch = AnnulusChart.of(p)
    u = np.linspace(0, np.pi / 2, 101)
    assert np.allclose(ch.u_of_r(ch.r_of_u(u)), u, atol=1e-7)
    mid = u[1:-1]
    assert np.allclose(ch.radial_momentum(mid) ** 2, radial_momentum_sq(p, ch.r_of_u(mid)), rtol=1e-10)
