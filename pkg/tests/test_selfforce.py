from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sint

from conftest import boost
from ed21.geometry import mdot
from ed21.selfforce import (TAIL_COLUMNS, Prehistory, abraham_limit, combined_integrand,
                            dump_tail_csv, force_density, mass_rate_density, self_force,
                            tail_lorentz_force)
from ed21.worldline import (CircularWorldline, HyperbolicWorldline, RampWorldline,
                            UniformWorldline, read_csv)

# mpmath oracle, tests/oracles/ramp_selfforce.py (b = 0.8, truncate at 0, tau = 1)
RAMP_FORCE = np.array([-0.097724381604120889, -0.15643533910937082, 0.0])
RAMP_MASS_RATE = 0.0031813081203410262


def sech_coefficient(tau):
    return 0.5 * (1.0 - 1.0 / math.cosh(tau / 2))


@pytest.mark.parametrize("tau", [0.1, 1.0, 2.0])
def test_hyperbola_truncated_closed_form(tau):
    w = HyperbolicWorldline(1.0)
    r = self_force(w, tau, 1.0, Prehistory.truncate(0.0))
    a = w.eval(tau).a.array
    assert np.allclose(r.force.array, sech_coefficient(tau) * a, rtol=1e-7, atol=1e-12)
    assert abs(r.mass_rate) < 1e-8


def test_hyperbola_scales_with_acceleration_and_charge():
    # dimensionless in a tau; force ~ e^2 a
    a0, e = 2.0, 0.5
    w = HyperbolicWorldline(a0)
    tau = 0.5
    r = self_force(w, tau, e, Prehistory.truncate(0.0))
    a = w.eval(tau).a.array
    assert np.allclose(r.force.array, e * e * sech_coefficient(a0 * tau) * a, rtol=1e-7)


def test_ramp_matches_mpmath_oracle():
    r = self_force(RampWorldline(0.8), 1.0, 1.0, Prehistory.truncate(0.0))
    assert np.allclose(r.force.array, RAMP_FORCE, rtol=1e-8, atol=1e-12)
    assert r.mass_rate == pytest.approx(RAMP_MASS_RATE, rel=1e-8)
    assert r.quad_error < 1e-8


def test_uniform_motion_feels_no_force():
    w = UniformWorldline([0, 0, 0], boost(0.5, -0.3), tau_pre=-1.0)
    for tau in (-2.0, 0.0, 1.5):
        r = self_force(w, tau, 1.0, Prehistory.asymptote())
        assert np.abs(r.force.array).max() <= 1e-10
        assert abs(r.mass_rate) <= 1e-10


@settings(max_examples=8)
@given(st.floats(0.0, 6.0))
def test_self_force_orthogonal_to_velocity(tau):
    w = CircularWorldline(0.3, 1.5)
    r = self_force(w, tau + 1.0, 1.0, Prehistory.truncate(tau))
    u = w.eval(tau + 1.0).u
    assert abs(mdot(r.force, u)) <= 1e-8 * (1 + np.abs(r.force.array).max())


def test_coincidence_limit_is_abraham_vector():
    w = CircularWorldline(0.1, 1.0)
    tau = 0.3
    d = 1e-2 / 2.0 ** np.arange(4)
    vals = np.array([combined_integrand(w, tau, tau - x, 1.0).combined.array for x in d])
    # three Richardson levels for a smooth function of Delta
    r1 = 2 * vals[1:] - vals[:-1]
    r2 = (4 * r1[1:] - r1[:-1]) / 3
    r3 = (8 * r2[1:] - r2[:-1]) / 7
    ref = abraham_limit(w.eval(tau), 1.0).array
    assert np.abs(r3[-1] - ref).max() <= 1e-4 * np.abs(ref).max()


def test_raw_density_diverges_like_inverse_delta():
    w = CircularWorldline(0.1, 1.0)
    d = np.geomspace(1e-5, 1e-3, 6)
    mag = [np.linalg.norm(force_density(w, 0.0, -x, 1.0).array) for x in d]
    slope = np.polyfit(np.log(d), np.log(mag), 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.05)


def test_counterterm_cancels_divergence():
    w = HyperbolicWorldline(1.0)
    s = combined_integrand(w, 1.0, 1.0 - 1e-6, 1.0)
    assert np.linalg.norm(s.raw_force_density.array) > 1e5
    assert np.linalg.norm(s.combined.array) < 10


def test_mass_rate_density_hyperbola_vanishes():
    w = HyperbolicWorldline(1.0)
    assert abs(mass_rate_density(w, 2.0, 0.5, 1.0)) < 1e-12


def test_asymptote_matches_long_truncation():
    # the straight static past enters through its closed-form raw force; the
    # explicit truncated history also carries the counterterm (e^2/2) a int ds/rho
    w = HyperbolicWorldline(1.0, static_before=True)
    tau = 1.0
    full = self_force(w, tau, 1.0, Prehistory.asymptote())
    a = w.eval(tau).a.array
    z_tau = w.eval(tau).z.array

    def static_log(t):
        def inv_rho(s):
            q = z_tau - np.array([s, 0.0, 0.0])
            return 1.0 / math.sqrt(q[0] ** 2 - q[1] ** 2 - q[2] ** 2)
        return sint.quad(inv_rho, -t, 0.0, epsabs=1e-13, epsrel=1e-12, limit=200)[0]

    diffs, mdiffs = [], []
    for t in (20.0, 40.0):
        r = self_force(w, tau, 1.0, Prehistory.truncate(-t))
        f = r.force.array - 0.5 * a * static_log(t)
        diffs.append(np.abs(f - full.force.array).max())
        mdiffs.append(abs(r.mass_rate - full.mass_rate))
    assert diffs[1] < diffs[0] < 1e-2
    assert diffs[0] / diffs[1] == pytest.approx(4.0, rel=0.1)
    assert mdiffs[0] / mdiffs[1] == pytest.approx(2.0, rel=0.1)


def test_tail_force_cutoff_coefficient():
    w = HyperbolicWorldline(1.0)
    pol = Prehistory.truncate(0.0)
    f1, coeff = tail_lorentz_force(w, 1.0, 1.0, "retarded", cutoff=1e-4, policy=pol)
    f2, _ = tail_lorentz_force(w, 1.0, 1.0, "retarded", cutoff=5e-5, policy=pol)
    # F(c) ~ -coeff ln c + finite
    est = (f1.array - f2.array) / -math.log(1e-4 / 5e-5)
    assert np.allclose(est, coeff.array, rtol=1e-3, atol=1e-6)
    assert np.allclose(coeff.array, -0.5 * w.eval(1.0).a.array)
    # retarded minus advanced stays finite as the cutoff shrinks
    d = []
    for c in (1e-3, 1e-4):
        r, _ = tail_lorentz_force(w, 0.5, 1.0, "retarded", cutoff=c, policy=pol)
        v, _ = tail_lorentz_force(w, 0.5, 1.0, "advanced", tau_obs=1.0, cutoff=c)
        d.append(r.array - v.array)
    assert np.abs(d[0] - d[1]).max() < 1e-2


def test_tail_dump_csv(tmp_path):
    w = HyperbolicWorldline(1.0)
    path = tmp_path / "tail.csv"
    dump_tail_csv(path, w, 1.0, np.linspace(0.0, 0.9, 10), 1.0)
    cols, rows = read_csv(path)
    assert cols == TAIL_COLUMNS and rows.shape == (10, 11)
    assert np.allclose(rows[:, 7:10], rows[:, 1:4] + rows[:, 4:7])


def test_emission_after_field_time_rejected():
    with pytest.raises(ValueError):
        force_density(HyperbolicWorldline(1.0), 1.0, 1.5, 1.0)
    with pytest.raises(ValueError):
        Prehistory("never")
