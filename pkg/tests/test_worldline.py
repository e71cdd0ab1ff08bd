from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from conftest import boost
from ed21.geometry import mdot_v
from ed21.worldline import (CircularWorldline, DomainError, HyperbolicWorldline, RampWorldline,
                            StaticWorldline, TabulatedWorldline, TranslatedWorldline,
                            UniformWorldline, advanced_time, light_cone_time, read_csv,
                            retarded_time, separation, write_csv)

FAMILIES = [
    StaticWorldline(0.2, -0.1),
    UniformWorldline([0, 0.1, 0.2], boost(0.3, -0.4)),
    HyperbolicWorldline(1.5),
    HyperbolicWorldline(0.7, static_before=True),
    CircularWorldline(0.5, 1.2),
    RampWorldline(0.8),
]


@pytest.mark.parametrize("w", FAMILIES, ids=lambda w: type(w).__name__)
@given(tau=st.floats(-4, 4))
def test_unit_velocity_and_orthogonal_acceleration(w, tau):
    _, u, a, _ = w.arrays(np.array([tau]))
    assert mdot_v(u[0], u[0]) == pytest.approx(-1.0, abs=1e-9 * u[0, 0] ** 2)
    assert abs(mdot_v(u[0], a[0])) <= 1e-9 * (1 + np.abs(a[0]).max() * u[0, 0])


@pytest.mark.parametrize("w", FAMILIES, ids=lambda w: type(w).__name__)
def test_derivatives_by_finite_differences(w):
    t, h = 0.7, 1e-5
    z, u, a, ad = w.arrays(np.array([t - h, t, t + h]))
    assert np.allclose((z[2] - z[0]) / (2 * h), u[1], atol=1e-8)
    assert np.allclose((u[2] - u[0]) / (2 * h), a[1], atol=1e-8)
    assert np.allclose((a[2] - a[0]) / (2 * h), ad[1], atol=1e-7)


@pytest.mark.parametrize("w", FAMILIES, ids=lambda w: type(w).__name__)
def test_chord_matches_positions(w):
    t1, t2 = np.array([0.5, 2.0, -1.0]), np.array([0.1, -3.0, -1.5])
    dz, du = w.chord(t1, t2)
    z1, u1, _, _ = w.arrays(t1)
    z2, u2, _, _ = w.arrays(t2)
    assert np.allclose(dz, z1 - z2, atol=1e-12 * (1 + np.abs(z1).max()))
    assert np.allclose(du, u1 - u2, atol=1e-12 * (1 + np.abs(u1).max()))


def test_hyperbola_chord_length():
    w = HyperbolicWorldline(1.0)
    for d in np.geomspace(1e-3, 5.0, 12):
        _, rho, _ = separation(w, 1.0, 1.0 - d)
        assert rho == pytest.approx(2 * math.sinh(d / 2), rel=1e-10)


@given(x0=st.floats(-2, 2), x1=st.floats(-2, 2), x2=st.floats(-2, 2))
def test_retarded_time_matches_brentq(x0, x1, x2):
    w = CircularWorldline(0.4, 1.5)
    x = np.array([x0, x1, x2])
    if math.hypot(x1 - w.position(w.proper_time_at(x0))[0, 1],
                  x2 - w.position(w.proper_time_at(x0))[0, 2]) < 1e-3:
        return

    def cone(tau):
        k = x - w.position(tau)[0]
        return float(mdot_v(k, k))

    t_now = w.proper_time_at(x0)
    lo = t_now - 10.0
    ref = brentq(cone, lo, t_now, xtol=1e-14)
    assert retarded_time(w, x) == pytest.approx(ref, abs=1e-10)
    ref_adv = brentq(cone, t_now, t_now + 10.0, xtol=1e-14)
    assert advanced_time(w, x) == pytest.approx(ref_adv, abs=1e-10)


def test_point_on_worldline_flagged():
    w = StaticWorldline()
    assert light_cone_time(w, (1.0, 0.0, 0.0)).on_worldline


def test_static_before_hyperbola_is_continuous():
    w = HyperbolicWorldline(2.0, static_before=True)
    z, u, a, _ = w.arrays(np.array([-1.0, -1e-12, 0.0]))
    assert np.allclose(u[0], [1, 0, 0]) and np.allclose(a[0], 0)
    assert w.kinks == (0.0,) and w.past is not None


def test_tabulated_reproduces_hyperbola_and_round_trips(tmp_path):
    w = HyperbolicWorldline(1.0)
    tau = np.linspace(0, 2, 201)
    z, u, a, _ = w.arrays(tau)
    tw = TabulatedWorldline(tau, z, u, a)
    probe = np.array([0.123, 1.077, 1.999])
    zt, ut, at, _ = tw.arrays(probe)
    ze, ue, ae, _ = w.arrays(probe)
    assert np.allclose(zt, ze, atol=1e-11)
    assert np.allclose(ut, ue, atol=1e-9)
    assert np.allclose(at, ae, atol=1e-6)
    path = tmp_path / "wl.csv"
    tw.to_csv(path)
    back = TabulatedWorldline.from_csv(path)
    assert np.array_equal(back.arrays(probe)[0], zt)
    with pytest.raises(DomainError):
        tw.arrays(np.array([3.0]))


def test_tabulated_uniform_past():
    u = boost(0.3, 0.0)
    w = UniformWorldline([0, 0, 0], u)
    tau = np.linspace(0, 1, 11)
    z, uu, a, _ = w.arrays(tau)
    tw = TabulatedWorldline(tau, z, uu, a, past="uniform")
    assert np.allclose(tw.arrays(np.array([-2.0]))[0], w.arrays(np.array([-2.0]))[0])


def test_csv_is_lossless(tmp_path):
    rows = np.array([[math.pi, 1 / 3, -2e-300], [1e300, 0.1, 7.0]])
    write_csv(tmp_path / "x.csv", ["a", "b", "c"], rows)
    cols, back = read_csv(tmp_path / "x.csv")
    assert cols == ["a", "b", "c"] and np.array_equal(back, rows)


def test_translated_worldline_shifts_positions_only():
    w = CircularWorldline(0.3, 1.0)
    c = np.array([0.5, -1.0, 2.0])
    tw = TranslatedWorldline(w, c)
    t = np.array([0.2, 1.3])
    z, u, a, ad = w.arrays(t)
    z2, u2, a2, ad2 = tw.arrays(t)
    assert np.allclose(z2, z + c) and np.array_equal(u2, u) and np.array_equal(a2, a)
    assert np.array_equal(tw.chord(1.0, 0.2)[0], w.chord(1.0, 0.2)[0])


def test_invalid_worldlines():
    with pytest.raises(ValueError):
        CircularWorldline(1.0, 1.5)
    with pytest.raises(ValueError):
        UniformWorldline([0, 0, 0], [1.0, 0.5, 0.0])
