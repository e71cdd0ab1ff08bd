from __future__ import annotations

import math

import numpy as np
import pytest

from ed21.dynamics import (TRACE_COLUMNS, ExternalField, NumericalError, SimConfig,
                           fit_effective_acceleration, simulate)
from ed21.geometry import mdot_v
from ed21.selfforce import Prehistory, self_force
from ed21.worldline import read_csv


def bare(h: float, tau_end: float = 2.0) -> SimConfig:
    return SimConfig(e=1.0, m0=1.0, h=h, tau_end=tau_end, field=ExternalField.constant(1.0),
                     prehistory="truncate", selfforce=False)


def hyperbola_error(h: float) -> float:
    tr = simulate(bare(h))
    exact = np.column_stack([np.sinh(tr.tau), np.cosh(tr.tau) - 1.0, np.zeros_like(tr.tau)])
    return float(np.abs(tr.z - exact).max())


def test_bare_charge_follows_hyperbola():
    assert hyperbola_error(1e-3) <= 1e-6


def test_bare_convergence_order():
    errs = [hyperbola_error(h) for h in (0.04, 0.02, 0.01)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert orders.min() >= 1.9


@pytest.mark.parametrize("prehistory", ["truncate", "asymptote"])
def test_dressed_convergence_factor(prehistory):
    def run(h):
        return simulate(SimConfig(e=1.0, m0=10.0, h=h, tau_end=1.0,
                                  field=ExternalField.constant(10.0, 2.0),
                                  prehistory=prehistory)).z
    z1, z2, z4 = run(0.02), run(0.01), run(0.005)
    dev1 = np.abs(z1 - z4[::4]).max()
    dev2 = np.abs(z2 - z4[::2]).max()
    assert dev1 / dev2 >= 3.5


def test_onset_acceleration_with_straight_past():
    # the straight past adds e^2 a / 4 the instant the field switches on
    cfg = SimConfig(e=1.0, m0=10.0, h=0.01, tau_end=0.1, field=ExternalField.constant(10.0),
                    prehistory="static")
    tr = simulate(cfg)
    assert tr.a[0, 1] == pytest.approx(10.0 / 9.75, rel=1e-12)
    assert np.allclose(tr.f_self[0], 0.25 * tr.a[0])
    assert abs(tr.f_self[1, 1] - tr.f_self[0, 1]) < 1e-3


def test_velocity_stays_normalised():
    tr = simulate(bare(1e-2))
    assert np.abs(mdot_v(tr.u, tr.u) + 1.0).max() <= 1e-12
    assert np.abs(mdot_v(tr.u, tr.a)).max() <= 1e-8


def test_work_energy_identity():
    # e E dz1 = m du0 for the bare charge
    tr = simulate(bare(1e-2))
    assert np.abs(tr.z[:, 1] - (tr.u[:, 0] - 1.0)).max() <= 1e-6


@pytest.mark.parametrize("h", [0.02, 0.01])
def test_replayed_trace_reproduces_self_force(h):
    cfg = SimConfig(e=1.0, m0=10.0, h=h, tau_end=1.0, field=ExternalField.constant(10.0),
                    prehistory="truncate")
    tr = simulate(cfg)
    w = tr.worldline()
    for tau in (0.5, 1.0):
        k = int(round(tau / h))
        r = self_force(w, tau, 1.0, Prehistory.truncate(0.0), quad_tol=1e-7)
        assert np.abs(r.force.array - tr.f_self[k]).max() <= 10 * tr.quad_err.max()


def test_free_particle_moves_uniformly():
    cfg = SimConfig(e=1.0, m0=10.0, h=0.05, tau_end=2.0, v0=(0.3, -0.2), prehistory="uniform")
    tr = simulate(cfg)
    assert np.abs(tr.a).max() <= 1e-10
    assert np.abs(tr.mdot).max() <= 1e-10
    assert np.allclose(tr.u, tr.u[0], atol=1e-12)


def test_dressed_acceleration_approaches_renormalised_value():
    cfg = SimConfig(e=1.0, m0=10.0, h=0.01, tau_end=3.0, field=ExternalField.constant(10.0),
                    prehistory="truncate")
    tr = simulate(cfg)
    fit = fit_effective_acceleration(tr, (2.0, 3.0))
    bare_a, dressed_a = 1.0, 10.0 / 9.5
    # the tail builds up from zero, so by tau = 3 the mean sits between the two
    assert bare_a < fit.mean < dressed_a
    assert abs(fit.mean - dressed_a) < 0.03


def test_tail_outlives_the_field():
    cfg = SimConfig(e=1.0, m0=10.0, h=0.02, tau_end=4.0,
                    field=ExternalField.constant(10.0, tau_off=2.0), prehistory="static")
    tr = simulate(cfg)
    mag = np.sqrt(np.maximum(mdot_v(tr.a, tr.a), 0.0))
    after = mag[tr.tau > 2.5]
    assert mag[tr.tau < 2.0][-1] > 0.9
    assert 0.0 < after.min() and after.max() < 0.1
    assert np.all(np.diff(after) < 0)


def test_numerical_error_keeps_partial_trace():
    cfg = SimConfig(e=1.0, m0=0.4, h=0.01, tau_end=1.0, field=ExternalField.constant(3.0),
                    prehistory="static")
    with pytest.raises(NumericalError) as info:
        simulate(cfg)
    tr = info.value.trace
    assert not tr.complete
    assert len(tr) >= 1 and tr.tau[0] == 0.0


@pytest.mark.parametrize("kw", [
    {"m0": 0.0}, {"h": -1e-3}, {"tau_end": 0.0}, {"prehistory": "mirror"},
    {"coarsen": True}, {"quad_tol": 0.5}, {"prehistory": "static", "v0": (0.1, 0.0)},
])
def test_config_rejects_bad_values(kw):
    base = dict(e=1.0, m0=1.0, h=1e-2, tau_end=1.0)
    base.update(kw)
    with pytest.raises(ValueError):
        SimConfig(**base)


def test_steps_must_divide_interval():
    with pytest.raises(ValueError):
        SimConfig(e=1.0, m0=1.0, h=0.3, tau_end=1.0).steps
    assert SimConfig(e=1.0, m0=1.0, h=0.1, tau_end=1.0).steps == 10


def test_field_window():
    f = ExternalField.constant(2.0, tau_on=1.0, tau_off=2.0)
    u = np.array([1.0, 0.0, 0.0])
    assert np.allclose(f.force(0.5, u, 1.0), 0.0)
    assert np.allclose(f.force(1.5, u, 1.0), [0.0, 2.0, 0.0])
    with pytest.raises(ValueError):
        ExternalField.constant(1.0, tau_on=3.0, tau_off=2.0)


def test_fit_needs_enough_nodes():
    tr = simulate(bare(0.1))
    with pytest.raises(ValueError):
        fit_effective_acceleration(tr, (0.0, 0.5))
    fit = fit_effective_acceleration(tr, (0.0, 2.0))
    assert fit.mean == pytest.approx(1.0, abs=1e-6) and fit.nodes == 21


def test_trace_csv(tmp_path):
    tr = simulate(bare(0.1, 1.0))
    path = tmp_path / "trace.csv"
    tr.to_csv(path)
    cols, data = read_csv(path)
    assert cols == list(TRACE_COLUMNS)
    assert data.shape == (11, len(TRACE_COLUMNS))
    assert np.allclose(data[:, cols.index("u1")], np.sinh(tr.tau), atol=1e-3)
    assert math.isclose(data[-1, 0], 1.0)
