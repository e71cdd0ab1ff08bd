from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import boost
from ed21.dynamics import ExternalField, SimConfig, simulate
from ed21.geometry import outer_v
from ed21.ledger import (LEDGER_COLUMNS, LedgerError, balance_residuals, boundary_force,
                         dressed_momentum, paired_integrand, radiated_angular_momentum,
                         radiated_momentum, radiation_rate, rate_limit, write_ledger_csv)
from ed21.quadrature import integrate
from ed21.selfforce import Prehistory, self_force
from ed21.worldline import (CircularWorldline, HyperbolicWorldline, RampWorldline,
                            TranslatedWorldline, UniformWorldline, read_csv)

# 50-digit mpmath oracle, tests/oracles/paired_circle.py (R=0.3, omega=1.5, t=0.4)
PAIRED = {
    1e-6: [-0.53479773257818623, 0.73974581931017936, -0.9301421095205451],
    1e-4: [-0.53479773059065029, 0.73974581656096913, -0.93014210606374123],
    1e-3: [-0.53479753380495023, 0.73974554436198612, -0.93014176380599586],
}
RATE_LIMIT = [-0.53479773257838501, 0.29728535113538851, -0.37380086026370824]

TRUNC = Prehistory.truncate(0.0)


@pytest.mark.parametrize("delta", sorted(PAIRED))
def test_paired_integrand_matches_high_precision(delta):
    w = CircularWorldline(0.3, 1.5)
    got = paired_integrand(w, 0.4, delta, 1.0)[0]
    assert np.allclose(got, PAIRED[delta], rtol=1e-8, atol=1e-9)


def test_rate_limit_matches_high_precision():
    st = CircularWorldline(0.3, 1.5).eval(0.4)
    got = rate_limit(st.u.array, st.a.array, st.adot.array, 1.0)
    assert np.allclose(got, RATE_LIMIT, rtol=1e-10)


def test_paired_integrand_vanishes_on_hyperbola():
    # time-translation symmetry makes the pairing exact
    w = HyperbolicWorldline(1.0)
    vals = paired_integrand(w, 0.7, np.geomspace(1e-6, 0.5, 9), 1.0)
    assert np.abs(vals).max() < 1e-6


def test_uniform_motion_radiates_nothing():
    w = UniformWorldline([0, 0, 0], boost(0.3, 0.1), tau_pre=-1.0)
    p = radiated_momentum(w, 1.0, 1.0, Prehistory.asymptote())
    assert np.abs(p.array).max() <= 1e-10


def test_two_routes_to_radiated_momentum():
    w = RampWorldline(0.8)
    tau = 0.6
    nested = radiated_momentum(w, tau, 1.0, TRUNC, quad_tol=1e-6).array
    rate = lambda ts: np.array([radiation_rate(w, float(t), 1.0, TRUNC).array  # noqa: E731
                                for t in np.atleast_1d(ts)])
    alt, _ = integrate(rate, 0.0, tau, rtol=1e-10, atol=1e-12)
    assert np.allclose(nested, alt, rtol=1e-5, atol=1e-10)


def test_angular_momentum_translation():
    # shifting the worldline by c changes M_rad by c ^ p_rad
    w = HyperbolicWorldline(1.0)
    c = np.array([0.3, -0.2, 0.5])
    tau = 0.4
    m0 = radiated_angular_momentum(w, tau, 1.0, TRUNC, quad_tol=1e-7).array
    m1 = radiated_angular_momentum(TranslatedWorldline(w, c), tau, 1.0, TRUNC,
                                   quad_tol=1e-7).array
    p = radiated_momentum(w, tau, 1.0, TRUNC, quad_tol=1e-7).array
    assert np.allclose(m1 - m0, outer_v(c, p), rtol=1e-5, atol=1e-9)


def test_angular_momentum_undefined_with_straight_past():
    w = HyperbolicWorldline(1.0, static_before=True)
    with pytest.raises(LedgerError):
        radiated_angular_momentum(w, 1.0, 1.0, Prehistory.asymptote())


@pytest.mark.parametrize("w", [RampWorldline(0.8), CircularWorldline(0.3, 1.5)],
                         ids=["ramp", "circle"])
def test_local_balance_identity(w):
    # boundary flux = d(nonlocal p_part)/dtau + dp_rad/dtau + f_self + mdot u
    tau, h, m = 0.8, 1e-3, 1.0
    nonlocal_p = lambda t: (dressed_momentum(w, t, 1.0, m, TRUNC).array  # noqa: E731
                            - m * w.eval(t).u.array)
    dp = (nonlocal_p(tau + h) - nonlocal_p(tau - h)) / (2 * h)
    sf = self_force(w, tau, 1.0, TRUNC)
    lhs = boundary_force(w, tau, 1.0, TRUNC).array
    rhs = dp + radiation_rate(w, tau, 1.0, TRUNC).array + sf.force.array \
        + sf.mass_rate * w.eval(tau).u.array
    assert np.allclose(lhs, rhs, atol=1e-6)


def test_truncated_boundary_flux_on_hyperbola():
    w = HyperbolicWorldline(1.0)
    tau = 1.5
    got = boundary_force(w, tau, 1.0, TRUNC).array
    ref = -0.5 * w.eval(tau).a.array / math.cosh(tau / 2)
    assert np.allclose(got, ref, rtol=1e-9)


@pytest.mark.parametrize("prehistory", ["truncate", "asymptote"])
def test_trace_balance_converges_at_second_order(prehistory):
    worst = []
    for h in (4e-3, 2e-3):
        cfg = SimConfig(e=1.0, m0=10.0, h=h, tau_end=0.6, field=ExternalField.constant(10.0),
                        prehistory=prehistory)
        reps = balance_residuals(simulate(cfg))
        worst.append(max(np.abs(r.balance_p.array).max() for r in reps))
    assert math.log2(worst[0] / worst[1]) >= 1.9


def test_moving_start_balance_away_from_onset():
    # a moving straight past leaves an O(h) residual on the first two nodes only
    worst = []
    for h in (4e-3, 2e-3):
        cfg = SimConfig(e=1.0, m0=10.0, h=h, tau_end=0.6, field=ExternalField.constant(10.0),
                        prehistory="uniform", v0=(0.3, -0.2))
        reps = balance_residuals(simulate(cfg))[2:]
        worst.append(max(np.abs(r.balance_p.array).max() for r in reps))
    assert math.log2(worst[0] / worst[1]) >= 1.9


def test_ledger_csv(tmp_path):
    for prehistory, has_m in (("truncate", True), ("asymptote", False)):
        cfg = SimConfig(e=1.0, m0=10.0, h=1e-2, tau_end=0.2, field=ExternalField.constant(10.0),
                        prehistory=prehistory)
        reps = balance_residuals(simulate(cfg))
        path = tmp_path / f"{prehistory}.csv"
        write_ledger_csv(path, reps)
        cols, rows = read_csv(path)
        assert cols == list(LEDGER_COLUMNS) and len(rows) == 21
        m_cols = rows[:, cols.index("Mrad01"):cols.index("Mrad12") + 1]
        assert np.all(np.isfinite(m_cols)) == has_m
        assert (reps[0].m_rad is not None) == has_m
