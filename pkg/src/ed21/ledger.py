"""Radiated momentum and angular momentum, the dressed-particle momentum and balance checks.

The tail force at ``t`` from emission time ``s`` is

    g(t, s) = e^2 [-(q.u_t) u_s + (u_t.u_s) q] / rho^3,   q = z(t) - z(s).

The radiated momentum is ``-1/2`` of the path integral of the retarded tail
force minus the advanced one.  Each tail force diverges like
``-e^2 a / (2 Delta)``; pairing ``s = t - Delta`` with ``s = t + Delta`` at
equal ``Delta`` cancels the divergence node by node.

Swapping the order of integration gives a second, single-integral form of the
rate: ``d p_rad / d tau = -1/2 int [g(tau, s) - g(s, tau)] ds``, whose
integrand tends to ``e^2 (adot/6 - (2/3) a^2 u)``.  The trace-based balance
check uses that form on the trace nodes.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .geometry import AngularMomentum2, MVec3, mdot_v, outer_v
from .quadrature import integrate
from .selfforce import Prehistory, line_terms
from .worldline import Worldline, write_csv

if TYPE_CHECKING:
    from .dynamics import SimulationTrace

log = logging.getLogger(__name__)


class LedgerError(RuntimeError):
    """A ledger quantity is undefined for the requested configuration."""


@dataclass(frozen=True)
class LedgerReport:
    tau: float
    p_rad: MVec3
    m_rad: AngularMomentum2 | None
    p_part: MVec3
    mass: float
    balance_p: MVec3
    balance_m: AngularMomentum2 | None
    boundary_p: MVec3
    balance_p_err: float
    balance_m_err: float


def _policy(w: Worldline, policy: Prehistory | None) -> Prehistory:
    if policy is not None:
        return policy
    if w.past is None:
        raise LedgerError("prehistory policy unresolved: pass a policy or give the worldline a past")
    return Prehistory.asymptote()


def g_pairs(w: Worldline, t: np.ndarray, s: np.ndarray, e: float) -> np.ndarray:
    """``g(t_i, s_i)`` for paired arrays of field and emission times."""
    t, s = np.broadcast_arrays(np.atleast_1d(np.asarray(t, float)),
                               np.atleast_1d(np.asarray(s, float)))
    q, _ = w.chord(t, s)
    _, ut, _, _ = w.arrays(t)
    _, us, _, _ = w.arrays(s)
    rho = np.sqrt(np.maximum(-mdot_v(q, q), 0.0))
    num = -mdot_v(q, ut)[:, None] * us + mdot_v(ut, us)[:, None] * q
    return e * e * num / (rho**3)[:, None]


def rate_limit(u, a, adot, e: float) -> np.ndarray:
    """Coincidence value of ``g(tau, s) - g(s, tau)``."""
    return e * e * (np.asarray(adot) / 6.0 - (2.0 / 3.0) * mdot_v(a, a) * np.asarray(u))


# ------------------------------------------------------ paired quadrature


def _paired_raw(w: Worldline, t: float, delta: np.ndarray, e: float) -> np.ndarray:
    tt = np.full_like(delta, t)
    return g_pairs(w, tt, t - delta, e) - g_pairs(w, tt, t + delta, e)


def safe_delta(w: Worldline, t: float) -> float:
    """Below this separation the paired integrand is taken from its even Taylor fit.

    Direct evaluation loses about ``gamma^3 eps / Delta^2`` to cancellation
    between the two nearly equal tail forces.
    """
    _, u, a, _ = w.arrays(np.array([t]))
    amag = math.sqrt(max(float(mdot_v(a[0], a[0])), 0.0))
    return 1e-3 / (max(1.0, amag) * max(1.0, float(u[0, 0])))


def _even_fit(w: Worldline, t: float, ds: float, e: float) -> np.ndarray:
    """Least-squares ``c0 + c1 d^2 + c2 d^4`` over eight samples on ``[ds, 3 ds]``.

    The extra samples damp the rounding noise that an interpolating fit
    would carry into the extrapolated value at ``d = 0``.
    """
    d = ds * np.linspace(1.0, 3.0, 8)
    vals = _paired_raw(w, t, d, e)
    x = d * d
    mat = np.column_stack([np.ones(8), x, x * x])
    return np.linalg.lstsq(mat, vals, rcond=None)[0]


def paired_integrand(w: Worldline, t: float, delta, e: float) -> np.ndarray:
    """``g(t, t - Delta) - g(t, t + Delta)``: bounded and even in ``Delta``.

    The paired difference is an even analytic function of ``Delta``; values
    below :func:`safe_delta` come from the even fit anchored just above it.
    """
    delta = np.atleast_1d(np.asarray(delta, float))
    out = _paired_raw(w, t, np.maximum(delta, 1e-300), e)
    ds = safe_delta(w, t)
    small = delta < ds
    if small.any():
        c = _even_fit(w, t, ds, e)
        x = delta[small] ** 2
        out[small] = c[0] + np.outer(x, c[1]) + np.outer(x * x, c[2])
    return out


def _inner(w: Worldline, t: float, s_far: float, tau: float, e: float, tol: float) -> np.ndarray:
    """Retarded minus advanced tail force at ``t`` with the advanced part cut at ``tau``."""
    back, ahead = t - s_far, tau - t
    d = min(back, ahead)
    kinks = [abs(t - k) for k in w.kinks]
    out = np.zeros(3)
    if d > 0:
        ds = min(safe_delta(w, t), 0.5 * d)
        c = _even_fit(w, t, ds, e)
        out += c[0] * ds + c[1] * ds**3 / 3.0 + c[2] * ds**5 / 5.0
        v, _ = integrate(lambda x: _paired_raw(w, t, x, e), ds, d, rtol=tol,
                         atol=tol * e * e, breakpoints=kinks, strict=False)
        out += v
    tt = lambda x: np.full_like(x, t)  # noqa: E731
    if back > ahead:
        v, _ = integrate(lambda x: g_pairs(w, tt(x), t - x, e), ahead, back, rtol=tol,
                         atol=tol * e * e, breakpoints=kinks, strict=False)
        out += v
    elif ahead > back:
        v, _ = integrate(lambda x: g_pairs(w, tt(x), t + x, e), back, ahead, rtol=tol,
                         atol=tol * e * e, breakpoints=kinks, strict=False)
        out -= v
    return out


def _outer_breaks(w: Worldline, lo: float, hi: float) -> list[float]:
    span = hi - lo
    pts = [lo + span * f for f in (1e-6, 1e-4, 1e-2, 0.5, 1 - 1e-2, 1 - 1e-4, 1 - 1e-6)]
    return pts + [k for k in w.kinks if lo < k < hi]


def _radiated(w: Worldline, tau: float, e: float, policy: Prehistory, quad_tol: float,
              torque: bool) -> np.ndarray:
    s_far, line = policy.start(w)
    if tau <= s_far:
        return np.zeros(3)
    inner_tol = 0.1 * quad_tol

    def f(ts):
        rows = []
        for t in ts:
            v = _inner(w, t, s_far, tau, e, inner_tol)
            if line is not None:
                lt = line_terms(w, line, t, e)
                v = v + e * e * (lt.tail_ret - lt.tail_adv)
            if torque:
                v = outer_v(w.arrays(np.array([t]))[0][0], v)
            rows.append(v)
        return np.array(rows)

    val, _ = integrate(f, s_far, tau, rtol=quad_tol, atol=quad_tol * e * e,
                       breakpoints=_outer_breaks(w, s_far, tau), strict=False)
    return -0.5 * val


def radiated_momentum(w: Worldline, tau: float, e: float, policy: Prehistory | None = None,
                      quad_tol: float = 1e-9) -> MVec3:
    """Radiated momentum up to ``tau`` by nested paired quadrature."""
    return MVec3.of(_radiated(w, tau, e, _policy(w, policy), quad_tol, torque=False))


def radiated_angular_momentum(w: Worldline, tau: float, e: float,
                              policy: Prehistory | None = None,
                              quad_tol: float = 1e-9) -> AngularMomentum2:
    """Radiated angular momentum up to ``tau``.

    Only defined for a truncated history: with a straight infinite past the
    torque arm grows without bound and the path integral diverges.
    """
    policy = _policy(w, policy)
    if policy.kind != "truncate":
        raise LedgerError("radiated angular momentum diverges with an infinite straight past")
    return AngularMomentum2.of(_radiated(w, tau, e, policy, quad_tol, torque=True))


def radiation_rate(w: Worldline, tau: float, e: float, policy: Prehistory | None = None,
                   quad_tol: float = 1e-10) -> MVec3:
    """``d p_rad / d tau`` from the antisymmetrised single integral."""
    policy = _policy(w, policy)
    s_far, line = policy.start(w)
    total = np.zeros(3)
    if line is not None and tau > line.tau:
        lt = line_terms(w, line, tau, e)
        total += e * e * (lt.tail_ret - lt.tail_adv)
    if tau > s_far:
        f = lambda s: g_pairs(w, tau, s, e) - g_pairs(w, s, tau, e)  # noqa: E731
        # the two terms cancel as s -> tau; close the last window with a
        # quadratic through the coincidence limit and two nearby samples
        ds = min(safe_delta(w, tau), 0.25 * (tau - s_far))
        st = w.eval(tau)
        lim = rate_limit(st.u.array, st.a.array, st.adot.array, e)
        f1, f2 = f(np.array([tau - ds, tau - 2 * ds]))
        total += ds * (lim + 0.5 * (f1 - lim) - (f2 - 2 * f1 + lim) / 12.0)
        v, _ = integrate(f, s_far, tau - ds, rtol=quad_tol, atol=quad_tol * e * e,
                         breakpoints=[k for k in w.kinks if s_far < k < tau - ds],
                         strict=False)
        total += v
    return MVec3.of(-0.5 * total)


def dressed_momentum(w: Worldline, tau: float, e: float, m: float,
                     policy: Prehistory | None = None, quad_tol: float = 1e-11) -> MVec3:
    """``m u + (e^2/2) int [u(s) - u(tau)] / rho ds`` over the explicit history."""
    policy = _policy(w, policy)
    s_far, _ = policy.start(w)
    _, u, _, _ = w.arrays(np.array([tau]))
    p = m * u[0]
    if tau > s_far:
        def f(s):
            q, du = w.chord(np.full_like(s, tau), s)
            rho = np.sqrt(np.maximum(-mdot_v(q, q), 0.0))
            return -du / rho[:, None]

        v, _ = integrate(f, s_far, tau, rtol=quad_tol, atol=quad_tol * e * e,
                         breakpoints=[k for k in w.kinks if s_far < k < tau])
        p = p + 0.5 * e * e * v
    return MVec3.of(p)


# ------------------------------------------------------ boundary terms


def _boundary_arrays(z_tau, u_tau, z0, u0, e: float):
    """Momentum and torque fluxes through the lower end of a truncated history."""
    q = z_tau - z0
    rho = math.sqrt(max(-float(mdot_v(q, q)), 0.0))
    r = -float(mdot_v(q, u0))
    phi = -e * e * (u0 * float(mdot_v(q, u_tau)) - q * float(mdot_v(u0, u_tau))) / (rho * r)
    torque = -0.5 * e * e * outer_v(q, u_tau) / rho + outer_v(z_tau, phi)
    return phi, torque


def boundary_force(w: Worldline, tau: float, e: float, policy: Prehistory | None = None) -> MVec3:
    """Momentum flux the balance picks up at the start of the explicit history.

    For a truncated history it is the force the ledger would need from the
    missing past (on the hyperbola ``-(e^2/2) a sech(a tau / 2)``).  For a
    straight past it comes from the regularised logarithm of the
    prehistory integral.
    """
    policy = _policy(w, policy)
    s_far, line = policy.start(w)
    if tau <= s_far:
        return MVec3(0.0, 0.0, 0.0)
    z, u, _, _ = w.arrays(np.array([tau, s_far]))
    if line is None:
        return MVec3.of(_boundary_arrays(z[0], u[0], z[1], u[1], e)[0])
    lt = line_terms(w, line, tau, e)
    return MVec3.of(-0.5 * e * e * (line.u - u[0]) * lt.log_rate)


# --------------------------------------------------- trace-based ledger


LEDGER_COLUMNS = (["tau"] + [f"p_rad{i}" for i in range(3)] + [f"p_part{i}" for i in range(3)]
                  + ["mass", "Mrad01", "Mrad02", "Mrad12"] + [f"bal_p{i}" for i in range(3)])


def _trapz_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def _derivative(y: np.ndarray, h: float) -> np.ndarray:
    """Second-order finite-difference derivative along axis 0."""
    d = np.empty_like(y)
    d[1:-1] = (y[2:] - y[:-2]) / (2 * h)
    d[0] = (-3 * y[0] + 4 * y[1] - y[2]) / (2 * h)
    d[-1] = (3 * y[-1] - 4 * y[-2] + y[-3]) / (2 * h)
    return d


def balance_residuals(trace: SimulationTrace) -> list[LedgerReport]:
    """Energy-momentum and angular-momentum balance along a completed trace.

    All history integrals use the trapezoid rule on the trace nodes, with the
    coincidence limits at the live end, so the residuals shrink at the
    integrator's second order.  ``balance_p`` is
    ``d(p_part + p_rad)/d tau - F_ext - boundary_p``.
    """
    tau = trace.tau
    n = len(tau)
    if n < 3:
        raise LedgerError("trace too short for differencing")
    cfg = trace.config
    e = cfg.e
    h = float(tau[1] - tau[0])
    z, u, a, m = trace.z, trace.u, trace.a, trace.m
    adot = _derivative(a, h)
    w = trace.worldline()
    policy = cfg.policy()
    s_far, line = policy.start(w)
    e2 = e * e
    if line is not None and s_far < tau[0] - 1e-12 * max(1.0, abs(tau[0])):
        raise LedgerError("trace must start at the prehistory anchor")

    nonlocal_p = np.zeros((n, 3))
    rate_p = np.zeros((n, 3))
    rate_m = np.zeros((n, 3))
    boundary_p = np.zeros((n, 3))
    boundary_m = np.zeros((n, 3))
    for k in range(n):
        if k > 0:
            q = z[k] - z[:k]
            rho = np.sqrt(np.maximum(-mdot_v(q, q), 0.0))
            wts = _trapz_weights(k + 1, h)
            # dressed-momentum integrand, limit -a at the live end
            f = np.vstack([(u[:k] - u[k]) / rho[:, None], -a[k]])
            nonlocal_p[k] = 0.5 * e2 * wts @ f
            uk = u[k]
            num1 = -mdot_v(q, uk)[:, None] * u[:k] + mdot_v(uk, u[:k])[:, None] * q
            num2 = -mdot_v(-q, u[:k])[:, None] * uk + mdot_v(u[:k], uk)[:, None] * (-q)
            g1 = e2 * num1 / (rho**3)[:, None]
            g2 = e2 * num2 / (rho**3)[:, None]
            lim = rate_limit(u[k], a[k], adot[k], e)
            dp = np.vstack([g1 - g2, lim])
            dm = np.vstack([outer_v(z[k], g1) - outer_v(z[:k], g2),
                            outer_v(z[k], lim) + 0.5 * e2 * outer_v(a[k], u[k])])
            rate_p[k] = -0.5 * wts @ dp
            rate_m[k] = -0.5 * wts @ dm
            if line is None:
                phi, tq = _boundary_arrays(z[k], u[k], z[0], u[0], e)
                boundary_p[k], boundary_m[k] = phi, tq
        if line is not None and tau[k] > line.tau:
            lt = line_terms(w, line, float(tau[k]), e)
            rate_p[k] += -0.5 * e2 * (lt.tail_ret - lt.tail_adv)
            boundary_p[k] = -0.5 * e2 * (line.u - u[k]) * lt.log_rate
    # empty history at the first node; the boundary flux tends to -e^2 a / 2
    # there, and a straight past adds a tail rate tending to -e^2 a / 4
    boundary_p[0] = -0.5 * e2 * a[0]
    if line is None:
        boundary_m[0] = outer_v(z[0], boundary_p[0])
    elif tau[0] <= line.tau:
        rate_p[0] = -0.25 * e2 * a[0]

    wts_cum = np.zeros((n, 3))
    wts_cum[1:] = np.cumsum(0.5 * h * (rate_p[1:] + rate_p[:-1]), axis=0)
    p_rad = wts_cum
    m_rad = None
    if line is None:
        m_rad = np.zeros((n, 3))
        m_rad[1:] = np.cumsum(0.5 * h * (rate_m[1:] + rate_m[:-1]), axis=0)

    p_part = m[:, None] * u + nonlocal_p
    f_ext = trace.external_force()
    bal_p = _derivative(p_part + p_rad, h) - f_ext - boundary_p
    bal_m = None
    if m_rad is not None:
        big_m = outer_v(z, p_part) + m_rad
        bal_m = _derivative(big_m, h) - outer_v(z, f_ext) - boundary_m
    err_p = float(np.max(np.abs(trace.quad_err))) if len(trace.quad_err) else 0.0

    reports = []
    for k in range(n):
        reports.append(LedgerReport(
            tau=float(tau[k]),
            p_rad=MVec3.of(p_rad[k]),
            m_rad=None if m_rad is None else AngularMomentum2.of(m_rad[k]),
            p_part=MVec3.of(p_part[k]),
            mass=float(m[k]),
            balance_p=MVec3.of(bal_p[k]),
            balance_m=None if bal_m is None else AngularMomentum2.of(bal_m[k]),
            boundary_p=MVec3.of(boundary_p[k]),
            balance_p_err=err_p,
            balance_m_err=err_p,
        ))
    return reports


def write_ledger_csv(path: str | Path, reports: Sequence[LedgerReport]) -> None:
    rows = []
    nan3 = [math.nan] * 3
    for r in reports:
        mr = list(r.m_rad.array) if r.m_rad is not None else nan3
        rows.append([r.tau, *r.p_rad.array, *r.p_part.array, r.mass, *mr, *r.balance_p.array])
    write_csv(path, LEDGER_COLUMNS, np.array(rows, dtype=float).reshape(len(rows), len(LEDGER_COLUMNS)))
