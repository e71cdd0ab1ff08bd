"""Tail self-force of a point charge in 2+1 dimensions.

The retarded field of the charge, evaluated on its own worldline, is a
history integral whose integrand (the force density) diverges like
``-e^2 a / (2 Delta)`` as the emission time ``s`` approaches the field time
``tau``.  Adding the mass-renormalisation counterterm ``(e^2/2) a_tau / rho``
leaves a bounded integrand (the combined integrand) whose coincidence limit
is the Abraham-type vector ``(2/3) e^2 (adot - a^2 u)``.

Notation: ``q = z(tau) - z(s)``, ``rho = sqrt(-q.q)``, ``r_s = -(q.u_s)``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import MVec3, lorentz_v, mdot_v, wedge_v
from .quadrature import integrate
from .worldline import Asymptote, Worldline, WorldlineState, write_csv

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Prehistory:
    """How history integrals treat the worldline before the explicit record.

    ``asymptote``: integrate back to the worldline's ``past`` anchor and add
    closed-form contributions of the straight motion before it.
    ``truncate``: drop everything before ``tau0``.
    """

    kind: str
    tau0: float | None = None

    @classmethod
    def asymptote(cls) -> Prehistory:
        return cls("asymptote")

    @classmethod
    def truncate(cls, tau0: float) -> Prehistory:
        return cls("truncate", float(tau0))

    def __post_init__(self):
        if self.kind not in ("asymptote", "truncate"):
            raise ValueError(f"unknown prehistory policy {self.kind!r}")
        if self.kind == "truncate" and self.tau0 is None:
            raise ValueError("truncation needs tau0")

    def start(self, w: Worldline) -> tuple[float, Asymptote | None]:
        """Lower limit of the explicit history and the asymptote to add, if any."""
        if self.kind == "truncate":
            return self.tau0, None
        if w.past is None:
            raise ValueError("prehistory policy unresolved: worldline has no past asymptote")
        return w.past.tau, w.past


@dataclass(frozen=True)
class TailIntegrandSample:
    s: float
    raw_force_density: MVec3
    counterterm: MVec3
    combined: MVec3
    mass_rate_density: float


@dataclass(frozen=True)
class SelfForceResult:
    force: MVec3
    mass_rate: float
    series_cut: float
    quad_error: float


class SelfForceError(RuntimeError):
    """The near-coincidence window could not be resolved."""


# ----------------------------------------------------------------- kernels


def _field_state(w: Worldline, tau: float):
    z, u, a, ad = w.arrays(np.array([tau]))
    return z[0], u[0], a[0], ad[0]


def _pair(w: Worldline, tau: float, s: np.ndarray):
    """Separation data between the field time ``tau`` and emission times ``s``."""
    s = np.atleast_1d(np.asarray(s, float))
    q, du = w.chord(np.full_like(s, tau), s)
    _, us, as_, _ = w.arrays(s)
    rho = np.sqrt(np.maximum(-mdot_v(q, q), 0.0))
    return q, du, us, as_, rho


def raw_density_v(w: Worldline, tau: float, s: np.ndarray, e: float,
                  u_tau: np.ndarray | None = None) -> np.ndarray:
    if u_tau is None:
        u_tau = _field_state(w, tau)[1]
    q, _, us, as_, rho = _pair(w, tau, s)
    r = -mdot_v(q, us)
    uq = mdot_v(u_tau, q)[:, None]
    uu = mdot_v(u_tau, us)[:, None]
    ua = mdot_v(u_tau, as_)[:, None]
    qa = mdot_v(q, as_)[:, None]
    r = r[:, None]
    vel = (us * uq - uu * q) / (r * r) * (1.0 + qa)
    acc = (as_ * uq - ua * q) / r
    return e * e * (vel + acc) / rho[:, None]


def combined_v(w: Worldline, tau: float, s: np.ndarray, e: float, state=None):
    """``(raw, counterterm, mass_rate_density)`` arrays for emission times ``s``."""
    if state is None:
        state = _field_state(w, tau)
    _, u_tau, a_tau, _ = state
    q, du, us, as_, rho = _pair(w, tau, s)
    r = -mdot_v(q, us)[:, None]
    uq = mdot_v(u_tau, q)[:, None]
    uu = mdot_v(u_tau, us)[:, None]
    ua = mdot_v(u_tau, as_)[:, None]
    qa = mdot_v(q, as_)[:, None]
    e2 = e * e
    raw = e2 * ((us * uq - uu * q) / (r * r) * (1.0 + qa) + (as_ * uq - ua * q) / r) / rho[:, None]
    ct = 0.5 * e2 * a_tau[None, :] / rho[:, None]
    mass = 0.5 * e2 * mdot_v(q, du) / rho**3
    return raw, ct, mass


def tail_density_v(w: Worldline, t1: float, s: np.ndarray, e: float, u1=None) -> np.ndarray:
    """``e^2 [-(q.u1) u_s + (u1.u_s) q] / rho^3`` with ``q = z(t1) - z(s)``, any order of times."""
    s = np.atleast_1d(np.asarray(s, float))
    if u1 is None:
        u1 = _field_state(w, t1)[1]
    q, _ = w.chord(np.full_like(s, t1), s)
    _, us, _, _ = w.arrays(s)
    rho = np.sqrt(np.maximum(-mdot_v(q, q), 0.0))
    num = -mdot_v(q, u1)[:, None] * us + mdot_v(u1, us)[:, None] * q
    return e * e * num / (rho**3)[:, None]


# ------------------------------------------------------------- public API


def force_density(w: Worldline, tau: float, s: float, e: float) -> MVec3:
    """Lorentz force density of the charge's own field emitted at ``s`` and felt at ``tau``."""
    if s >= tau:
        raise ValueError("emission time must precede the field time")
    return MVec3.of(raw_density_v(w, tau, np.array([s]), e)[0])


def abraham_limit(state: WorldlineState, e: float) -> MVec3:
    """Coincidence limit ``(2/3) e^2 (adot - a^2 u)`` of the combined integrand."""
    u = np.asarray(state.u, float)
    a = np.asarray(state.a, float)
    ad = np.asarray(state.adot, float)
    return MVec3.of(abraham_v(u, a, ad, e))


def abraham_v(u, a, adot, e: float) -> np.ndarray:
    a2 = mdot_v(a, a)
    return (2.0 / 3.0) * e * e * (adot - a2[..., None] * u if np.ndim(a2) else adot - a2 * u)


def combined_integrand(w: Worldline, tau: float, s: float, e: float) -> TailIntegrandSample:
    if s >= tau:
        raise ValueError("emission time must precede the field time")
    raw, ct, mass = combined_v(w, tau, np.array([s]), e)
    return TailIntegrandSample(float(s), MVec3.of(raw[0]), MVec3.of(ct[0]),
                               MVec3.of(raw[0] + ct[0]), float(mass[0]))


def mass_rate_density(w: Worldline, tau: float, s: float, e: float) -> float:
    if s >= tau:
        raise ValueError("emission time must precede the field time")
    return float(combined_v(w, tau, np.array([s]), e)[2][0])


def mass_rate_limit(w: Worldline, tau: float, e: float, delta: float = 1e-3) -> float:
    """Coincidence value of the mass-rate density by one-sided Richardson extrapolation."""
    d = np.array([delta, 0.5 * delta, 0.25 * delta])
    m = combined_v(w, tau, tau - d, e)[2]
    r1 = 2.0 * m[1] - m[0]
    r2 = 2.0 * m[2] - m[1]
    return float((4.0 * r2 - r1) / 3.0)


# --------------------------------------------------- straight prehistory


@dataclass(frozen=True)
class LineTerms:
    """Closed-form integrals over a straight past segment, seen from field time ``tau``.

    All quantities are per unit ``e^2`` except ``raw_force`` and ``mass_rate``.
    """

    raw_force: np.ndarray          # tail self-force of the segment
    mass_rate: float               # mass-rate integral over the segment
    tail_ret: np.ndarray           # integral of g(tau, s)
    tail_adv: np.ndarray           # integral of g(s, tau)
    log_rate: float                # d/dtau of the regularised integral of 1/rho
    log_value: float               # regularised integral of 1/rho


def line_terms(w: Worldline, line: Asymptote, tau: float, e: float) -> LineTerms:
    _, u_tau, _, _ = _field_state(w, tau)
    if tau <= line.tau:
        return line_terms_arrays(np.zeros(3), np.zeros(3), u_tau, line.u, e)
    kp, du = w.chord(tau, line.tau)
    return line_terms_arrays(kp[0], du[0], u_tau, line.u, e)


def line_terms_arrays(kp: np.ndarray, du: np.ndarray, u_tau: np.ndarray, ui: np.ndarray,
                      e: float) -> LineTerms:
    """:class:`LineTerms` from ``kp = z(tau) - z_anchor`` and ``du = u(tau) - u_line``."""
    zero = np.zeros(3)
    tp = -float(mdot_v(kp, ui))
    sp = math.sqrt(max(-float(mdot_v(kp, kp)), 0.0))
    if tp <= 0 or sp == 0:
        return LineTerms(zero, 0.0, zero, zero, 0.0, 0.0)
    j = 1.0 / (sp * (tp + sp))
    c = float(mdot_v(kp, u_tau))
    gam = -float(mdot_v(ui, u_tau))
    one_minus_gam = float(mdot_v(ui, du))
    e2 = e * e
    field = e * wedge_v(ui, kp) / (tp * (tp + sp))
    raw = lorentz_v(field, u_tau, e)
    mass = 0.5 * e2 * ((c + gam * tp) * j + one_minus_gam / sp)
    tail_ret = (-c * ui - gam * kp) * j
    tail_adv = (gam * ui - u_tau) / sp + gam * (kp - tp * ui) * j
    log_rate = (c + gam * tp) * j - gam / sp
    log_value = -math.log(tp + sp)
    return LineTerms(raw, mass, tail_ret, tail_adv, log_rate, log_value)


# ------------------------------------------------------------- self force


def _maxabs(v) -> float:
    return float(np.max(np.abs(v)))


def self_force(w: Worldline, tau: float, e: float, policy: Prehistory,
               quad_tol: float = 1e-9, initial_cut: float | None = None,
               min_cut: float = 1e-8) -> SelfForceResult:
    """Regularised tail self-force and mass rate at proper time ``tau``.

    The explicit history ``[s_far, tau - cut]`` is integrated adaptively.
    On the last ``cut`` of history the combined integrand is replaced by a
    quadratic in ``tau - s`` anchored at the coincidence limit and fitted to
    the two adjacent windows.  Close to coincidence the integrand loses about
    ``gamma^3 eps / (tau - s)^2`` to cancellation, so the cut starts at
    ``1e-2`` proper-acceleration lengths and shrinks only while the estimated
    series error keeps improving.
    """
    s_far, line = policy.start(w)
    state = _field_state(w, tau)
    _, u_tau, a_tau, ad_tau = state
    e2 = e * e
    force = np.zeros(3)
    mass_rate = 0.0
    err = 0.0
    if line is not None and tau > line.tau:
        lt = line_terms(w, line, tau, e)
        force = force + lt.raw_force
        mass_rate += lt.mass_rate
    length = tau - s_far
    if length <= 0:
        return SelfForceResult(MVec3.of(force), mass_rate, 0.0, 0.0)

    limit = abraham_v(u_tau, a_tau, ad_tau, e)
    amag = math.sqrt(max(mdot_v(a_tau, a_tau), 0.0))
    # the 1e-3 floor keeps unaccelerated charges from demanding a zero tolerance
    scale = e2 * max(_maxabs(a_tau), _maxabs(limit) * max(length, 1.0), 1e-3)

    def comb(s):
        raw, ct, mass = combined_v(w, tau, s, e, state)
        return np.column_stack([raw + ct, mass])

    lim4 = np.append(limit, 0.0)

    def window_series(cut):
        # fit L + c1 d + c2 d^2 (d = tau - s) to two adjacent windows
        i1, _ = integrate(comb, tau - 2 * cut, tau - cut, rtol=1e-12,
                          atol=1e-4 * quad_tol * scale * cut, strict=False)
        i2, _ = integrate(comb, tau - 3 * cut, tau - 2 * cut, rtol=1e-12,
                          atol=1e-4 * quad_tol * scale * cut, strict=False)
        b1 = (i1 - cut * lim4) / cut**2
        b2 = (i2 - cut * lim4) / cut**2
        det = 1.5 * 19.0 / 3.0 - 2.5 * 7.0 / 3.0
        c1 = (b1 * 19.0 / 3.0 - b2 * 7.0 / 3.0) / det
        c2 = (1.5 * b2 - 2.5 * b1) / det / cut
        value = cut * lim4 + 0.5 * c1 * cut**2 + c2 * cut**3 / 3.0
        return value, _maxabs(c2[:3]) * cut**3 / 3.0

    cut = initial_cut if initial_cut is not None else 1e-2 / max(1.0, amag)
    near_kinks = [tau - k for k in w.kinks if s_far < k < tau]
    cut = min(cut, 0.25 * min([length, *near_kinks]))
    series, series_err = window_series(cut)
    while series_err > 0.1 * quad_tol * scale and cut > min_cut:
        trial = max(cut * 0.25, min_cut)
        t_series, t_err = window_series(trial)
        if t_err >= series_err:
            break
        cut, series, series_err = trial, t_series, t_err
    if series_err > quad_tol * scale:
        raise SelfForceError(
            f"coincidence window unresolved at tau={tau}: series error {series_err:.3g}"
        )

    hi = tau - cut
    brk = [tau - cut * 10.0**k for k in range(1, 12) if tau - cut * 10.0**k > s_far]
    brk += [k for k in w.kinks if s_far < k < hi]
    val, qerr = integrate(comb, s_far, hi, rtol=quad_tol, atol=quad_tol * scale,
                          breakpoints=brk)
    val = val + series
    if log.isEnabledFor(logging.DEBUG):
        log.debug("tau=%.6g cut %.2e series error %.2e mass-rate density limit %.3e",
                  tau, cut, series_err, mass_rate_limit(w, tau, e, max(cut, 1e-4)))
    force = force + val[:3]
    mass_rate += float(val[3])
    err = qerr + series_err
    return SelfForceResult(MVec3.of(force), float(mass_rate), float(cut), float(err))


# ----------------------------------------------------------- tail forces


def tail_lorentz_force(w: Worldline, t1: float, e: float, direction: str = "retarded",
                       tau_obs: float | None = None, cutoff: float = 1e-3,
                       policy: Prehistory | None = None, quad_tol: float = 1e-10
                       ) -> tuple[MVec3, MVec3]:
    """Cut-off tail Lorentz force and the coefficient of its logarithmic divergence.

    Retarded: emission times ``s < t1 - cutoff`` (down to the prehistory
    limit).  Advanced: ``t1 + cutoff < s <= tau_obs``.  Near coincidence the
    integrand behaves like ``c / Delta`` with ``c = -e^2 a(t1) / 2``, so each
    direction alone grows like ``-c ln(cutoff)``; the second element returned
    is ``c``.  The two directions share ``c``, so their difference has a
    finite limit.
    """
    if cutoff <= 0:
        raise ValueError("cutoff must be positive")
    _, u1, a1, _ = _field_state(w, t1)
    coeff = -0.5 * e * e * a1
    f = lambda s: tail_density_v(w, t1, s, e, u1)  # noqa: E731
    if direction == "retarded":
        policy = policy or Prehistory.asymptote()
        s_far, line = policy.start(w)
        total = np.zeros(3)
        if line is not None and t1 > line.tau:
            total = total + e * e * line_terms(w, line, t1, e).tail_ret
        hi = t1 - cutoff
        if hi > s_far:
            brk = [k for k in w.kinks if s_far < k < hi]
            val, _ = integrate(f, s_far, hi, rtol=quad_tol, atol=quad_tol * e * e * _maxabs(a1),
                               breakpoints=brk)
            total = total + val
    elif direction == "advanced":
        if tau_obs is None or tau_obs < t1:
            raise ValueError("advanced tail force needs tau_obs >= t1")
        lo = t1 + cutoff
        total = np.zeros(3)
        if tau_obs > lo:
            brk = [k for k in w.kinks if lo < k < tau_obs]
            total, _ = integrate(f, lo, tau_obs, rtol=quad_tol,
                                 atol=quad_tol * e * e * _maxabs(a1), breakpoints=brk)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return MVec3.of(total), MVec3.of(coeff)


# ---------------------------------------------------------------- dumps

TAIL_COLUMNS = ["s", "raw0", "raw1", "raw2", "ct0", "ct1", "ct2",
                "comb0", "comb1", "comb2", "mass_rate_density"]


def tail_samples(w: Worldline, tau: float, s: np.ndarray, e: float) -> np.ndarray:
    s = np.asarray(s, float)
    if np.any(s >= tau):
        raise ValueError("emission times must precede the field time")
    raw, ct, mass = combined_v(w, tau, s, e)
    return np.column_stack([s, raw, ct, raw + ct, mass])


def dump_tail_csv(path: str | Path, w: Worldline, tau: float, s: np.ndarray, e: float) -> None:
    write_csv(path, TAIL_COLUMNS, tail_samples(w, tau, s, e))
