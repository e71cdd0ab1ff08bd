"""Forward integration of the dressed charge in an external field.

The self-action at node ``n`` is the combined tail integrand summed over the
earlier nodes by the trapezoid rule, with the Abraham vector as the value at
the live end.  The counterterm and the live-end jerk are linear in the
unknown acceleration, so each evaluation solves

    (m - (e^2/2) I_n - kappa) a_n = P_u [F_ext + S_n + history jerk terms]

where ``I_n`` is the trapezoid sum of ``1/rho`` and ``P_u`` projects out the
velocity (every term of the exact equation is orthogonal to ``u``).  Steps
are predictor / corrector with a Hermite update; the dynamical mass follows
the trapezoid rule on the mass-rate sums.  Cost is O(N) per step.
"""
from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import FieldStrength, MVec3, lorentz_v, mdot_v, unit_velocity
from .selfforce import Prehistory, line_terms_arrays
from .worldline import Asymptote, TabulatedWorldline, write_csv

log = logging.getLogger(__name__)


class NumericalError(RuntimeError):
    """The integrator could not continue (mass crossed zero, step rejected, ...)."""


@dataclass(frozen=True)
class ExternalField:
    """Constant field switched on over ``[tau_on, tau_off]`` (``kind='none'`` for no field)."""

    kind: str = "none"
    F: FieldStrength = FieldStrength(0.0, 0.0, 0.0)
    tau_on: float = 0.0
    tau_off: float = math.inf

    def __post_init__(self):
        if self.kind not in ("constant", "none"):
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.tau_on > self.tau_off:
            raise ValueError("tau_on must not exceed tau_off")

    @classmethod
    def constant(cls, e1: float, e2: float = 0.0, h: float = 0.0,
                 tau_on: float = 0.0, tau_off: float = math.inf) -> ExternalField:
        return cls("constant", FieldStrength(e1, e2, h), tau_on, tau_off)

    def active(self, tau) -> np.ndarray:
        tau = np.asarray(tau, float)
        if self.kind == "none":
            return np.zeros(tau.shape, bool)
        return (tau >= self.tau_on) & (tau <= self.tau_off)

    def force(self, tau, u, e: float) -> np.ndarray:
        """Lorentz force ``e F^{mu a} u_a`` (zero outside the window)."""
        u = np.asarray(u, float)
        f = lorentz_v(np.asarray(self.F, float), u, e)
        return np.where(self.active(tau)[..., None], f, 0.0)


@dataclass(frozen=True)
class SimConfig:
    e: float
    m0: float
    h: float
    tau_end: float
    field: ExternalField = field(default_factory=ExternalField)
    prehistory: str = "asymptote"
    selfforce: bool = True
    quad_tol: float = 1e-9
    coarsen: bool = False
    x0: tuple[float, float] = (0.0, 0.0)
    v0: tuple[float, float] = (0.0, 0.0)
    config_hash: str = ""

    def __post_init__(self):
        if not (self.m0 > 0):
            raise ValueError("m0 must be positive")
        if not (self.h > 0) or not (self.tau_end > 0):
            raise ValueError("h and tau_end must be positive")
        if self.prehistory not in ("asymptote", "static", "uniform", "truncate"):
            raise ValueError(f"unknown prehistory {self.prehistory!r}")
        if self.prehistory == "static" and any(self.v0):
            raise ValueError("static prehistory needs zero initial velocity")
        if self.coarsen:
            raise ValueError("history coarsening is not supported")
        if not (0 < self.quad_tol <= 1e-2):
            raise ValueError("quad_tol must lie in (0, 1e-2]")

    @property
    def steps(self) -> int:
        n = self.tau_end / self.h
        k = int(round(n))
        if abs(n - k) > 1e-9 * max(1.0, n):
            raise ValueError("tau_end must be a whole number of steps")
        return k

    def policy(self) -> Prehistory:
        if self.prehistory == "truncate":
            return Prehistory.truncate(0.0)
        return Prehistory.asymptote()

    def digest(self) -> str:
        return self.config_hash or hashlib.sha256(repr(self).encode()).hexdigest()


@dataclass(frozen=True)
class ParticleState:
    tau: float
    z: MVec3
    u: MVec3
    m: float
    p_part: MVec3


TRACE_COLUMNS = (["tau", "z0", "z1", "z2", "u0", "u1", "u2", "m", "F_self0", "F_self1",
                  "F_self2", "mdot", "quad_err", "a0", "a1", "a2"])


@dataclass
class SimulationTrace:
    config: SimConfig
    tau: np.ndarray
    z: np.ndarray
    u: np.ndarray
    a: np.ndarray
    m: np.ndarray
    f_self: np.ndarray
    mdot: np.ndarray
    quad_err: np.ndarray
    p_part: np.ndarray
    complete: bool = True

    def __len__(self) -> int:
        return len(self.tau)

    def states(self) -> list[ParticleState]:
        return [ParticleState(float(t), MVec3.of(z), MVec3.of(u), float(m), MVec3.of(p))
                for t, z, u, m, p in zip(self.tau, self.z, self.u, self.m, self.p_part)]

    def external_force(self) -> np.ndarray:
        return self.config.field.force(self.tau, self.u, self.config.e)

    def worldline(self) -> TabulatedWorldline:
        past = None if self.config.prehistory == "truncate" else "uniform"
        return TabulatedWorldline(self.tau, self.z, self.u, self.a, past=past)

    def rows(self) -> np.ndarray:
        return np.column_stack([self.tau, self.z, self.u, self.m, self.f_self, self.mdot,
                                self.quad_err, self.a])

    def to_csv(self, path: str | Path) -> None:
        write_csv(path, TRACE_COLUMNS, self.rows())


# ----------------------------------------------------------------- helpers


def _project(v: np.ndarray, u: np.ndarray) -> np.ndarray:
    return v + float(mdot_v(v, u)) * u


def _renormalise(u: np.ndarray) -> np.ndarray:
    return unit_velocity(u[1:])


class _History:
    """Node arrays grown in place, with the trapezoid sums used by the integrator."""

    def __init__(self, cfg: SimConfig, n_max: int):
        self.cfg = cfg
        self.h = cfg.h
        self.e2 = cfg.e * cfg.e
        self.tau = cfg.h * np.arange(n_max)
        self.z = np.zeros((n_max, 3))
        self.u = np.zeros((n_max, 3))
        self.a = np.zeros((n_max, 3))
        self.m = np.zeros(n_max)
        self.mdot = np.zeros(n_max)
        self.f_self = np.zeros((n_max, 3))
        self.quad_err = np.zeros(n_max)
        self.p_part = np.zeros((n_max, 3))
        self.line: Asymptote | None = None
        self.n = 0

    def geometry(self, n: int, z: np.ndarray, u: np.ndarray):
        """Sums over nodes ``0..n-1`` for a candidate state at node ``n``."""
        h, e2 = self.h, self.e2
        Z, U, A = self.z[:n], self.u[:n], self.a[:n]
        q = z - Z
        du = u - U
        rho = np.sqrt(np.maximum(-mdot_v(q, q), 0.0))
        wts = np.full(n, h)
        if n:
            wts[0] = 0.5 * h
        r = -mdot_v(q, U)
        uq = mdot_v(u, q)
        uu = mdot_v(u, U)
        ua = mdot_v(u, A)
        qa = mdot_v(q, A)
        raw = ((U * uq[:, None] - uu[:, None] * q) * ((1.0 + qa) / (r * r))[:, None]
               + (A * uq[:, None] - ua[:, None] * q) / r[:, None]) * (e2 / rho)[:, None]
        inv = 1.0 / rho
        mass = 0.5 * e2 * mdot_v(q, du) * inv**3
        return {
            "wts": wts, "raw": raw, "inv": inv, "mass": mass, "du": du,
            "S": wts @ raw, "I": float(wts @ inv), "M": float(wts @ mass),
        }

    def line_terms(self, z, u):
        if self.line is None:
            return None
        return line_terms_arrays(z - self.line.z, u - self.line.u, u, self.line.u,
                                 self.cfg.e)

    def mass_rate(self, n, geo, lt) -> float:
        if not self.cfg.selfforce:
            return 0.0
        out = geo["M"] if n > 0 else 0.0
        if lt is not None:
            out += lt.mass_rate
        return out

    def solve(self, n: int, z, u, m, geo, lt):
        """Acceleration and self-force at node ``n`` for the given state and mass."""
        cfg, e2, h = self.cfg, self.e2, self.h
        f_ext = cfg.field.force(self.tau[n], u, cfg.e)
        if not cfg.selfforce:
            return _project(f_ext, u) / m, np.zeros(3), 0.0
        rhs = f_ext.copy()
        coeff = m
        if lt is not None:
            rhs += lt.raw_force
        if n >= 1:
            rhs += geo["S"]
            coeff -= 0.5 * e2 * geo["I"]
        if n == 0 and lt is not None:
            # a straight past seen from its own end: the line force tends to
            # e^2 a / 4 as tau -> 0+, so the onset acceleration carries it
            coeff -= 0.25 * e2
        if n >= 2:
            kappa = 0.5 * e2
            rhs += 0.5 * e2 * (-(4.0 / 3.0) * self.a[n - 1] + (1.0 / 3.0) * self.a[n - 2])
        elif n == 1:
            kappa = e2 / 3.0
            rhs += -(e2 / 3.0) * self.a[0]
        else:
            kappa = 0.0
        coeff -= kappa
        if coeff <= 0:
            raise NumericalError(f"effective inertia non-positive at tau={self.tau[n]:.6g}")
        a = _project(rhs, u) / coeff
        f_self, err = self._self_force(n, u, a, geo, lt)
        return a, f_self, err

    def _jerk(self, n: int, a: np.ndarray) -> np.ndarray:
        h = self.h
        if n >= 2:
            return (3.0 * a - 4.0 * self.a[n - 1] + self.a[n - 2]) / (2.0 * h)
        if n == 1:
            return (a - self.a[0]) / h
        return np.zeros(3)

    def _self_force(self, n, u, a, geo, lt):
        e2, h = self.e2, self.h
        f = np.zeros(3) if lt is None else lt.raw_force.copy()
        if n == 0:
            if lt is not None:
                f = f + 0.25 * e2 * a
            return f, 0.0
        ad = self._jerk(n, a)
        limit = (2.0 / 3.0) * e2 * (ad - float(mdot_v(a, a)) * u)
        comb = geo["raw"] + 0.5 * e2 * np.outer(geo["inv"], a)
        fine = geo["wts"] @ comb + 0.5 * h * limit
        f += fine
        err = 0.0
        if n >= 4 and n % 2 == 0:
            idx = np.arange(0, n, 2)
            w2 = np.full(len(idx), 2 * h)
            w2[0] = h
            coarse = w2 @ comb[idx] + h * limit
            err = float(np.max(np.abs(fine - coarse))) / 3.0
        elif n >= 4:
            err = float(self.quad_err[n - 1])
        return f, err

    def dressed(self, n, u, a, m, geo) -> np.ndarray:
        p = m * u
        if self.cfg.selfforce and n > 0:
            s = geo["wts"] @ (-geo["du"] * geo["inv"][:, None]) - 0.5 * self.h * a
            p = p + 0.5 * self.e2 * s
        return p

    def store(self, n, z, u, a, m, mdot, f_self, err, p_part):
        self.z[n], self.u[n], self.a[n] = z, u, a
        self.m[n], self.mdot[n], self.f_self[n] = m, mdot, f_self
        self.quad_err[n], self.p_part[n] = err, p_part
        self.n = n + 1


# -------------------------------------------------------------- simulate


def simulate(cfg: SimConfig, progress=None) -> SimulationTrace:
    """Integrate from ``tau = 0`` to ``tau_end`` with fixed step ``h``.

    On a numerical failure the partial trace is attached to the raised
    :class:`NumericalError` as ``exc.trace``.
    """
    n_steps = cfg.steps
    hist = _History(cfg, n_steps + 1)
    h = cfg.h
    z0 = np.array([0.0, cfg.x0[0], cfg.x0[1]])
    u0 = unit_velocity(np.array(cfg.v0, float))
    if cfg.policy().kind == "asymptote":
        hist.line = Asymptote.line(0.0, z0, u0)
    log.info("simulate: e=%g m0=%g h=%g steps=%d prehistory=%s selfforce=%s",
             cfg.e, cfg.m0, h, n_steps, cfg.prehistory, cfg.selfforce)
    log.info("the dynamical mass enters the acceleration solve at the current node")

    try:
        geo = hist.geometry(0, z0, u0)
        lt = hist.line_terms(z0, u0)
        mdot0 = hist.mass_rate(0, geo, lt)
        a0, f0, err0 = hist.solve(0, z0, u0, cfg.m0, geo, lt)
        hist.store(0, z0, u0, a0, cfg.m0, mdot0, f0, err0, hist.dressed(0, u0, a0, cfg.m0, geo))

        for n in range(n_steps):
            _step(hist, n)
            if progress is not None:
                progress(n + 1, n_steps)
    except NumericalError as exc:
        exc.trace = _trace(cfg, hist, complete=False)
        raise
    return _trace(cfg, hist, complete=True)


def _step(hist: _History, n: int) -> None:
    h = hist.h
    z, u, a, m = hist.z[n], hist.u[n], hist.a[n], hist.m[n]
    ad = hist._jerk(n, a) if n >= 1 else np.zeros(3)
    k = n + 1

    # predictor: Taylor step with the last jerk estimate
    u_p = _renormalise(u + h * a + 0.5 * h * h * ad)
    z_p = z + h * u + 0.5 * h * h * a + h**3 / 6.0 * ad
    m_p = m + h * hist.mdot[n]
    geo = hist.geometry(k, z_p, u_p)
    a_p, _, _ = hist.solve(k, z_p, u_p, m_p, geo, hist.line_terms(z_p, u_p))

    # corrector: Hermite update with the predicted end acceleration
    ad_p = hist._jerk(k, a_p)
    u_c = u + 0.5 * h * (a + a_p) + h * h / 12.0 * (ad - ad_p)
    z_c = z + 0.5 * h * (u + u_c) + h * h / 12.0 * (a - a_p)
    u_c = _renormalise(u_c)
    gap = float(np.max(np.abs(u_c - u_p)))
    scale = 1.0 + float(np.max(np.abs(a)))
    if gap > 100.0 * h * h * scale:
        raise NumericalError(
            f"step rejected at tau={hist.tau[k]:.6g}: corrector-predictor gap {gap:.3g}"
        )

    geo = hist.geometry(k, z_c, u_c)
    lt = hist.line_terms(z_c, u_c)
    mdot = hist.mass_rate(k, geo, lt)
    m_new = m + 0.5 * h * (hist.mdot[n] + mdot)
    if not (m_new > 0):
        raise NumericalError(f"dynamical mass reached {m_new:.6g} at tau={hist.tau[k]:.6g}")
    a_c, f_self, err = hist.solve(k, z_c, u_c, m_new, geo, lt)
    hist.store(k, z_c, u_c, a_c, m_new, mdot, f_self, err,
               hist.dressed(k, u_c, a_c, m_new, geo))


def _trace(cfg: SimConfig, hist: _History, complete: bool) -> SimulationTrace:
    n = hist.n
    return SimulationTrace(
        config=cfg, tau=hist.tau[:n].copy(), z=hist.z[:n].copy(), u=hist.u[:n].copy(),
        a=hist.a[:n].copy(), m=hist.m[:n].copy(), f_self=hist.f_self[:n].copy(),
        mdot=hist.mdot[:n].copy(), quad_err=hist.quad_err[:n].copy(),
        p_part=hist.p_part[:n].copy(), complete=complete,
    )


# ------------------------------------------------------------ analysis


@dataclass(frozen=True)
class AccelerationFit:
    mean: float
    max_deviation: float
    nodes: int


def fit_effective_acceleration(trace: SimulationTrace, window: tuple[float, float]) -> AccelerationFit:
    """Least-squares constant fit of the proper acceleration over ``window``."""
    lo, hi = window
    sel = (trace.tau >= lo) & (trace.tau <= hi)
    if sel.sum() < 10:
        raise ValueError("window holds fewer than 10 nodes")
    a = trace.a[sel]
    mag = np.sqrt(np.maximum(mdot_v(a, a), 0.0))
    mean = float(np.mean(mag))
    return AccelerationFit(mean, float(np.max(np.abs(mag - mean))), int(sel.sum()))
