"""Worldline families, state evaluation and light-cone root finding.

Every worldline exposes a vectorised ``arrays(tau)`` returning positions,
velocities, accelerations and jerks as ``(n, 3)`` arrays, plus ``chord`` which
returns ``z(t1) - z(t2)`` and ``u(t1) - u(t2)`` without the catastrophic
cancellation of a plain subtraction.  History integrals rely on ``chord``
when the two proper times are close.

A worldline may carry straight-line asymptotes: ``past`` describes the motion
before ``past.tau`` and ``future`` the motion after ``future.tau``.  History
integrals split at these points and use closed forms on the straight parts.
"""
from __future__ import annotations

import csv
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .geometry import MVec3, mdot_v

_EPS = np.finfo(float).eps


class DomainError(ValueError):
    """Proper time outside the region where the worldline is known."""


class RootError(RuntimeError):
    """No light-cone crossing could be located."""


@dataclass(frozen=True)
class WorldlineState:
    tau: float
    z: MVec3
    u: MVec3
    a: MVec3
    adot: MVec3

    @classmethod
    def from_arrays(cls, tau: float, z, u, a, adot) -> WorldlineState:
        return cls(float(tau), MVec3.of(z), MVec3.of(u), MVec3.of(a), MVec3.of(adot))


@dataclass(frozen=True)
class Asymptote:
    """Straight-line motion ``z(s) = z + u (s - tau)`` beyond the anchor ``tau``.

    ``kind`` is ``"static"`` when ``u`` is the rest velocity and ``"uniform"``
    otherwise.
    """

    kind: str
    tau: float
    z: np.ndarray
    u: np.ndarray

    @classmethod
    def line(cls, tau: float, z, u) -> Asymptote:
        z = np.asarray(z, dtype=float).copy()
        u = np.asarray(u, dtype=float).copy()
        kind = "static" if np.allclose(u, [1.0, 0.0, 0.0], rtol=0, atol=1e-15) else "uniform"
        return cls(kind, float(tau), z, u)

    def position(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return self.z + np.multiply.outer(s - self.tau, self.u)


class Worldline(ABC):
    """Timelike trajectory parametrised by proper time."""

    past: Asymptote | None = None
    future: Asymptote | None = None
    tau_min: float = -math.inf
    tau_max: float = math.inf
    kinks: tuple[float, ...] = ()

    @abstractmethod
    def _arrays(self, tau: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Return ``z, u, a, adot`` for a 1-D array of proper times."""

    def arrays(self, tau) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        if tau.size and (tau.min() < self.tau_min or tau.max() > self.tau_max):
            raise DomainError(
                f"proper time outside [{self.tau_min}, {self.tau_max}]: "
                f"[{tau.min()}, {tau.max()}]"
            )
        return self._arrays(tau)

    def eval(self, tau: float) -> WorldlineState:
        z, u, a, ad = self.arrays(np.array([tau]))
        return WorldlineState.from_arrays(tau, z[0], u[0], a[0], ad[0])

    def position(self, tau) -> np.ndarray:
        return self.arrays(tau)[0]

    def chord(self, t1, t2) -> tuple[np.ndarray, np.ndarray]:
        """``(z(t1) - z(t2), u(t1) - u(t2))`` for broadcastable proper times."""
        t1, t2 = np.broadcast_arrays(np.atleast_1d(np.asarray(t1, float)),
                                     np.atleast_1d(np.asarray(t2, float)))
        z1, u1, _, _ = self.arrays(t1.ravel())
        z2, u2, _, _ = self.arrays(t2.ravel())
        shape = t1.shape + (3,)
        return (z1 - z2).reshape(shape), (u1 - u2).reshape(shape)

    def proper_time_at(self, t: float) -> float:
        """Proper time at which the coordinate time ``z0`` equals ``t``."""

        def fun(tau):
            z, u, _, _ = self.arrays(np.array([tau]))
            return z[0, 0] - t, u[0, 0]

        lo, hi = _bracket(fun, t, increasing=True, lo_limit=self.tau_min, hi_limit=self.tau_max)
        return _newton(fun, lo, hi, xtol=4 * _EPS * (1 + abs(t)))

    @property
    def asymptotic_regime(self) -> tuple[str, float | None]:
        if self.past is None:
            return ("none", None)
        return (f"{self.past.kind}-before", self.past.tau)


# ------------------------------------------------------------- families


class StaticWorldline(Worldline):
    """Charge at rest at ``(x0, y0)``; ``z0 = tau + c0``.

    ``tau_pre`` sets where the explicit history begins; ``None`` treats the
    whole worldline as its own asymptote, so fields come out in closed form.
    """

    def __init__(self, x0: float = 0.0, y0: float = 0.0, c0: float = 0.0,
                 tau_pre: float | None = None, tau_post: float | None = None):
        self.x0, self.y0, self.c0 = float(x0), float(y0), float(c0)
        u = np.array([1.0, 0.0, 0.0])
        tp = math.inf if tau_pre is None else float(tau_pre)
        tq = -math.inf if tau_post is None else float(tau_post)
        self.past = Asymptote("static", tp, self._pos(tp), u)
        self.future = Asymptote("static", tq, self._pos(tq), u)

    def _pos(self, tau: float) -> np.ndarray:
        # anchors at +-inf are never evaluated as positions; keep them finite
        t = 0.0 if math.isinf(tau) else tau
        return np.array([t + self.c0, self.x0, self.y0])

    def _arrays(self, tau):
        n = len(tau)
        z = np.column_stack([tau + self.c0, np.full(n, self.x0), np.full(n, self.y0)])
        u = np.tile([1.0, 0.0, 0.0], (n, 1))
        zero = np.zeros((n, 3))
        return z, u, zero, zero.copy()

    def chord(self, t1, t2):
        t1, t2 = np.broadcast_arrays(np.atleast_1d(np.asarray(t1, float)),
                                     np.atleast_1d(np.asarray(t2, float)))
        dz = np.zeros(t1.shape + (3,))
        dz[..., 0] = t1 - t2
        return dz, np.zeros_like(dz)

    def proper_time_at(self, t):
        return float(t) - self.c0


class UniformWorldline(Worldline):
    """``z(tau) = z0 + u tau`` with constant unit velocity ``u``."""

    def __init__(self, z0, u, tau_pre: float | None = None, tau_post: float | None = None):
        self.z0 = np.asarray(z0, dtype=float).reshape(3)
        u = np.asarray(u, dtype=float).reshape(3)
        if abs(mdot_v(u, u) + 1.0) > 1e-9 or u[0] <= 0:
            raise ValueError("u must be a future-pointing unit timelike vector")
        self.u = u
        tp = math.inf if tau_pre is None else float(tau_pre)
        tq = -math.inf if tau_post is None else float(tau_post)
        self.past = Asymptote.line(tp, self._anchor(tp), u)
        self.future = Asymptote.line(tq, self._anchor(tq), u)

    @classmethod
    def boosted(cls, beta: float, angle: float = 0.0, z0=(0.0, 0.0, 0.0), **kw) -> UniformWorldline:
        g = 1.0 / math.sqrt(1.0 - beta * beta)
        u = np.array([g, g * beta * math.cos(angle), g * beta * math.sin(angle)])
        return cls(z0, u, **kw)

    def _anchor(self, tau: float) -> np.ndarray:
        t = 0.0 if math.isinf(tau) else tau
        return self.z0 + self.u * t

    def _arrays(self, tau):
        n = len(tau)
        z = self.z0 + np.outer(tau, self.u)
        u = np.tile(self.u, (n, 1))
        zero = np.zeros((n, 3))
        return z, u, zero, zero.copy()

    def chord(self, t1, t2):
        t1, t2 = np.broadcast_arrays(np.atleast_1d(np.asarray(t1, float)),
                                     np.atleast_1d(np.asarray(t2, float)))
        dz = np.multiply.outer(t1 - t2, self.u)
        return dz, np.zeros_like(dz)

    def proper_time_at(self, t):
        return (float(t) - self.z0[0]) / self.u[0]


class HyperbolicWorldline(Worldline):
    """Constant proper acceleration along x starting from rest at the origin.

    ``z = (sinh(a tau)/a, (cosh(a tau) - 1)/a, 0)``.  With
    ``static_before=True`` the charge sits at the origin for ``tau < 0`` and
    the hyperbolic branch starts there.
    """

    def __init__(self, accel: float, static_before: bool = False):
        if accel == 0:
            raise ValueError("use StaticWorldline for zero acceleration")
        self.accel = float(accel)
        self.static_before = bool(static_before)
        if self.static_before:
            self.past = Asymptote("static", 0.0, np.zeros(3), np.array([1.0, 0.0, 0.0]))
            self.kinks = (0.0,)

    def _arrays(self, tau):
        a = self.accel
        x = a * (np.maximum(tau, 0.0) if self.static_before else tau)
        ch, sh = np.cosh(x), np.sinh(x)
        z = np.column_stack([sh / a, (ch - 1.0) / a, np.zeros_like(x)])
        u = np.column_stack([ch, sh, np.zeros_like(x)])
        acc = a * np.column_stack([sh, ch, np.zeros_like(x)])
        jerk = a * a * u
        if self.static_before:
            pre = tau < 0
            if pre.any():
                z[pre] = np.column_stack([tau[pre], np.zeros(pre.sum()), np.zeros(pre.sum())])
                u[pre] = [1.0, 0.0, 0.0]
                acc[pre] = 0.0
                jerk[pre] = 0.0
        return z, u, acc, jerk

    def _branch_chord(self, t1, t2):
        a = self.accel
        m = 0.5 * a * (t1 + t2)
        s = np.sinh(0.5 * a * (t1 - t2))
        dz = np.zeros(t1.shape + (3,))
        du = np.zeros_like(dz)
        dz[..., 0] = 2.0 / a * np.cosh(m) * s
        dz[..., 1] = 2.0 / a * np.sinh(m) * s
        du[..., 0] = 2.0 * np.sinh(m) * s
        du[..., 1] = 2.0 * np.cosh(m) * s
        return dz, du

    def chord(self, t1, t2):
        t1, t2 = np.broadcast_arrays(np.atleast_1d(np.asarray(t1, float)),
                                     np.atleast_1d(np.asarray(t2, float)))
        if not self.static_before:
            return self._branch_chord(t1, t2)
        # split through the junction at tau = 0 so each piece stays stable
        c1 = np.maximum(t1, 0.0)
        c2 = np.maximum(t2, 0.0)
        dz, du = self._branch_chord(c1, c2)
        dz[..., 0] += (t1 - c1) - (t2 - c2)
        return dz, du

    def proper_time_at(self, t):
        t = float(t)
        if self.static_before and t < 0:
            return t
        return math.asinh(self.accel * t) / self.accel


class CircularWorldline(Worldline):
    """Uniform circular motion of radius ``R`` and coordinate angular speed ``omega``."""

    def __init__(self, radius: float, omega: float, phase: float = 0.0):
        if abs(radius * omega) >= 1:
            raise ValueError("orbital speed must be below 1")
        self.radius, self.omega, self.phase = float(radius), float(omega), float(phase)
        self.gamma = 1.0 / math.sqrt(1.0 - (radius * omega) ** 2)

    def _arrays(self, tau):
        R, w, g = self.radius, self.omega, self.gamma
        p = w * g * tau + self.phase
        c, s = np.cos(p), np.sin(p)
        one = np.ones_like(tau)
        z = np.column_stack([g * tau, R * c, R * s])
        u = np.column_stack([g * one, -R * w * g * s, R * w * g * c])
        acc = np.column_stack([0 * one, -R * (w * g) ** 2 * c, -R * (w * g) ** 2 * s])
        jerk = np.column_stack([0 * one, R * (w * g) ** 3 * s, -R * (w * g) ** 3 * c])
        return z, u, acc, jerk

    def chord(self, t1, t2):
        t1, t2 = np.broadcast_arrays(np.atleast_1d(np.asarray(t1, float)),
                                     np.atleast_1d(np.asarray(t2, float)))
        R, w, g = self.radius, self.omega, self.gamma
        k = w * g
        pm = 0.5 * k * (t1 + t2) + self.phase
        sh = np.sin(0.5 * k * (t1 - t2))
        dz = np.zeros(t1.shape + (3,))
        du = np.zeros_like(dz)
        dz[..., 0] = g * (t1 - t2)
        dz[..., 1] = -2.0 * R * np.sin(pm) * sh
        dz[..., 2] = 2.0 * R * np.cos(pm) * sh
        du[..., 1] = -2.0 * R * k * np.cos(pm) * sh
        du[..., 2] = -2.0 * R * k * np.sin(pm) * sh
        return dz, du

    def proper_time_at(self, t):
        return float(t) / self.gamma


class RampWorldline(Worldline):
    """Rectilinear motion with ``u1 = b tau``: constant coordinate force, non-stationary.

    Unlike the hyperbola and the circle its tail integrals do not share a
    time-translation symmetry, so the mass-rate integral is nonzero here.
    """

    def __init__(self, b: float):
        if b == 0:
            raise ValueError("b must be nonzero")
        self.b = float(b)

    def _arrays(self, tau):
        b = self.b
        s = np.sqrt(1.0 + (b * tau) ** 2)
        zero = np.zeros_like(tau)
        z = np.column_stack([0.5 * (tau * s + np.arcsinh(b * tau) / b), 0.5 * b * tau**2, zero])
        u = np.column_stack([s, b * tau, zero])
        acc = np.column_stack([b * b * tau / s, b + zero, zero])
        jerk = np.column_stack([b * b / s**3, zero, zero])
        return z, u, acc, jerk

    def chord(self, t1, t2):
        t1, t2 = np.broadcast_arrays(np.atleast_1d(np.asarray(t1, float)),
                                     np.atleast_1d(np.asarray(t2, float)))
        b = self.b
        x1, x2 = b * t1, b * t2
        s1, s2 = np.sqrt(1 + x1 * x1), np.sqrt(1 + x2 * x2)
        dt = t1 - t2
        ds = b * b * dt * (t1 + t2) / (s1 + s2)
        same = x1 * x2 > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            rat = (x1 - x2) * (x1 + x2) / (x1 * s2 + x2 * s1)
        arg = np.where(same, rat, x1 * s2 - x2 * s1)
        arg = np.where(dt == 0, 0.0, arg)
        dz = np.zeros(t1.shape + (3,))
        du = np.zeros_like(dz)
        dz[..., 0] = 0.5 * (dt * s1 + t2 * ds + np.arcsinh(arg) / b)
        dz[..., 1] = 0.5 * b * dt * (t1 + t2)
        du[..., 0] = ds
        du[..., 1] = b * dt
        return dz, du


# ------------------------------------------------------------ tabulated


def _hermite5(h, p0, v0, a0, p1, v1, a1):
    """Coefficients c1..c5 of the quintic matching value/slope/curvature at both ends.

    The constant term ``p0`` is left out so that differences inside a
    segment cancel it exactly.
    """
    d = p1 - p0
    c1 = v0 * h
    c2 = 0.5 * a0 * h * h
    r0 = d - c1 - c2
    r1 = (v1 - v0) * h - a0 * h * h
    r2 = (a1 - a0) * h * h
    c3 = 10 * r0 - 4 * r1 + 0.5 * r2
    c4 = -15 * r0 + 7 * r1 - r2
    c5 = 6 * r0 - 3 * r1 + 0.5 * r2
    return np.stack([c1, c2, c3, c4, c5], axis=1)


class TranslatedWorldline(Worldline):
    """``w`` shifted rigidly by the constant spacetime vector ``offset``."""

    def __init__(self, w: Worldline, offset):
        self.base = w
        self.offset = np.asarray(offset, dtype=float).reshape(3)
        self.tau_min, self.tau_max, self.kinks = w.tau_min, w.tau_max, w.kinks
        self.past = self._shift(w.past)
        self.future = self._shift(w.future)

    def _shift(self, line: Asymptote | None) -> Asymptote | None:
        if line is None:
            return None
        return Asymptote(line.kind, line.tau, line.z + self.offset, line.u)

    def _arrays(self, tau):
        z, u, a, ad = self.base._arrays(tau)
        return z + self.offset, u, a, ad

    def chord(self, t1, t2):
        return self.base.chord(t1, t2)


class TabulatedWorldline(Worldline):
    """Worldline interpolated through nodes ``(tau, z, u, a)``.

    Positions use a quintic Hermite interpolant matching ``z``, ``u`` and ``a``
    at the nodes; ``u``, ``a`` and the jerk are its derivatives, the jerk taken
    from the segment on the left at interior nodes.  Without
    stored accelerations they are estimated from ``u`` by second-order finite
    differences.  Before the first node an optional ``past`` asymptote
    continues the motion in a straight line.
    """

    def __init__(self, tau, z, u, a=None, *, past: str | None = None,
                 kinks: Iterable[float] = ()):
        self._set(np.asarray(tau, float), np.asarray(z, float), np.asarray(u, float),
                  None if a is None else np.asarray(a, float))
        self._past_kind = past
        self.kinks = tuple(float(k) for k in kinks)
        self._attach_past()

    def _set(self, tau, z, u, a):
        if tau.ndim != 1 or len(tau) < 3:
            raise ValueError("need at least three nodes")
        if np.any(np.diff(tau) <= 0):
            raise ValueError("node proper times must increase strictly")
        if a is None:
            a = np.gradient(u, tau, axis=0, edge_order=2)
        self.tau_nodes = tau
        self.z_nodes = z.reshape(-1, 3)
        self.u_nodes = u.reshape(-1, 3)
        self.a_nodes = a.reshape(-1, 3)
        h = np.diff(tau)[:, None]
        zn, un, an = self.z_nodes, self.u_nodes, self.a_nodes
        self._coef = _hermite5(h, zn[:-1], un[:-1], an[:-1], zn[1:], un[1:], an[1:])
        self.tau_max = float(tau[-1])
        self.tau_min = -math.inf if getattr(self, "_past_kind", None) else float(tau[0])

    def _attach_past(self):
        if self._past_kind is None:
            self.past = None
            self.tau_min = float(self.tau_nodes[0])
            return
        if self._past_kind not in ("static", "uniform"):
            raise ValueError(f"unknown asymptote kind {self._past_kind!r}")
        self.past = Asymptote.line(self.tau_nodes[0], self.z_nodes[0], self.u_nodes[0])
        self.tau_min = -math.inf

    def append(self, tau: float, z, u, a) -> None:
        """Add a node past the current horizon."""
        if tau <= self.tau_nodes[-1]:
            raise ValueError("appended node must extend the horizon")
        self._set(np.append(self.tau_nodes, tau), np.vstack([self.z_nodes, z]),
                  np.vstack([self.u_nodes, u]), np.vstack([self.a_nodes, a]))
        self._attach_past()

    def _locate(self, tau):
        j = np.searchsorted(self.tau_nodes, tau, side="right") - 1
        return np.clip(j, 0, len(self.tau_nodes) - 2)

    def _local(self, tau):
        j = self._locate(tau)
        h = self.tau_nodes[j + 1] - self.tau_nodes[j]
        th = (tau - self.tau_nodes[j]) / h
        return j, h, th

    def _poly(self, j, th):
        c = self._coef[j]                     # (n, 5, 3)
        powers = np.stack([th, th**2, th**3, th**4, th**5], axis=1)
        return np.einsum("nk,nkd->nd", powers, c)

    def _arrays(self, tau):
        n = len(tau)
        z = np.empty((n, 3))
        u = np.empty((n, 3))
        a = np.empty((n, 3))
        ad = np.empty((n, 3))
        pre = tau < self.tau_nodes[0]
        if pre.any():
            line = self.past
            z[pre] = line.position(tau[pre])
            u[pre] = line.u
            a[pre] = 0.0
            ad[pre] = 0.0
        body = ~pre
        if body.any():
            t = tau[body]
            j, h, th = self._local(t)
            c = self._coef[j]
            hh = h[:, None]
            p1 = np.stack([np.ones_like(th), 2 * th, 3 * th**2, 4 * th**3, 5 * th**4], axis=1)
            p2 = np.stack([np.zeros_like(th), 2 + 0 * th, 6 * th, 12 * th**2, 20 * th**3], axis=1)
            z[body] = self.z_nodes[j] + self._poly(j, th)
            u[body] = np.einsum("nk,nkd->nd", p1, c) / hh
            a[body] = np.einsum("nk,nkd->nd", p2, c) / hh**2
            # jerk from the segment on the left of each time, so that at a
            # node it matches the history that precedes it
            jl = np.clip(np.searchsorted(self.tau_nodes, t, side="left") - 1,
                         0, len(self.tau_nodes) - 2)
            hl = self.tau_nodes[jl + 1] - self.tau_nodes[jl]
            tl = (t - self.tau_nodes[jl]) / hl
            p3 = np.stack([0 * tl, 0 * tl, 6 + 0 * tl, 24 * tl, 60 * tl**2], axis=1)
            ad[body] = np.einsum("nk,nkd->nd", p3, self._coef[jl]) / hl[:, None] ** 3
        return z, u, a, ad

    def chord(self, t1, t2):
        t1, t2 = np.broadcast_arrays(np.atleast_1d(np.asarray(t1, float)),
                                     np.atleast_1d(np.asarray(t2, float)))
        shape = t1.shape
        f1, f2 = t1.ravel(), t2.ravel()
        if (min(f1.min(), f2.min()) < self.tau_nodes[0]
                or max(f1.max(), f2.max()) > self.tau_max):
            return super().chord(t1, t2)
        j1, _, th1 = self._local(f1)
        j2, _, th2 = self._local(f2)
        dz = (self.z_nodes[j1] - self.z_nodes[j2]) + (self._poly(j1, th1) - self._poly(j2, th2))
        _, u1, _, _ = self._arrays(f1)
        _, u2, _, _ = self._arrays(f2)
        return dz.reshape(shape + (3,)), (u1 - u2).reshape(shape + (3,))

    def proper_time_at(self, t):
        t = float(t)
        if t < self.z_nodes[0, 0]:
            if self.past is None:
                raise DomainError("coordinate time before the first node")
            return float(self.tau_nodes[0] + (t - self.z_nodes[0, 0]) / self.past.u[0])
        if t > self.z_nodes[-1, 0]:
            raise DomainError("coordinate time beyond the horizon")
        j = int(np.searchsorted(self.z_nodes[:, 0], t, side="right") - 1)
        j = min(max(j, 0), len(self.tau_nodes) - 2)
        lo, hi = float(self.tau_nodes[j]), float(self.tau_nodes[j + 1])

        def fun(tau):
            z, u, _, _ = self._arrays(np.array([tau]))
            return z[0, 0] - t, u[0, 0]

        return _newton(fun, lo, hi, xtol=4 * _EPS * (1 + abs(t)))

    # ---- csv

    def to_csv(self, path: str | Path, with_acceleration: bool = True) -> None:
        cols = ["tau", "z0", "z1", "z2", "u0", "u1", "u2"]
        data = [self.tau_nodes[:, None], self.z_nodes, self.u_nodes]
        if with_acceleration:
            cols += ["a0", "a1", "a2"]
            data.append(self.a_nodes)
        write_csv(path, cols, np.hstack(data))

    @classmethod
    def from_csv(cls, path: str | Path, **kw) -> TabulatedWorldline:
        cols, arr = read_csv(path)
        idx = {c: i for i, c in enumerate(cols)}
        need = ["tau", "z0", "z1", "z2", "u0", "u1", "u2"]
        missing = [c for c in need if c not in idx]
        if missing:
            raise ValueError(f"missing columns {missing}")
        pick = lambda names: arr[:, [idx[c] for c in names]]  # noqa: E731
        a = pick(["a0", "a1", "a2"]) if all(c in idx for c in ("a0", "a1", "a2")) else None
        return cls(arr[:, idx["tau"]], pick(need[1:4]), pick(need[4:7]), a, **kw)


# ------------------------------------------------------------------ csv


def fmt(v: float) -> str:
    """17 significant digits; NaN marks an undefined entry and is written blank."""
    v = float(v)
    return "" if math.isnan(v) else format(v, ".17g")


def write_csv(path: str | Path, columns: Sequence[str], rows: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in np.asarray(rows, dtype=float):
            w.writerow([fmt(v) for v in row])


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        cols = [c.strip() for c in next(r)]
        rows = [[float(v) if v.strip() else math.nan for v in line] for line in r if line]
    return cols, np.array(rows, dtype=float).reshape(-1, len(cols))


# ------------------------------------------------------------ root finding


def _bracket(fun, x0: float, *, increasing: bool, lo_limit=-math.inf, hi_limit=math.inf,
             step: float = 1.0, max_iter: int = 200):
    """Expand from ``x0`` until the monotone ``fun`` changes sign."""
    f0 = fun(x0)[0]
    if f0 == 0:
        return x0, x0
    go_down = (f0 > 0) == increasing
    x, fx = x0, f0
    dx = max(step, 1e-3 * abs(x0))
    for _ in range(max_iter):
        nx = x - dx if go_down else x + dx
        nx = min(max(nx, lo_limit), hi_limit)
        fn = fun(nx)[0]
        if not math.isfinite(fn):
            break
        if (fn > 0) != (fx > 0) or fn == 0:
            return (nx, x) if go_down else (x, nx)
        if nx in (lo_limit, hi_limit):
            break
        x, fx = nx, fn
        dx *= 2.0
    raise RootError("could not bracket a root inside the worldline domain")


def _newton(fun, lo: float, hi: float, xtol: float, ftol: float = 0.0, max_iter: int = 200):
    """Safeguarded Newton on a monotone function with a sign change in ``[lo, hi]``."""
    if lo == hi:
        return lo
    flo = fun(lo)[0]
    if flo == 0:
        return lo
    fhi = fun(hi)[0]
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise RootError("bracket does not enclose a root")
    x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        f, df = fun(x)
        if abs(f) <= ftol or f == 0:
            return x
        if (f > 0) == (flo > 0):
            lo, flo = x, f
        else:
            hi = x
        nx = x - f / df if df != 0 else math.nan
        if not (lo < nx < hi):
            nx = 0.5 * (lo + hi)
        if abs(nx - x) <= xtol or hi - lo <= xtol:
            return nx
        x = nx
    raise RootError("root refinement did not converge")


@dataclass(frozen=True)
class LightConeRoot:
    tau: float
    residual: float
    on_worldline: bool


def light_cone_time(w: Worldline, x, direction: str = "retarded") -> LightConeRoot:
    """Proper time where ``w`` crosses the past (retarded) or future (advanced) cone of ``x``."""
    x = np.asarray(x, dtype=float).reshape(3)
    if direction not in ("retarded", "advanced"):
        raise ValueError(f"unknown direction {direction!r}")
    retarded = direction == "retarded"
    scale = 1.0 + float(x @ x)

    def fun(tau):
        # increasing in tau for both directions, zero on the light cone
        z, u, _, _ = w.arrays(np.array([tau]))
        k = x - z[0]
        d = math.hypot(k[1], k[2])
        dd = -(k[1] * u[0, 1] + k[2] * u[0, 2]) / d if d > 0 else 0.0
        if retarded:
            return d - k[0], dd + u[0, 0]
        return -k[0] - d, u[0, 0] - dd

    try:
        t1 = w.proper_time_at(x[0])
    except (DomainError, RootError) as exc:
        raise RootError(str(exc)) from exc
    z1 = w.position(t1)[0]
    d1 = math.hypot(x[1] - z1[1], x[2] - z1[2])
    if d1 <= 1e-14 * math.sqrt(scale):
        return LightConeRoot(t1, 0.0, True)
    lo_lim = w.tau_min
    hi_lim = w.tau_max
    try:
        lo, hi = _bracket(fun, t1, increasing=True, lo_limit=lo_lim, hi_limit=hi_lim,
                          step=max(d1, 1e-12))
        tau = _newton(fun, lo, hi, xtol=4 * _EPS * (1 + abs(t1)))
    except DomainError as exc:
        raise RootError(str(exc)) from exc
    k = x - w.position(tau)[0]
    g = float(mdot_v(k, k))
    if abs(g) > 1e-12 * scale:
        raise RootError(f"light-cone residual {g:.3g} above tolerance")
    return LightConeRoot(float(tau), g, False)


def retarded_time(w: Worldline, x) -> float:
    return light_cone_time(w, x, "retarded").tau


def advanced_time(w: Worldline, x) -> float:
    return light_cone_time(w, x, "advanced").tau


def separation(w: Worldline, tau_field: float, s: float) -> tuple[MVec3, float, float]:
    """``q = z(tau_field) - z(s)``, its proper length and ``r_s = -(q.u_s)``."""
    if s > tau_field:
        raise ValueError("emission time must not exceed the field time")
    dz, _ = w.chord(tau_field, s)
    q = dz[0]
    qq = float(mdot_v(q, q))
    scale = float(q[0] ** 2 + q[1] ** 2 + q[2] ** 2)
    if qq > 1e-12 * max(scale, 1e-300):
        raise ValueError(f"separation is spacelike (q.q = {qq:.3g}); worldline not causal")
    _, us, _, _ = w.arrays(np.array([s]))
    r = -float(mdot_v(q, us[0]))
    return MVec3.of(q), math.sqrt(max(-qq, 0.0)), r
