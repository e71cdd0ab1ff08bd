"""Minkowski 2+1 algebra: vectors, field tensors and the Lorentz force.

Conventions
-----------
Metric ``diag(-1, 1, 1)``, components stored as ``(t, x, y)`` with index 0
the time component.  A field tensor is stored through its three independent
components ``(E1, E2, H)`` with covariant layout

    F_01 = -E1,   F_02 = -E2,   F_12 = H

so that the contravariant array has ``F^01 = E1``, ``F^02 = E2``,
``F^12 = H``.

Besides the value types there is a small set of vectorised kernels
(``*_v``) that act on ``(..., 3)`` float arrays.  The history integrals in
the other modules are written against these kernels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

ETA = np.diag([-1.0, 1.0, 1.0])
_NORM_TOL = 1e-9

ArrayLike3 = Union["MVec3", np.ndarray, tuple, list]


def _finite(*vals: float) -> None:
    for v in vals:
        if not math.isfinite(v):
            raise ValueError(f"non-finite component {v!r}")


@dataclass(frozen=True, slots=True)
class MVec3:
    """Contravariant 3-vector ``(t, x, y)``."""

    t: float
    x: float
    y: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        _finite(self.t, self.x, self.y)

    @classmethod
    def of(cls, v: ArrayLike3) -> MVec3:
        if isinstance(v, MVec3):
            return v
        arr = np.asarray(v, dtype=float).reshape(3)
        return cls(arr[0], arr[1], arr[2])

    @property
    def array(self) -> np.ndarray:
        return np.array([self.t, self.x, self.y])

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.array, dtype=dtype)

    def __iter__(self):
        yield self.t
        yield self.x
        yield self.y

    def __add__(self, o: MVec3) -> MVec3:
        return MVec3(self.t + o.t, self.x + o.x, self.y + o.y)

    def __sub__(self, o: MVec3) -> MVec3:
        return MVec3(self.t - o.t, self.x - o.x, self.y - o.y)

    def __neg__(self) -> MVec3:
        return MVec3(-self.t, -self.x, -self.y)

    def __mul__(self, k: float) -> MVec3:
        return MVec3(k * self.t, k * self.x, k * self.y)

    __rmul__ = __mul__

    def __truediv__(self, k: float) -> MVec3:
        return MVec3(self.t / k, self.x / k, self.y / k)

    def lower(self) -> np.ndarray:
        """Covariant components ``v_mu``."""
        return np.array([-self.t, self.x, self.y])

    def spatial_norm(self) -> float:
        return math.hypot(self.x, self.y)


@dataclass(frozen=True, slots=True)
class FieldStrength:
    """Antisymmetric field tensor packed as ``(E1, E2, H)``."""

    e1: float
    e2: float
    h: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "e1", float(self.e1))
        object.__setattr__(self, "e2", float(self.e2))
        object.__setattr__(self, "h", float(self.h))
        _finite(self.e1, self.e2, self.h)

    @classmethod
    def of(cls, v) -> FieldStrength:
        if isinstance(v, FieldStrength):
            return v
        arr = np.asarray(v, dtype=float).reshape(3)
        return cls(arr[0], arr[1], arr[2])

    @property
    def array(self) -> np.ndarray:
        return np.array([self.e1, self.e2, self.h])

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.array, dtype=dtype)

    def __add__(self, o: FieldStrength) -> FieldStrength:
        return FieldStrength(self.e1 + o.e1, self.e2 + o.e2, self.h + o.h)

    def __sub__(self, o: FieldStrength) -> FieldStrength:
        return FieldStrength(self.e1 - o.e1, self.e2 - o.e2, self.h - o.h)

    def __neg__(self) -> FieldStrength:
        return FieldStrength(-self.e1, -self.e2, -self.h)

    def __mul__(self, k: float) -> FieldStrength:
        return FieldStrength(k * self.e1, k * self.e2, k * self.h)

    __rmul__ = __mul__

    def covariant(self) -> np.ndarray:
        """Full 3x3 array ``F_{mu nu}``."""
        e1, e2, h = self.e1, self.e2, self.h
        return np.array([[0.0, -e1, -e2], [e1, 0.0, h], [e2, -h, 0.0]])

    def contravariant(self) -> np.ndarray:
        """Full 3x3 array ``F^{mu nu}``."""
        return raise_indices(self)

    @classmethod
    def from_covariant(cls, f: np.ndarray) -> FieldStrength:
        f = np.asarray(f, dtype=float)
        return cls(-f[0, 1], -f[0, 2], f[1, 2])

    @classmethod
    def from_contravariant(cls, f: np.ndarray) -> FieldStrength:
        f = np.asarray(f, dtype=float)
        return cls(f[0, 1], f[0, 2], f[1, 2])


@dataclass(frozen=True, slots=True)
class AngularMomentum2:
    """Antisymmetric ``M^{mu nu}`` stored as ``(M^01, M^02, M^12)``."""

    m01: float
    m02: float
    m12: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "m01", float(self.m01))
        object.__setattr__(self, "m02", float(self.m02))
        object.__setattr__(self, "m12", float(self.m12))
        _finite(self.m01, self.m02, self.m12)

    @classmethod
    def of(cls, v) -> AngularMomentum2:
        if isinstance(v, AngularMomentum2):
            return v
        arr = np.asarray(v, dtype=float).reshape(3)
        return cls(arr[0], arr[1], arr[2])

    @classmethod
    def from_pair(cls, a: ArrayLike3, b: ArrayLike3) -> AngularMomentum2:
        """``a^mu b^nu - a^nu b^mu``."""
        return cls.of(outer_v(np.asarray(a, float), np.asarray(b, float)))

    @property
    def array(self) -> np.ndarray:
        return np.array([self.m01, self.m02, self.m12])

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.array, dtype=dtype)

    def __add__(self, o: AngularMomentum2) -> AngularMomentum2:
        return AngularMomentum2(self.m01 + o.m01, self.m02 + o.m02, self.m12 + o.m12)

    def __sub__(self, o: AngularMomentum2) -> AngularMomentum2:
        return AngularMomentum2(self.m01 - o.m01, self.m02 - o.m02, self.m12 - o.m12)

    def matrix(self) -> np.ndarray:
        a, b, c = self.m01, self.m02, self.m12
        return np.array([[0.0, a, b], [-a, 0.0, c], [-b, -c, 0.0]])


# ---------------------------------------------------------------- kernels


def mdot_v(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minkowski product over the last axis."""
    return -a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] + a[..., 2] * b[..., 2]


def wedge_v(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Packed ``(E1, E2, H)`` of ``a_mu b_nu - a_nu b_mu`` over the last axis."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.empty(np.broadcast_shapes(a.shape, b.shape))
    out[..., 0] = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    out[..., 1] = a[..., 0] * b[..., 2] - a[..., 2] * b[..., 0]
    out[..., 2] = a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1]
    return out


def outer_v(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Packed ``(01, 02, 12)`` of the contravariant ``a^mu b^nu - a^nu b^mu``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.empty(np.broadcast_shapes(a.shape, b.shape))
    out[..., 0] = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    out[..., 1] = a[..., 0] * b[..., 2] - a[..., 2] * b[..., 0]
    out[..., 2] = a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1]
    return out


def lorentz_v(f: np.ndarray, u: np.ndarray, e: float = 1.0) -> np.ndarray:
    """``e F^{mu alpha} u_alpha`` for packed fields ``f`` and velocities ``u``."""
    f = np.asarray(f, dtype=float)
    u = np.asarray(u, dtype=float)
    e1, e2, h = f[..., 0], f[..., 1], f[..., 2]
    out = np.empty(np.broadcast_shapes(f.shape, u.shape))
    out[..., 0] = e1 * u[..., 1] + e2 * u[..., 2]
    out[..., 1] = e1 * u[..., 0] + h * u[..., 2]
    out[..., 2] = e2 * u[..., 0] - h * u[..., 1]
    return e * out


def unit_velocity(spatial: np.ndarray) -> np.ndarray:
    """Complete spatial velocity components to a unit timelike vector."""
    spatial = np.asarray(spatial, dtype=float)
    out = np.empty(spatial.shape[:-1] + (3,))
    out[..., 1:] = spatial
    out[..., 0] = np.sqrt(1.0 + spatial[..., 0] ** 2 + spatial[..., 1] ** 2)
    return out


# ------------------------------------------------------------- public API


def mdot(a: ArrayLike3, b: ArrayLike3) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(mdot_v(a, b))


def wedge(a: ArrayLike3, b: ArrayLike3) -> FieldStrength:
    return FieldStrength.of(wedge_v(np.asarray(a, float), np.asarray(b, float)))


def raise_indices(f: FieldStrength) -> np.ndarray:
    """Contravariant array ``F^{mu nu} = eta^{mu a} eta^{nu b} F_ab``."""
    return ETA @ f.covariant() @ ETA


def lower_indices(f_up: np.ndarray) -> FieldStrength:
    """Inverse of :func:`raise_indices`."""
    return FieldStrength.from_covariant(ETA @ np.asarray(f_up, dtype=float) @ ETA)


def check_unit(u: ArrayLike3, tol: float = _NORM_TOL) -> None:
    n = mdot(u, u)
    if abs(n + 1.0) > tol:
        raise ValueError(f"velocity not normalised: u.u = {n!r}")


def lorentz_force(f: FieldStrength, u: ArrayLike3, e: float) -> MVec3:
    """Force ``e F^{mu alpha} u_alpha`` on a charge with unit velocity ``u``.

    At rest in a pure electric field this is ``(0, e E1, e E2)``.
    """
    check_unit(u)
    return MVec3.of(lorentz_v(np.asarray(f, float), np.asarray(u, float), e))
