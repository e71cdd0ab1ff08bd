"""Potentials and field strengths of a point charge as history integrals.

In 2+1 dimensions the Green's function has support inside the light cone,
so the field at ``x`` depends on the whole worldline before the retarded
time.  The integrals are split into

* straight-line asymptotes (``Worldline.past`` / ``.future``) handled in
  closed form, and
* the explicit history between the asymptote anchor (or a truncation time)
  and the light-cone crossing, done by adaptive quadrature after the
  substitution ``tau = tau* -+ w**2`` that removes the inverse-square-root
  endpoint singularity.

Potentials are returned as covariant components ``A_mu``.  The integral over
an infinite straight history diverges logarithmically; the divergent,
``x``-independent constant ``ln(2 T_inf)`` is dropped, which leaves
``A_0 = e ln r`` for a charge at rest.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import FieldStrength, MVec3, mdot_v, wedge_v
from .quadrature import integrate
from .worldline import Asymptote, Worldline, light_cone_time

Direction = str


@dataclass(frozen=True)
class FieldQuery:
    """Field point and evaluation options.

    ``truncate`` ignores the worldline before (retarded) or after (advanced)
    the given proper time; it is required for worldlines without the matching
    asymptote.
    """

    x: MVec3
    charge: float = 1.0
    direction: Direction = "retarded"
    quad_tol: float = 1e-9
    truncate: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "x", MVec3.of(self.x))
        if not (0 < self.quad_tol <= 1e-2):
            raise ValueError("quad_tol must lie in (0, 1e-2]")
        if self.direction not in ("retarded", "advanced"):
            raise ValueError(f"unknown direction {self.direction!r}")


@dataclass(frozen=True)
class MaxwellResidual:
    faraday: float
    gauss: float
    ampere1: float
    ampere2: float
    h: float

    def max_abs(self) -> float:
        return max(abs(self.faraday), abs(self.gauss), abs(self.ampere1), abs(self.ampere2))


class FieldEvaluationError(RuntimeError):
    """The field point sits on the worldline or the history is undefined."""


# ------------------------------------------------------------ closed forms


def _line_terms(x: np.ndarray, anchor_z: np.ndarray, u: np.ndarray, retarded: bool,
                on_cone: bool = False):
    """Shared quantities for a straight segment ending (or starting) at ``anchor_z``.

    Returns ``(K_p, T_p, sqrt(p))`` with ``T_p`` the light-cone distance
    parameter at the anchor and ``p = -(K_p . K_p)``.  ``on_cone`` marks an
    anchor at the light-cone crossing itself, where ``p`` is zero by
    construction (the root-finder residual would otherwise enter as its
    square root).
    """
    kp = x - anchor_z
    tp = -mdot_v(kp, u) if retarded else mdot_v(kp, u)
    if on_cone:
        return kp, tp, 0.0
    p = -mdot_v(kp, kp)
    if p < -1e-12 * float(kp @ kp):
        raise FieldEvaluationError("segment anchor lies outside the light cone of the field point")
    return kp, tp, math.sqrt(max(p, 0.0))


def line_field(x, anchor_z, u, e: float, retarded: bool = True,
               on_cone: bool = False) -> np.ndarray:
    """Packed field of a straight semi-infinite segment (history before/after the anchor)."""
    kp, tp, sp = _line_terms(np.asarray(x, float), np.asarray(anchor_z, float),
                             np.asarray(u, float), retarded, on_cone)
    if tp <= 0:
        raise FieldEvaluationError("field point on the segment")
    return e * wedge_v(u, kp) / (tp * (tp + sp))


def line_potential(x, anchor_z, u, e: float, retarded: bool = True,
                   on_cone: bool = False) -> np.ndarray:
    """Regularised covariant potential of a straight semi-infinite segment."""
    u = np.asarray(u, float)
    kp, tp, sp = _line_terms(np.asarray(x, float), np.asarray(anchor_z, float), u, retarded,
                             on_cone)
    if tp + sp <= 0:
        raise FieldEvaluationError("field point on the segment")
    ucov = u * np.array([-1.0, 1.0, 1.0])
    return -e * ucov * math.log(tp + sp)


def field_uniform_closed(z0, u, e: float, x, direction: Direction = "retarded") -> FieldStrength:
    """Exact field ``e (u ^ K) / r^2`` of a charge in uniform motion along ``z0 + u tau``."""
    z0 = np.asarray(z0, float)
    u = np.asarray(u, float)
    x = np.asarray(x, float)
    if abs(mdot_v(u, u) + 1.0) > 1e-9:
        raise ValueError("u must be normalised")
    k0 = x - z0
    b = mdot_v(k0, u)
    d = b * b + mdot_v(k0, k0)
    if d < 0:
        raise FieldEvaluationError("negative discriminant")
    root = math.sqrt(d)
    if root == 0:
        raise FieldEvaluationError("field point on the worldline (r = 0)")
    tau = -b - root if direction == "retarded" else -b + root
    k = k0 - u * tau
    if np.allclose(wedge_v(u, k), 0.0, atol=1e-300):
        return FieldStrength(0.0, 0.0, 0.0)
    # r^2 equals the discriminant for both directions
    return FieldStrength.of(e * wedge_v(u, k) / d)


def field_static_segment(e: float, x) -> FieldStrength:
    """Field of a charge at the origin that was static for ``t < 0`` only."""
    x = np.asarray(x, float)
    r2 = x[1] ** 2 + x[2] ** 2
    if not (x[0] > 0 and x[0] * x[0] > r2 > 0):
        raise FieldEvaluationError("segment not visible: need x0 > r > 0")
    x0 = x[0]
    fac = 1.0 / (x0 * x0 + x0 * math.sqrt(x0 * x0 - r2))
    return FieldStrength(e * x[1] * fac, e * x[2] * fac, 0.0)


# --------------------------------------------------------- history integrals


def _bounds(w: Worldline, q: FieldQuery, tau_star: float):
    """Explicit-history interval and the straight asymptote (if used)."""
    retarded = q.direction == "retarded"
    line: Asymptote | None = w.past if retarded else w.future
    if q.truncate is not None:
        line = None
        edge = float(q.truncate)
    elif line is not None:
        edge = line.tau
    else:
        raise FieldEvaluationError(
            "worldline has no asymptote on this side; pass a truncation time"
        )
    if retarded:
        length = max(tau_star - edge, 0.0)
    else:
        length = max(edge - tau_star, 0.0)
    return line, edge, length


def _substituted(w: Worldline, x: np.ndarray, tau_star: float, z_star: np.ndarray,
                 retarded: bool, kernel: Callable):
    """Integrand in ``w`` for ``tau = tau* -+ w^2`` including the Jacobian ``2 w``."""
    # the crossing is treated as exactly null; see _line_terms
    k_star = x - z_star
    sgn = -1.0 if retarded else 1.0

    def f(wv: np.ndarray) -> np.ndarray:
        tau = tau_star + sgn * wv * wv
        z, u, a, _ = w.arrays(tau)
        delta, _ = w.chord(np.full_like(tau, tau_star), tau)   # z* - z(tau)
        k = k_star + delta
        rho2 = -2.0 * mdot_v(k_star, delta) - mdot_v(delta, delta)
        rho = np.sqrt(np.maximum(rho2, 0.0))
        jac = 2.0 * wv / rho
        return kernel(k, u, a) * jac[:, None]

    return f


def _field_kernel(k, u, a):
    r = -mdot_v(k, u)
    ka = mdot_v(k, a)
    return wedge_v(u, k) * ((1.0 + ka) / (r * r))[:, None] + wedge_v(a, k) / r[:, None]


def _potential_kernel(k, u, a):
    return u * np.array([-1.0, 1.0, 1.0])


def _history(w: Worldline, q: FieldQuery, kernel: Callable, closed: Callable):
    x = np.asarray(q.x, float)
    retarded = q.direction == "retarded"
    root = light_cone_time(w, x, q.direction)
    if root.on_worldline:
        raise FieldEvaluationError("field point lies on the worldline")
    tau_star = root.tau
    line, edge, length = _bounds(w, q, tau_star)
    z_star = w.position(tau_star)[0]
    u_star = w.arrays(np.array([tau_star]))[1][0]

    if length == 0.0:
        if line is None:
            return np.zeros(3), 0.0
        # only the straight part is visible: anchor at the crossing point
        return closed(x, z_star, u_star, retarded, True), 0.0

    total = np.zeros(3) if line is None else closed(x, line.z, line.u, retarded)
    f = _substituted(w, x, tau_star, z_star, retarded, kernel)
    wmax = math.sqrt(length)
    brk = [math.sqrt(abs(tau_star - k)) for k in w.kinks
           if (edge < k < tau_star if retarded else tau_star < k < edge)]
    scale = float(np.max(np.abs(total)))
    val, err = integrate(f, 0.0, wmax, rtol=q.quad_tol, atol=q.quad_tol * scale,
                         breakpoints=brk)
    return total + q.charge * val, abs(q.charge) * err


def _closed_field(e):
    return lambda x, z, u, ret, on_cone=False: line_field(x, z, u, e, ret, on_cone)


def _closed_potential(e):
    return lambda x, z, u, ret, on_cone=False: line_potential(x, z, u, e, ret, on_cone)


def field_with_error(w: Worldline, q: FieldQuery) -> tuple[FieldStrength, float]:
    val, err = _history(w, q, _field_kernel, _closed_field(q.charge))
    return FieldStrength.of(val), err


def potential_with_error(w: Worldline, q: FieldQuery) -> tuple[MVec3, float]:
    val, err = _history(w, q, _potential_kernel, _closed_potential(q.charge))
    return MVec3.of(val), err


def field_retarded(w: Worldline, q: FieldQuery) -> FieldStrength:
    """Field strength ``F_{mu nu}`` at ``q.x`` (direction taken from the query)."""
    return field_with_error(w, q)[0]


def potential_retarded(w: Worldline, q: FieldQuery) -> MVec3:
    """Covariant potential ``A_mu`` at ``q.x`` (direction taken from the query)."""
    return potential_with_error(w, q)[0]


def field_advanced(w: Worldline, q: FieldQuery) -> FieldStrength:
    return field_retarded(w, _with_direction(q, "advanced"))


def potential_advanced(w: Worldline, q: FieldQuery) -> MVec3:
    return potential_retarded(w, _with_direction(q, "advanced"))


def _with_direction(q: FieldQuery, d: str) -> FieldQuery:
    return FieldQuery(q.x, q.charge, d, q.quad_tol, q.truncate)


# ------------------------------------------------------------ maxwell check


def maxwell_residuals(field: Callable[[np.ndarray], FieldStrength], x, h: float | None = None
                      ) -> MaxwellResidual:
    """Central-difference source-free Maxwell residuals of ``field`` at ``x``."""
    x = np.asarray(x, float)
    if h is None:
        h = 1e-3 * (1.0 + float(np.linalg.norm(x)))
    d = np.zeros((3, 3))
    for mu in range(3):
        step = np.zeros(3)
        step[mu] = h
        fp = np.asarray(field(x + step), float)
        fm = np.asarray(field(x - step), float)
        d[mu] = (fp - fm) / (2 * h)       # d[mu] = d_mu (E1, E2, H)
    e1, e2, hh = 0, 1, 2
    return MaxwellResidual(
        faraday=float(d[0, hh] - d[2, e1] + d[1, e2]),
        gauss=float(d[1, e1] + d[2, e2]),
        ampere1=float(-d[0, e1] + d[2, hh]),
        ampere2=float(-d[0, e2] - d[1, hh]),
        h=float(h),
    )


def worldline_maxwell_residuals(w: Worldline, x, e: float = 1.0, h: float | None = None,
                                quad_tol: float = 1e-11, truncate: float | None = None
                                ) -> MaxwellResidual:
    """Maxwell residuals of the quadrature field of ``w``."""
    fn = lambda p: field_retarded(w, FieldQuery(p, e, "retarded", quad_tol, truncate))  # noqa: E731
    return maxwell_residuals(fn, x, h)


def curl_of_potential(w: Worldline, q: FieldQuery, h: float = 1e-4) -> FieldStrength:
    """``F_{mu nu} = d_mu A_nu - d_nu A_mu`` from central differences of the potential."""
    x = np.asarray(q.x, float)
    d = np.zeros((3, 3))
    for mu in range(3):
        step = np.zeros(3)
        step[mu] = h
        ap = np.asarray(potential_retarded(w, FieldQuery(x + step, q.charge, q.direction,
                                                          q.quad_tol, q.truncate)))
        am = np.asarray(potential_retarded(w, FieldQuery(x - step, q.charge, q.direction,
                                                          q.quad_tol, q.truncate)))
        d[mu] = (ap - am) / (2 * h)        # d[mu, nu] = d_mu A_nu
    f = d - d.T
    return FieldStrength.from_covariant(f)
