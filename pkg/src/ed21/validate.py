"""Built-in validation suites behind ``ed21 validate``.

Each check records the measured value, the expected value, the tolerance and
a short ``basis`` label: ``closed-form`` (exact formula), ``oracle``
(independent numerical route), ``property`` (invariant or convergence order)
or ``contract`` (interface behaviour).
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .dynamics import ExternalField, SimConfig, fit_effective_acceleration, simulate
from .fields import (FieldQuery, field_retarded, field_uniform_closed, maxwell_residuals,
                     potential_retarded)
from .geometry import FieldStrength, MVec3, lorentz_force, mdot
from .helium import (FilmParameters, FilmState, em_to_film, film_residuals, film_to_em,
                     mapped_field)
from .ledger import balance_residuals, radiated_momentum, radiation_rate
from .quadrature import integrate
from .selfforce import Prehistory, self_force
from .worldline import HyperbolicWorldline, StaticWorldline, UniformWorldline, separation


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    measured: float
    expected: float
    tolerance: float
    basis: str
    passed: bool
    seconds: float = 0.0

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (f"{flag} {self.suite}/{self.name}: measured={self.measured:.6g} "
                f"expected={self.expected:.6g} tol={self.tolerance:.3g}")


def _le(suite: str, name: str, measured: float, tol: float, basis: str,
        expected: float = 0.0) -> Check:
    return Check(suite, name, float(measured), expected, tol, basis,
                 bool(math.isfinite(measured) and measured <= tol))


def _ge(suite: str, name: str, measured: float, bound: float, basis: str) -> Check:
    return Check(suite, name, float(measured), bound, 0.0, basis,
                 bool(math.isfinite(measured) and measured >= bound))


def _grid(n: int = 11) -> list[tuple[float, float]]:
    g = np.linspace(-1.0, 1.0, n)
    return [(float(x), float(y)) for x in g for y in g if (x, y) != (0.0, 0.0)]


# ---------------------------------------------------------------- suites


def suite_static() -> list[Check]:
    out = []
    w = StaticWorldline(tau_pre=-10.0)
    worst = 0.0
    for r in (0.5, 2.0, 5.0):
        a0 = potential_retarded(w, FieldQuery((0.0, r, 0.0), 1.0)).t
        worst = max(worst, abs(a0 - math.log(r)) / abs(math.log(r)))
    out.append(_le("static", "log_potential_rel", worst, 1e-8, "closed-form"))
    a1 = potential_retarded(w, FieldQuery((0.0, 1.0, 0.0), 1.0)).t
    out.append(_le("static", "log_potential_at_unit_radius", abs(a1), 1e-10, "closed-form"))

    for label, wl, tol in (("closed", StaticWorldline(), 1e-9),
                           ("quadrature", StaticWorldline(tau_pre=-3.0), 1e-6)):
        worst = 0.0
        for x, y in _grid():
            f = field_retarded(wl, FieldQuery((0.0, x, y), 1.0))
            r2 = x * x + y * y
            err = math.hypot(f.e1 - x / r2, f.e2 - y / r2) * math.sqrt(r2)
            worst = max(worst, err)
        out.append(_le("static", f"coulomb_field_{label}_rel", worst, tol, "closed-form"))

    worst = 0.0
    u = (1.0, 0.0, 0.0)
    for r in (0.5, 1.0, 2.0):
        e1, e2 = 1.5, -0.5
        f = field_retarded(StaticWorldline(), FieldQuery((0.0, r, 0.0), e1))
        force = lorentz_force(f, u, e2)
        worst = max(worst, abs(force.x - e1 * e2 / r) / abs(e1 * e2 / r), abs(force.y))
    out.append(_le("static", "coulomb_force_rel", worst, 1e-9, "closed-form"))
    return out


def _boost(v1: float, v2: float) -> np.ndarray:
    g = 1.0 / math.sqrt(1.0 - v1 * v1 - v2 * v2)
    return np.array([g, g * v1, g * v2])


def suite_uniform() -> list[Check]:
    rng = np.random.default_rng(20240601)
    u = _boost(0.4, -0.3)
    w = UniformWorldline([0.0, 0.0, 0.0], u, tau_pre=-2.0)
    worst = 0.0
    for _ in range(100):
        x = np.array([rng.uniform(-1, 1), rng.uniform(-2, 2), rng.uniform(-2, 2)])
        ref = np.asarray(field_uniform_closed([0.0, 0.0, 0.0], u, 1.0, x), float)
        got = np.asarray(field_retarded(w, FieldQuery(x, 1.0)), float)
        worst = max(worst, float(np.max(np.abs(got - ref)) / np.max(np.abs(ref))))
    out = [_le("uniform", "field_vs_closed_form_rel", worst, 1e-8, "closed-form")]
    fs, ms = 0.0, 0.0
    for tau in (0.0, 0.5, 2.0):
        r = self_force(w, tau, 1.0, Prehistory.asymptote())
        fs = max(fs, float(np.max(np.abs(r.force.array))))
        ms = max(ms, abs(r.mass_rate))
    out.append(_le("uniform", "self_force_abs", fs, 1e-10, "closed-form"))
    out.append(_le("uniform", "mass_rate_abs", ms, 1e-10, "closed-form"))
    return out


def _coefficient(tau: float) -> float:
    return 0.5 * (1.0 - 1.0 / math.cosh(0.5 * tau))


def suite_hyperbolic() -> list[Check]:
    out = []
    w = HyperbolicWorldline(1.0)
    worst = 0.0
    for d in np.geomspace(1e-3, 5.0, 25):
        _, rho, _ = separation(w, 1.0, 1.0 - float(d))
        worst = max(worst, abs(rho - 2 * math.sinh(d / 2)) / (2 * math.sinh(d / 2)))
    out.append(_le("hyperbolic", "chord_length_rel", worst, 1e-10, "closed-form"))

    pol = Prehistory.truncate(0.0)
    worst, mr = 0.0, 0.0
    coeff2 = math.nan
    for tau in (0.1, 0.5, 1.0, 2.0, 5.0):
        r = self_force(w, tau, 1.0, pol)
        a = w.eval(tau).a
        ref = _coefficient(tau) * a.array
        worst = max(worst, float(np.linalg.norm(r.force.array - ref) / np.linalg.norm(ref)))
        mr = max(mr, abs(r.mass_rate))
        if tau == 2.0:
            coeff2 = mdot(r.force, a) / mdot(a, a)
    out.append(_le("hyperbolic", "self_force_rel", worst, 1e-5, "closed-form"))
    out.append(Check("hyperbolic", "coefficient_tau2", coeff2, 0.175973, 5e-7, "closed-form",
                     abs(coeff2 - 0.175973) <= 5e-7))
    out.append(_le("hyperbolic", "mass_rate_abs", mr, 1e-8, "closed-form"))

    # charged particle without self-action follows the hyperbola exactly
    cfg = SimConfig(e=1.0, m0=1.0, h=1e-3, tau_end=2.0, field=ExternalField.constant(1.0),
                    selfforce=False, prehistory="truncate")
    tr = simulate(cfg)
    exact = np.column_stack([np.sinh(tr.tau), np.cosh(tr.tau) - 1.0, 0.0 * tr.tau])
    out.append(_le("hyperbolic", "bare_trajectory_abs", float(np.max(np.abs(tr.z - exact))),
                   1e-6, "closed-form"))

    cfg = SimConfig(e=1.0, m0=10.0, h=5e-3, tau_end=10.0, field=ExternalField.constant(10.0),
                    prehistory="truncate")
    fit = fit_effective_acceleration(simulate(cfg), (8.0, 10.0))
    target = 10.0 / (10.0 - 0.5)
    out.append(Check("hyperbolic", "dressed_acceleration", fit.mean, target, 0.01 * target,
                     "closed-form", abs(fit.mean - target) <= 0.01 * target))
    return out


def suite_maxwell() -> list[Check]:
    x = np.array([0.3, 1.5, 1.2])
    u = _boost(0.5, 0.2)
    fields: dict[str, Callable[[np.ndarray], FieldStrength]] = {
        "static": lambda p: FieldStrength(p[1] / (p[1] ** 2 + p[2] ** 2),
                                          p[2] / (p[1] ** 2 + p[2] ** 2), 0.0),
        "uniform": lambda p: field_uniform_closed([0.0, 0.0, 0.0], u, 1.0, p),
    }
    out = []
    hs = 1e-2 / 2.0 ** np.arange(4)
    floor = 1e-11
    for label, fn in fields.items():
        res = np.array([[abs(v) for v in (r.faraday, r.gauss, r.ampere1, r.ampere2)]
                        for r in (maxwell_residuals(fn, x, h) for h in hs)])
        orders = []
        for j in range(4):
            col = res[:, j]
            if col[-2] > floor:
                orders.append(math.log2(col[-2] / max(col[-1], 1e-300)))
        order = min(orders) if orders else math.inf
        out.append(_ge("maxwell", f"{label}_order", order, 1.9, "property"))
        out.append(_le("maxwell", f"{label}_final_residual", float(res[-1].max()), 1e-6,
                       "property"))
    return out


def suite_ledger() -> list[Check]:
    out = []
    w = UniformWorldline([0.0, 0.0, 0.0], _boost(0.3, 0.1), tau_pre=-1.0)
    p = radiated_momentum(w, 1.0, 1.0, Prehistory.asymptote())
    out.append(_le("ledger", "uniform_p_rad_abs", float(np.max(np.abs(p.array))), 1e-10,
                   "closed-form"))

    hw = HyperbolicWorldline(1.0)
    pol = Prehistory.truncate(0.0)
    nested = radiated_momentum(hw, 1.0, 1.0, pol).array
    rate = lambda t: np.array([radiation_rate(hw, float(ti), 1.0, pol).array  # noqa: E731
                               for ti in np.atleast_1d(t)])
    alt, _ = integrate(rate, 0.0, 1.0, rtol=1e-10, atol=1e-12)
    rel = float(np.max(np.abs(nested - alt)) / np.max(np.abs(alt)))
    out.append(_le("ledger", "hyperbolic_p_rad_two_routes_rel", rel, 1e-5, "oracle"))

    orders = []
    for prehistory in ("truncate", "asymptote"):
        worst = []
        for h in (2e-3, 1e-3):
            cfg = SimConfig(e=1.0, m0=10.0, h=h, tau_end=1.0, field=ExternalField.constant(10.0),
                            prehistory=prehistory)
            reps = balance_residuals(simulate(cfg))
            worst.append(max(float(np.max(np.abs(r.balance_p.array))) for r in reps))
        orders.append(math.log2(worst[0] / worst[1]))
    out.append(_ge("ledger", "balance_order", min(orders), 1.9, "property"))
    return out


def suite_helium() -> list[Check]:
    p = FilmParameters()
    rng = np.random.default_rng(7)
    exact = True
    for _ in range(200):
        s = FilmState(*rng.normal(size=6))
        exact &= em_to_film(film_to_em(s, p), p=p) == s
    out = [Check("helium", "round_trip_exact", float(exact), 1.0, 0.0, "property", bool(exact))]

    q = FilmParameters(kappa=2.0, m_atom=0.5, rho_bar=1.5)

    def state(t, x, y):
        return FilmState(v1=np.sin(x + 0.3 * t) * np.cos(y), v2=0.5 * np.cos(x * y + t),
                         rho=0.2 * np.exp(-x * x - y * y) * np.cos(t))

    pt = (0.3, 0.4, -0.2)
    h = 1e-3
    cont = film_residuals(state, pt, q, h=h / q.c_eff).continuity
    far = maxwell_residuals(mapped_field(state, q), (q.c_eff * pt[0], pt[1], pt[2]), h).faraday
    out.append(_le("helium", "continuity_faraday_gap", abs(cont / q.rho_bar - far), 1e-6,
                   "property"))
    return out


SUITE_FUNCS: dict[str, Callable[[], list[Check]]] = {
    "static": suite_static,
    "uniform": suite_uniform,
    "hyperbolic": suite_hyperbolic,
    "maxwell": suite_maxwell,
    "ledger": suite_ledger,
    "helium": suite_helium,
}


def run(suite: str) -> list[Check]:
    names = list(SUITE_FUNCS) if suite == "all" else [suite]
    if any(n not in SUITE_FUNCS for n in names):
        raise ValueError(f"unknown suite {suite!r}")
    checks = []
    for n in names:
        t0 = time.perf_counter()
        got = SUITE_FUNCS[n]()
        dt = (time.perf_counter() - t0) / max(len(got), 1)
        checks.extend(Check(**{**asdict(c), "seconds": dt}) for c in got)
    return checks


def report(checks: list[Check], suite: str) -> dict:
    """JSON-ready report; timing is left out so reports are reproducible."""
    rows = []
    for c in checks:
        d = asdict(c)
        d.pop("seconds")
        rows.append(d)
    return {"suite": suite, "passed": all(c.passed for c in checks), "checks": rows}


__all__ = ["Check", "run", "report", "SUITE_FUNCS", "MVec3"]
