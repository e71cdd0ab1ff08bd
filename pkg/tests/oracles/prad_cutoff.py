"""Independent cutoff-extrapolation oracle for the radiated momentum on the
unit hyperbola truncated at proper time 0, observed at proper time 1.

p(eps) = -1/2 int_0^1 dt [ int_0^{t-eps} g(t,s) ds - int_{t+eps}^1 g(t,s) ds ]
with g(t,s) = [-(q.u_t) u_s + (u_t.u_s) q] / rho^3, q = z(t) - z(s),
extrapolated to eps -> 0 by Richardson on eps, eps/2, eps/4.
Run: python3 tests/oracles/prad_cutoff.py
"""
import numpy as np
from scipy.integrate import quad

ETA = np.array([-1.0, 1.0, 1.0])


def z(t):
    return np.array([np.sinh(t), np.cosh(t), 0.0])


def u(t):
    return np.array([np.cosh(t), np.sinh(t), 0.0])


def dot(a, b):
    return float(np.sum(ETA * a * b))


def g(t, s, i):
    q = z(t) - z(s)
    rho = 2.0 * abs(np.sinh(0.5 * (t - s)))
    ut, us = u(t), u(s)
    return (-dot(q, ut) * us[i] + dot(ut, us) * q[i]) / rho**3


def inner(t, eps, i, tau):
    ret = quad(lambda s: g(t, s, i), 0.0, t - eps, epsabs=1e-13, epsrel=1e-12,
               limit=200)[0] if t - eps > 0 else 0.0
    adv = quad(lambda s: g(t, s, i), t + eps, tau, epsabs=1e-13, epsrel=1e-12,
               limit=200)[0] if t + eps < tau else 0.0
    return ret - adv


def p_eps(eps, i, tau=1.0):
    pts = [eps, 2 * eps, tau - 2 * eps, tau - eps]
    return -0.5 * quad(lambda t: inner(t, eps, i, tau), 0.0, tau, epsabs=1e-12,
                       epsrel=1e-11, limit=400, points=pts)[0]


if __name__ == "__main__":
    for i in (0, 1):
        eps = 4e-3
        v = [p_eps(eps / 2**k, i) for k in range(3)]
        r1 = [2 * v[k + 1] - v[k] for k in range(2)]
        r2 = (4 * r1[1] - r1[0]) / 3
        print(i, v, r1, r2)
