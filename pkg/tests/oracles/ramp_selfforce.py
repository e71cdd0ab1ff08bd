"""mpmath oracle: tail self-force and mass rate on the ramp worldline
u1 = b tau (b = 0.8), history truncated at 0, observed at tau = 1.

Run: python3 tests/oracles/ramp_selfforce.py
"""
import mpmath as mp

mp.mp.dps = 40
B = mp.mpf("0.8")


def state(t):
    s = mp.sqrt(1 + (B * t) ** 2)
    z = [(t * s + mp.asinh(B * t) / B) / 2, B * t * t / 2, 0]
    u = [s, B * t, 0]
    a = [B * B * t / s, B, 0]
    return z, u, a


def dot(x, y):
    return -x[0] * y[0] + x[1] * y[1] + x[2] * y[2]


def integrands(tau, s):
    zt, ut, at = state(tau)
    zs, us, as_ = state(s)
    q = [zt[i] - zs[i] for i in range(3)]
    rho = mp.sqrt(-dot(q, q))
    r = -dot(q, us)
    uq, uu, ua, qa = dot(ut, q), dot(ut, us), dot(ut, as_), dot(q, as_)
    comb = [((us[i] * uq - uu * q[i]) / r**2 * (1 + qa) + (as_[i] * uq - ua * q[i]) / r) / rho
            + at[i] / (2 * rho) for i in range(3)]
    du = [ut[i] - us[i] for i in range(3)]
    mass = dot(q, du) / (2 * rho**3)
    return comb, mass


def self_force(tau):
    # Gauss-Legendre keeps nodes away from s = tau, where q loses all digits
    pts = [0, tau / 2, tau]
    force = [mp.quad(lambda s: integrands(tau, s)[0][i], pts, method="gauss-legendre")
             for i in range(3)]
    mass = mp.quad(lambda s: integrands(tau, s)[1], pts, method="gauss-legendre")
    return force, mass


if __name__ == "__main__":
    f, m = self_force(mp.mpf(1))
    print([mp.nstr(v, 17) for v in f], mp.nstr(m, 17))
