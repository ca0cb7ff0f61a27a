"""Independent oracles for values frozen into the test-suite.

Nothing here imports tentkit.  Run ``python tools/oracles.py`` and paste
the printed numbers into ``tests/oracle_values.py``.
"""

import numpy as np
from numpy.polynomial import legendre
from scipy import integrate, optimize


def random_pair(seed: int, m: int = 4, scale: float = 0.8):
    rng = np.random.default_rng(seed)
    L = rng.standard_normal((m, m))
    B = rng.standard_normal((m, m))
    return scale * L / np.linalg.norm(L, 2), scale * B / np.linalg.norm(B, 2)


def brute_flow(L, B, y0, t_end=1.0, n=1_000_000):
    """Fixed-step RK4 on U' = (I - tB)^{-1} (L + B) U, then Y = (I - tB) U."""
    m = y0.size
    eye = np.eye(m)
    K = L + B
    h = t_end / n
    u = y0.copy()
    for k in range(n):
        t = k * h
        k1 = np.linalg.solve(eye - t * B, K @ u)
        k2 = np.linalg.solve(eye - (t + h / 2) * B, K @ (u + h / 2 * k1))
        k3 = np.linalg.solve(eye - (t + h / 2) * B, K @ (u + h / 2 * k2))
        k4 = np.linalg.solve(eye - (t + h) * B, K @ (u + h * k3))
        u = u + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return (eye - t_end * B) @ u


def gaussian(x):
    return np.exp(-50.0 * (x - 0.5) ** 2)


def projection_error(p=2, n=10):
    """L2 distance between the Gaussian and its element-wise projection, by adaptive quadrature."""
    total = 0.0
    for e in range(n):
        a, b = e / n, (e + 1) / n
        coef = []
        for k in range(p + 1):
            Pk = legendre.Legendre.basis(k, domain=[a, b])
            val, _ = integrate.quad(lambda x: gaussian(x) * Pk(x), a, b, epsabs=1e-15, epsrel=1e-14)
            coef.append(val * (2 * k + 1) / (b - a))
        proj = sum(c * legendre.Legendre.basis(k, domain=[a, b]) for k, c in enumerate(coef))
        val, _ = integrate.quad(lambda x: (gaussian(x) - proj(x)) ** 2, a, b,
                                epsabs=1e-18, epsrel=1e-14)
        total += val
    return np.sqrt(total)


def burgers_char(x, t, k=0.5):
    """u(x, t) for u_t + (k u^2)_x = 0 via bracketing root of xi + 2 k u0(xi) t = x."""
    xi = optimize.brentq(lambda s: s + 2 * k * gaussian(s) * t - x, x - 1.0, x + 0.1,
                         xtol=1e-15, rtol=1e-15)
    return gaussian(xi)


if __name__ == "__main__":
    np.set_printoptions(precision=17)
    L, B = random_pair(2024)
    print("REF_FLOW_Y1 =", repr(brute_flow(L, B, np.ones(4)).tolist()))
    print("PROJ_ERR_P2_H01 =", repr(projection_error()))
    for x, t in [(0.55, 0.1), (0.6, 0.1), (0.3, 0.05), (0.7, 0.08)]:
        print(f"BURGERS[{x}, {t}] =", repr(burgers_char(x, t)))
