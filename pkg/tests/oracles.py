"""Independent reference values used across the test suite.

Nothing here imports the package; each oracle is a closed form, a
separation-of-variables series, or brute-force adaptive quadrature.
"""

import numpy as np
from scipy.integrate import quad
from scipy.special import h1vp, hankel1, jv, jvp


def ellipse_point(a, b, t):
    return np.array([a * np.cos(t), b * np.sin(t)])


def ellipse_speed(a, b, t):
    return np.hypot(a * np.sin(t), b * np.cos(t))


def ellipse_normal(a, b, t):
    n = np.array([b * np.cos(t), a * np.sin(t)])
    return n / np.linalg.norm(n)


def ellipse_curvature(a, b, t):
    return a * b / ellipse_speed(a, b, t) ** 3


def disk_gpt(n, r0, lam):
    """Diagonal GPT of a disk in the r^|n| e^{i n theta} basis."""
    return 2 * np.pi * abs(n) * r0 ** (2 * abs(n)) / lam


def disk_gpt_dilation_derivative(n, r0, lam):
    return 4 * np.pi * n ** 2 * r0 ** (2 * abs(n) - 1) / lam


def disk_dipole_field(r0, conductivity, x, y):
    """Classical u - u0 outside a disk for u0 = x and interior conductivity k."""
    k = conductivity
    return (1 - k) / (1 + k) * r0 ** 2 * x / (x ** 2 + y ** 2)


def mie_sc(n, r0, k0, k1, mu0, mu1):
    """W[n][n] of a disk, from the interior/exterior Bessel series.

    Interior a J_n(k1 r), exterior J_n(k0 r) + b H_n(k0 r); continuity of u
    and of (1/mu) du/dr.  With u - u0 = -(i/4) W H_n e^{in theta}, W = 4 i b.
    """
    A = np.array([[jv(n, k1 * r0), -hankel1(n, k0 * r0)],
                  [k1 * jvp(n, k1 * r0) / mu1, -k0 * h1vp(n, k0 * r0) / mu0]])
    rhs = np.array([jv(n, k0 * r0), k0 * jvp(n, k0 * r0) / mu0])
    a, b = np.linalg.solve(A, rhs)
    return 4j * b


def mie_scattered_field(n, r0, k0, k1, mu0, mu1, r, theta):
    w = mie_sc(n, r0, k0, k1, mu0, mu1)
    return -0.25j * w * hankel1(n, k0 * r) * np.exp(1j * n * theta)


def circle_helmholtz_single_eig(m, k, r0):
    return -(1j * np.pi * r0 / 2) * jv(m, k * r0) * hankel1(m, k * r0)


def circle_helmholtz_np_eig(m, k, r0):
    return -(1j * np.pi * k * r0 / 4) * (jv(m, k * r0) * h1vp(m, k * r0) + jvp(m, k * r0) * hankel1(m, k * r0))


def arclength(fun_xy_prime, a=0.0, b=2 * np.pi):
    """Perimeter of a closed curve from its derivative by adaptive quadrature."""
    val, _ = quad(lambda t: np.linalg.norm(fun_xy_prime(t)), a, b, limit=400, epsabs=1e-14, epsrel=1e-14)
    return val


def log_single_layer_at(point, density, curve_xy, curve_speed, t_sing=None):
    """(1/2pi) int log|x - y(t)| density(t) |y'(t)| dt by adaptive quadrature."""
    def integrand(t):
        d = point - curve_xy(t)
        return np.log(np.hypot(d[0], d[1])) * density(t) * curve_speed(t) / (2 * np.pi)

    pts = None if t_sing is None else [t_sing % (2 * np.pi)]
    val, _ = quad(integrand, 0.0, 2 * np.pi, points=pts, limit=800, epsabs=1e-14, epsrel=1e-13)
    return val


def weyl_count(length, bound):
    return length * np.sqrt(bound) / np.pi
