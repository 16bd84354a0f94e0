"""Independent reference values: closed forms and brute-force sums.

Nothing here calls into the package except for plain data types.
"""

import numpy as np
from scipy import integrate


def gaussian_line_integral(r, theta, sigma, center=(0.0, 0.0), amplitude=1.0):
    """Line integral of A exp(-|x - c|^2 / s^2) over {x . v_theta = r}."""
    p = center[0] * np.cos(theta) + center[1] * np.sin(theta)
    return amplitude * sigma * np.sqrt(np.pi) * np.exp(-((r - p) ** 2) / sigma**2)


def gaussian_line_integral_dr(r, theta, sigma, center=(0.0, 0.0)):
    p = center[0] * np.cos(theta) + center[1] * np.sin(theta)
    return -2.0 * (r - p) / sigma**2 * gaussian_line_integral(r, theta, sigma, center)


def disc_line_integral(r, theta, radius, center=(0.0, 0.0), amplitude=1.0):
    """Chord length of a disc times its amplitude."""
    p = center[0] * np.cos(theta) + center[1] * np.sin(theta)
    d = r - p
    return amplitude * 2.0 * np.sqrt(np.maximum(radius**2 - d**2, 0.0))


def gaussian_fourier(xi1, xi2, sigma, center=(0.0, 0.0), amplitude=1.0):
    """int A exp(-|x - c|^2 / s^2) exp(-i xi . x) dx."""
    q = xi1**2 + xi2**2
    return amplitude * np.pi * sigma**2 * np.exp(-(sigma**2) * q / 4.0) * np.exp(-1j * (xi1 * center[0] + xi2 * center[1]))


def dft_loop(x):
    """Textbook O(N^2) loop, averaging normalization."""
    x = np.asarray(x, dtype=complex)
    n = x.size
    out = np.zeros(n, dtype=complex)
    for k in range(n):
        acc = 0j
        for j in range(n):
            acc += x[j] * np.exp(-2j * np.pi * k * j / n)
        out[k] = acc / n
    return out


def chebyshev(k, x):
    c = np.zeros(abs(k) + 1)
    c[-1] = 1.0
    return np.polynomial.chebyshev.chebval(x, c)


def abel_quad(k, h, s):
    """A_k h(s) = 2 int_0^{sqrt(1-s^2)} h(sqrt(s^2+t^2)) T_k(s/sqrt(s^2+t^2)) dt by adaptive quadrature."""
    out = []
    for si in np.atleast_1d(s):
        top = np.sqrt(max(1.0 - si * si, 0.0))

        def f(t, si=si):
            rr = np.sqrt(si * si + t * t)
            return h(rr) * chebyshev(k, si / rr)

        val, _ = integrate.quad(f, 0.0, top, epsabs=1e-13, epsrel=1e-12, limit=200)
        out.append(2.0 * val)
    return np.array(out)


def kernel_K_quad(k, r, t):
    """int_r^t T_k(s/t) T_k(s/r) / (s sqrt(1 - s^2/t^2) sqrt(s^2/r^2 - 1)) ds.

    The endpoint singularities are carried by the quadrature weight
    (s - r)^(-1/2) (t - s)^(-1/2).
    """

    def f(s):
        return chebyshev(k, s / t) * chebyshev(k, s / r) * r * t / (s * np.sqrt(t + s) * np.sqrt(s + r))

    val, _ = integrate.quad(f, r, t, weight="alg", wvar=(-0.5, -0.5), epsabs=1e-11, epsrel=1e-11, limit=400)
    return val


def exit_time_bisect(x, v, iters=200):
    lo, hi = 0.0, 2.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        p = (x[0] + mid * v[0], x[1] + mid * v[1])
        if p[0] ** 2 + p[1] ** 2 <= 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def torus_geodesic_average(values, w, i, j):
    """Average of lattice samples along y + 2 pi t w, stepping one lattice point at a time."""
    N = values.shape[0]
    g = np.gcd(abs(w[0]), abs(w[1]))
    a, b = w[0] // g, w[1] // g
    acc = 0j
    for m in range(N):
        acc += values[(i + m * a) % N, (j + m * b) % N]
    return acc / N


def ray_integral_quad(func, x, v, tau):
    """int_0^tau func(x + t v) dt by adaptive quadrature."""
    val, _ = integrate.quad(lambda t: func(x[0] + t * v[0], x[1] + t * v[1]), 0.0, tau, epsabs=1e-12, limit=200)
    return val


def line_integral_quad(func, r, theta):
    """Integral of func over the chord {x . v_theta = r} of the unit disc."""
    half = np.sqrt(max(1.0 - r * r, 0.0))
    c, s = np.cos(theta), np.sin(theta)
    val, _ = integrate.quad(lambda t: func(r * c - t * s, r * s + t * c), -half, half, epsabs=1e-12, limit=200)
    return val


def gaussian_backprojection(x1, x2, sigma):
    """int_0^{2pi} s sqrt(pi) exp(-(x . v)^2 / s^2) d theta for a centered Gaussian."""
    val, _ = integrate.quad(
        lambda th: sigma * np.sqrt(np.pi) * np.exp(-((x1 * np.cos(th) + x2 * np.sin(th)) ** 2) / sigma**2),
        0.0,
        2.0 * np.pi,
        limit=200,
    )
    return val
