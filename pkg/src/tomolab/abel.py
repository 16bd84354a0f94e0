"""Generalized Abel transforms A_k with Chebyshev kernels and their inverses.

All singular integrals are evaluated after the substitution
``r = sqrt(s^2 + t^2)``, which turns the inverse-square-root singularity at
the lower limit into a smooth integrand in ``t``.
"""

from dataclasses import dataclass, field

import numpy as np

from .harmonics import chebyshev_T_ext

__all__ = [
    "RadialProfile",
    "uniform_radii",
    "abel_forward",
    "abel_inverse",
    "abel_forward_unbounded",
    "kernel_K",
    "interp_local_cubic",
    "DEFAULT_MAX_GAIN",
]

# Largest tolerated kernel amplification T_k(1/r) in abel_inverse.  Data
# errors are multiplied by this factor, so radii beyond it are not resolved.
DEFAULT_MAX_GAIN = 1e6


@dataclass
class RadialProfile:
    """Samples of a radial function on a uniform, strictly increasing grid.

    ``resolved`` marks radii where the values are trustworthy; abel_inverse
    clears it where the kernel gain exceeds its ceiling.
    """

    radii: np.ndarray
    values: np.ndarray
    resolved: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=float)
        self.values = np.asarray(self.values)
        if self.radii.ndim != 1 or self.radii.size < 4:
            raise ValueError("RadialProfile needs at least 4 radii")
        if self.values.shape != self.radii.shape:
            raise ValueError("radii and values must have the same shape")
        steps = np.diff(self.radii)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise ValueError("radii must be uniform and strictly increasing")
        if self.resolved is None:
            self.resolved = np.ones(self.radii.size, dtype=bool)

    @property
    def step(self):
        return self.radii[1] - self.radii[0]


def uniform_radii(M, r_max=1.0):
    """r_i = i * r_max / M for i = 1..M."""
    return np.arange(1, M + 1) * (r_max / M)


def interp_local_cubic(x, y, q):
    """Four-point Lagrange interpolation on a uniform grid.

    Each query uses only its four nearest grid values, so modifying the
    samples changes the interpolant only within two grid steps.  Queries
    outside ``[x[0], x[-1]]`` are clamped to the end intervals' cubics.
    """
    x = np.asarray(x, dtype=float)
    h = x[1] - x[0]
    pos = (np.asarray(q, dtype=float) - x[0]) / h
    i = np.clip(np.floor(pos).astype(np.intp) - 1, 0, x.size - 4)
    t = pos - i
    w0 = -(t - 1) * (t - 2) * (t - 3) / 6
    w1 = t * (t - 2) * (t - 3) / 2
    w2 = -t * (t - 1) * (t - 3) / 2
    w3 = t * (t - 1) * (t - 2) / 6
    return w0 * y[i] + w1 * y[i + 1] + w2 * y[i + 2] + w3 * y[i + 3]


def _nodes(n):
    return (np.arange(n) + 0.5) / n


def abel_forward(k, h, n_t=None):
    """The k-th generalized Abel transform of a profile on (0, 1].

    ``A_k h(s) = 2 int_0^{sqrt(1-s^2)} h(sqrt(s^2+t^2)) T_k(s/sqrt(s^2+t^2)) dt``
    by the composite midpoint rule with ``n_t`` nodes per radius (default
    ``4 M``).  The value at s = 1 is exactly zero.
    """
    s = h.radii
    if n_t is None:
        n_t = max(4 * s.size, 256)
    half = np.sqrt(np.clip(1.0 - s * s, 0.0, None))
    t = half[:, None] * _nodes(n_t)[None, :]
    rr = np.sqrt(s[:, None] ** 2 + t * t)
    vals = interp_local_cubic(s, h.values, np.minimum(rr, s[-1])) * chebyshev_T_ext(k, s[:, None] / rr)
    out = 2.0 * vals.sum(axis=1) * half / n_t
    return RadialProfile(s, out)


def abel_inverse(k, g, n_t=None, max_gain=DEFAULT_MAX_GAIN):
    """Invert A_k: ``h(r) = -(1/pi) d/dr int_r^1 g(s) T_k(s/r) / (s sqrt((s/r)^2 - 1)) ds``.

    Parameters
    ----------
    k : int
        Harmonic index; only |k| matters.
    g : RadialProfile
        Data on a uniform grid ending at 1, vanishing there.  The grid may
        start anywhere in (0, 1); only samples at s >= r enter h(r).
    n_t : int, optional
        Midpoint nodes of the inner integral per radius, default ``4 M``.
    max_gain : float
        Ceiling on the kernel amplification ``T_k(1/r)``.  Radii where it is
        exceeded are returned as zero and flagged unresolved; for smooth
        functions the k-th harmonic is O(r^|k|) there.

    Returns
    -------
    RadialProfile
    """
    r = g.radii
    if n_t is None:
        n_t = max(4 * r.size, 256)
    with np.errstate(over="ignore"):
        gain = np.abs(chebyshev_T_ext(k, 1.0 / r))
    resolved = gain <= max_gain
    # the derivative stencil reaches one step either side
    resolved &= np.concatenate([resolved[1:], [True]]) & np.concatenate([[True], resolved[:-1]])
    need = resolved | np.concatenate([resolved[1:], [False]]) | np.concatenate([[False], resolved[:-1]])
    rn = r[need]
    half = np.sqrt(np.clip(1.0 - rn * rn, 0.0, None))
    t = half[:, None] * _nodes(n_t)[None, :]
    s = np.sqrt(rn[:, None] ** 2 + t * t)
    kernel = chebyshev_T_ext(k, s / rn[:, None]) * rn[:, None] / (s * s)
    vals = interp_local_cubic(r, g.values, np.minimum(s, r[-1])) * kernel
    J = np.zeros(r.size, dtype=vals.dtype)
    J[need] = vals.sum(axis=1) * half / n_t
    h = -np.gradient(J, r, edge_order=2) / np.pi
    h = np.where(resolved, h, 0.0)
    return RadialProfile(r, h, resolved)


def abel_forward_unbounded(h, n_t=None):
    """Abel transform ``2 int_r^R h(s) s / sqrt(s^2 - r^2) ds`` on [0, R].

    ``h`` lives on a uniform grid ending at R (it may start at 0) and must
    vanish at R.  After the substitution the integrand is ``h(sqrt(r^2+t^2))``.
    """
    r = h.radii
    R = r[-1]
    if n_t is None:
        n_t = max(4 * r.size, 256)
    half = np.sqrt(np.clip(R * R - r * r, 0.0, None))
    t = half[:, None] * _nodes(n_t)[None, :]
    rr = np.sqrt(r[:, None] ** 2 + t * t)
    vals = interp_local_cubic(r, h.values, np.minimum(rr, R))
    return RadialProfile(r, 2.0 * vals.sum(axis=1) * half / n_t)


def _gauss_legendre_ld(n):
    """Gauss-Legendre nodes and weights refined to long double precision."""
    x0, _ = np.polynomial.legendre.leggauss(n)
    x = x0.astype(np.longdouble)
    for _ in range(3):
        p_prev, p = np.ones_like(x), x.copy()
        for j in range(2, n + 1):
            p_prev, p = p, ((2 * j - 1) * x * p - (j - 1) * p_prev) / j
        dp = n * (x * p - p_prev) / (x * x - 1)
        x = x - p / dp
    p_prev, p = np.ones_like(x), x.copy()
    for j in range(2, n + 1):
        p_prev, p = p, ((2 * j - 1) * x * p - (j - 1) * p_prev) / j
    dp = n * (x * p - p_prev) / (x * x - 1)
    w = 2 / ((1 - x * x) * dp * dp)
    return x, w


def _cheb_ld(k, x):
    # x >= 0 here; cosine form below 1, cosh form above
    k = abs(int(k))
    out = np.empty_like(x)
    inside = x <= 1
    out[inside] = np.cos(k * np.arccos(x[inside]))
    out[~inside] = np.cosh(k * np.arccosh(x[~inside]))
    return out


def kernel_K(k, r, t, n_nodes=96):
    """The integral K_k(r, t) for 0 < r < t, which equals pi/2.

    Split at s = sqrt(r t); near s = r substitute s = sqrt(r^2 + u^2), near
    s = t substitute s = sqrt(t^2 - u^2).  Both pieces are then smooth and
    are integrated by Gauss-Legendre with ``n_nodes`` points.  The integrand
    reaches T_k(t/r) in size while the result is O(1), so the sums run in
    long double.
    """
    r = float(r)
    t = float(t)
    if not 0.0 < r < t:
        raise ValueError(f"kernel_K needs 0 < r < t, got r={r}, t={t}")
    x, w = _gauss_legendre_ld(n_nodes)
    r = np.longdouble(r)
    t = np.longdouble(t)
    m = np.sqrt(r * t)

    # piece 1: s in (r, m]
    u_max = np.sqrt(m * m - r * r)
    u = u_max * (x + 1) / 2
    s = np.sqrt(r * r + u * u)
    f1 = _cheb_ld(k, s / t) / np.sqrt(1 - (s / t) ** 2) * _cheb_ld(k, s / r) * r / (s * s)
    part1 = u_max / 2 * np.sum(w * f1)

    # piece 2: s in [m, t)
    u_max = np.sqrt(t * t - m * m)
    u = u_max * (x + 1) / 2
    s = np.sqrt(t * t - u * u)
    f2 = _cheb_ld(k, s / t) * t / (s * s) * _cheb_ld(k, s / r) / np.sqrt((s / r) ** 2 - 1)
    part2 = u_max / 2 * np.sum(w * f2)
    return float(part1 + part2)
