"""Numerics on the unit-circle bundle of the disc.

Fields u(x, theta) live on pixel centers inside the unit disc times a
uniform fiber of Ntheta angles.  X differentiates along v_theta, X_perp
along (sin theta, -cos theta), V along the fiber.
"""

import json
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy import ndimage

from .geometry import exit_time
from .grid import ImageGrid, VectorFieldGrid, pixel_centers

__all__ = [
    "BundleGrid",
    "BundleField",
    "op_X",
    "op_V",
    "op_Xperp",
    "integral_function",
    "santalo_check",
    "area_identity",
    "commutator_residuals",
    "pestov_terms",
    "observed_order",
    "refinement_study",
    "check_report",
    "ROUNDOFF_FLOOR",
]

TWO_PI = 2.0 * np.pi

# Residuals below this multiple of their reference norm count as exact.
# Two spatial and two fiber differences amplify rounding by roughly
# (n * n_theta / 4)^2 * eps, about 1e-9 at n = 128, n_theta = 64.
ROUNDOFF_FLOOR = 1e-9


@dataclass
class BundleGrid:
    """Pixel centers with |x| < 1, Ntheta fiber angles and Nb boundary points."""

    n: int
    n_theta: int
    n_boundary: int = None

    def __post_init__(self):
        if self.n < 8 or self.n % 2:
            raise ValueError(f"n must be an even integer >= 8, got {self.n}")
        if self.n_theta < 4:
            raise ValueError(f"need at least 4 fiber angles, got {self.n_theta}")
        if self.n_boundary is None:
            self.n_boundary = 4 * self.n

    @property
    def spacing(self):
        return 2.0 / self.n

    @property
    def theta(self):
        return TWO_PI * np.arange(self.n_theta) / self.n_theta

    def axis(self):
        return pixel_centers(self.n)

    def mesh(self):
        a = self.axis()
        return np.meshgrid(a, a, indexing="ij")

    @property
    def mask(self):
        x1, x2 = self.mesh()
        return np.hypot(x1, x2) < 1.0

    @property
    def support_mask(self):
        """Nodes away from the two spatial layers nearest the circle."""
        x1, x2 = self.mesh()
        return np.hypot(x1, x2) < 1.0 - 2.0 * self.spacing

    @property
    def weight(self):
        """Volume weight of one node."""
        return self.spacing**2 * TWO_PI / self.n_theta

    def boundary(self):
        """Boundary points, their outer normals, and the angle step."""
        t = TWO_PI * np.arange(self.n_boundary) / self.n_boundary
        pts = np.stack([np.cos(t), np.sin(t)], axis=-1)
        return pts, pts.copy(), TWO_PI / self.n_boundary

    def boundary_partition(self, tol=1e-12):
        """Masks (inward, outward, tangential) of shape (Nb, Ntheta) from the sign of v . nu."""
        pts, nu, _ = self.boundary()
        th = self.theta
        dot = nu[:, 0:1] * np.cos(th)[None, :] + nu[:, 1:2] * np.sin(th)[None, :]
        inward = dot < -tol
        outward = dot > tol
        return inward, outward, ~(inward | outward), dot

    def boundary_weights(self):
        """|v . nu| times the boundary and fiber steps, per boundary node."""
        _, _, _, dot = self.boundary_partition()
        _, _, dt = self.boundary()
        return np.abs(dot) * dt * (TWO_PI / self.n_theta)

    def from_function(self, func, compact=False):
        """Sample ``func(x1, x2, theta)`` on the nodes (zero outside the disc)."""
        x1, x2 = self.mesh()
        th = self.theta
        vals = func(x1[..., None], x2[..., None], th[None, None, :])
        vals = np.asarray(vals, dtype=float) * np.ones((self.n, self.n, self.n_theta))
        keep = self.support_mask if compact else self.mask
        return BundleField(self, np.where(keep[..., None], vals, 0.0), compact)

    def zeros(self, compact=True):
        return BundleField(self, np.zeros((self.n, self.n, self.n_theta)), compact)


@dataclass
class BundleField:
    """Real samples ``values[i, j, m] = u(x_i, x_j, theta_m)``."""

    grid: BundleGrid
    values: np.ndarray
    compact: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        shape = (self.grid.n, self.grid.n, self.grid.n_theta)
        if self.values.shape != shape:
            raise ValueError(f"bundle field must have shape {shape}, got {self.values.shape}")
        if self.compact and np.any(self.values[~self.grid.support_mask] != 0.0):
            raise ValueError("compactly supported bundle field is nonzero near the boundary")

    def _new(self, values):
        return BundleField(self.grid, np.where(self.grid.mask[..., None], values, 0.0))

    def __add__(self, other):
        return BundleField(self.grid, self.values + other.values, self.compact and other.compact)

    def __sub__(self, other):
        return BundleField(self.grid, self.values - other.values, self.compact and other.compact)

    def __mul__(self, scalar):
        return BundleField(self.grid, self.values * scalar, self.compact)

    __rmul__ = __mul__

    def integral(self):
        """Volume quadrature over the disc bundle."""
        return float(np.sum(self.values[self.grid.mask]) * self.grid.weight)

    def inner(self, other):
        return float(np.sum((self.values * other.values)[self.grid.mask]) * self.grid.weight)

    def norm2(self):
        return self.inner(self)

    @classmethod
    def pullback(cls, grid, f):
        """The scalar image f as a fiber-independent bundle field."""
        vals = np.broadcast_to(f.values[..., None], (grid.n, grid.n, grid.n_theta))
        return cls(grid, np.where(grid.mask[..., None], vals, 0.0))


def _spatial_derivative(values, mask, h, axis):
    """Central differences inside the disc, second-order one-sided where a neighbor is missing.

    Exact on quadratics wherever a three-point stencil fits in the disc.
    """
    m = np.moveaxis(mask, axis, 0)
    u = np.moveaxis(values, axis, 0)

    def shifted(a, k, fill):
        out = np.full_like(a, fill)
        if k > 0:
            out[:-k] = a[k:]
        else:
            out[-k:] = a[:k]
        return out

    mp1, mm1 = shifted(m, 1, False), shifted(m, -1, False)
    mp2, mm2 = shifted(m, 2, False), shifted(m, -2, False)
    up1, um1 = shifted(u, 1, 0.0), shifted(u, -1, 0.0)
    up2, um2 = shifted(u, 2, 0.0), shifted(u, -2, 0.0)
    central = (up1 - um1) / (2.0 * h)
    forward = (-3.0 * u + 4.0 * up1 - up2) / (2.0 * h)
    backward = (3.0 * u - 4.0 * um1 + um2) / (2.0 * h)
    out = np.zeros_like(u)
    c = m & mp1 & mm1
    f = m & ~c & mp1 & mp2
    b = m & ~c & ~f & mm1 & mm2
    ext = (Ellipsis,) + (None,) * (u.ndim - m.ndim)
    out = np.where(c[ext], central, out)
    out = np.where(f[ext], forward, out)
    out = np.where(b[ext], backward, out)
    return np.moveaxis(out, 0, axis)


def _gradient(u):
    g = u.grid
    d1 = _spatial_derivative(u.values, g.mask, g.spacing, 0)
    d2 = _spatial_derivative(u.values, g.mask, g.spacing, 1)
    return d1, d2


def op_X(u):
    """Derivative along the flow: cos(theta) d/dx1 + sin(theta) d/dx2."""
    d1, d2 = _gradient(u)
    th = u.grid.theta
    return u._new(np.cos(th) * d1 + np.sin(th) * d2)


def op_Xperp(u):
    """sin(theta) d/dx1 - cos(theta) d/dx2."""
    d1, d2 = _gradient(u)
    th = u.grid.theta
    return u._new(np.sin(th) * d1 - np.cos(th) * d2)


def op_V(u):
    """Spectral derivative along the fiber; the Nyquist mode is dropped."""
    nt = u.grid.n_theta
    k = np.fft.fftfreq(nt, d=1.0 / nt)
    if nt % 2 == 0:
        k[nt // 2] = 0.0
    spec = np.fft.fft(u.values, axis=-1) * (1j * k)
    return u._new(np.fft.ifft(spec, axis=-1).real)


# -- along-ray integrals ---------------------------------------------------


@njit(cache=True)
def _ray_kernel(flats, per_theta, factors, n, px, py, cos_t, sin_t, tau, step, out):
    inv_h = n / 2.0
    stride = n + 2
    n_comp = factors.shape[0]
    for m in range(cos_t.size):
        c = cos_t[m]
        s = sin_t[m]
        slot = m if per_theta else 0
        for p in range(px.size):
            length = tau[p, m]
            if length <= 0.0:
                out[p, m] = 0.0
                continue
            steps = int(np.ceil(length / step))
            hh = length / steps
            acc = 0.0
            for k in range(steps):
                t = (k + 0.5) * hh
                x1 = px[p] + t * c
                x2 = py[p] + t * s
                u = min(max((x1 + 1.0) * inv_h + 0.5, 0.0), n + 1.0)
                v = min(max((x2 + 1.0) * inv_h + 0.5, 0.0), n + 1.0)
                iu = min(int(u), n)
                iv = min(int(v), n)
                fu = u - iu
                fv = v - iv
                base = iu * stride + iv
                val = 0.0
                for q in range(n_comp):
                    fac = factors[q, m]
                    if fac != 0.0:
                        fl = flats[slot, q]
                        val += fac * ((fl[base] * (1 - fu) + fl[base + stride] * fu) * (1 - fv)
                                      + (fl[base + 1] * (1 - fu) + fl[base + stride + 1] * fu) * fv)
                acc += val * hh
            out[p, m] = acc


def _pad_flat(vals):
    # edge replication: rays near the circle pass outside the outermost pixel centers
    return np.pad(vals, 1, mode="edge").ravel()


def _ray_integrals(images, factors, per_theta, points, theta, tau, step, n):
    """images: list over slots of lists over components of (n, n) arrays."""
    flats = np.stack([np.stack([_pad_flat(c) for c in comps]) for comps in images])
    out = np.zeros((points.shape[0], theta.size))
    _ray_kernel(flats, per_theta, np.ascontiguousarray(factors, dtype=float), n,
                np.ascontiguousarray(points[:, 0]), np.ascontiguousarray(points[:, 1]),
                np.cos(theta), np.sin(theta), np.ascontiguousarray(tau), float(step), out)
    return out


def integral_function(f, grid, step=None):
    """Integral of f along the ray from each node to the circle.

    Scalar f is pulled back; a vector field contributes f(x) . v_theta.
    Midpoint rule with step at most half a pixel.
    """
    if step is None:
        step = grid.spacing / 2.0
    if step > grid.spacing / 2.0 * (1 + 1e-12):
        raise ValueError(f"step {step} exceeds half the pixel spacing {grid.spacing / 2.0}")
    if isinstance(f, VectorFieldGrid):
        comps = [f.f1.values, f.f2.values]
        factors = np.stack([np.cos(grid.theta), np.sin(grid.theta)])
        n_img = f.n
    elif isinstance(f, ImageGrid):
        comps = [f.values]
        factors = np.ones((1, grid.n_theta))
        n_img = f.n
    else:
        raise TypeError(f"integral_function needs an ImageGrid or VectorFieldGrid, got {type(f).__name__}")
    if n_img != grid.n:
        raise ValueError(f"image size {n_img} does not match the bundle grid {grid.n}")
    mask = grid.mask
    x1, x2 = grid.mesh()
    pts = np.stack([x1[mask], x2[mask]], axis=-1)
    th = grid.theta
    v = np.stack([np.cos(th), np.sin(th)], axis=-1)
    tau = exit_time(pts[:, None, :], v[None, :, :])
    vals = _ray_integrals([comps], factors, False, pts, th, tau, step, grid.n)
    out = np.zeros((grid.n, grid.n, grid.n_theta))
    out[mask] = vals
    return BundleField(grid, out)


def _extend_outward(u):
    """Copy each fiber slice to out-of-disc pixels from the nearest disc pixel."""
    mask = u.grid.mask
    _, (ii, jj) = ndimage.distance_transform_edt(~mask, return_indices=True)
    return u.values[ii, jj, :]


def santalo_check(g, step=None):
    """Both sides of the bundle change of variables for g.

    ``lhs`` is the volume quadrature of g; ``rhs`` integrates g along the
    flow from every inward boundary node and sums with the weights
    |v . nu| d(boundary) d(theta).
    """
    grid = g.grid
    if step is None:
        step = grid.spacing / 2.0
    lhs = g.integral()
    vals = _extend_outward(g)
    pts, _, _ = grid.boundary()
    inward, _, _, dot = grid.boundary_partition()
    tau = np.where(inward, -2.0 * dot, 0.0)
    slices = [[vals[:, :, m]] for m in range(grid.n_theta)]
    along = _ray_integrals(slices, np.ones((1, grid.n_theta)), True, pts, grid.theta, tau, step, grid.n)
    rhs = float(np.sum(along * grid.boundary_weights() * inward))
    return lhs, rhs


def area_identity(grid):
    """(1/2 pi) times the boundary quadrature of the exit time; the disc area."""
    inward, _, _, dot = grid.boundary_partition()
    tau = np.where(inward, -2.0 * dot, 0.0)
    return float(np.sum(tau * grid.boundary_weights() * inward) / TWO_PI)


# -- identities ------------------------------------------------------------


def commutator_residuals(u):
    """L2 norms of ([X,V]-Xp)u, ([V,Xp]-X)u, [X,Xp]u and ([XV,VX]+X^2)u, with reference norms."""
    X, V, P = op_X, op_V, op_Xperp
    Xu, Vu, Pu = X(u), V(u), P(u)
    r1 = X(Vu) - V(Xu) - Pu
    r2 = V(Pu) - P(Vu) - Xu
    r3 = X(Pu) - P(Xu)
    XX = X(Xu)
    r4 = X(V(V(Xu))) - V(X(X(Vu))) + XX
    refs = [Pu, Xu, X(Pu), XX]
    return {
        name: (float(np.sqrt(r.norm2())), float(np.sqrt(ref.norm2())))
        for name, r, ref in zip(("XV-Xperp", "VXperp-X", "XXperp", "XVVX+XX"), (r1, r2, r3, r4), refs)
    }


def pestov_terms(u):
    """Squared norms |VXu|^2, |XVu|^2, |Xu|^2 and the residual |VXu|^2 - |XVu|^2 - |Xu|^2."""
    if not u.compact:
        raise ValueError("the energy identity needs a compactly supported field (set compact=True)")
    Xu = op_X(u)
    a = op_V(Xu).norm2()
    b = op_X(op_V(u)).norm2()
    c = Xu.norm2()
    return a, b, c, a - b - c


def observed_order(coarse, fine, ref_coarse=1.0, ref_fine=1.0, floor=ROUNDOFF_FLOOR):
    """log2 of the residual ratio under halving, or inf when both sit at the roundoff floor.

    Returns ``(order, at_floor)``.
    """
    at_floor = coarse <= floor * max(ref_coarse, 1e-300) and fine <= floor * max(ref_fine, 1e-300)
    if at_floor:
        return float("inf"), True
    if fine <= 0.0:
        return float("inf"), False
    return float(np.log2(coarse / fine)), False


def refinement_study(make_field, levels):
    """Commutator and energy residuals for ``make_field(grid)`` over grid levels.

    ``levels`` is a list of ``(n, n_theta)``; each consecutive pair gives an
    observed order per residual.
    """
    rows = []
    for n, nt in levels:
        grid = BundleGrid(n, nt)
        u = make_field(grid)
        comm = commutator_residuals(u)
        a, b, c, res = pestov_terms(u)
        comm["pestov"] = (abs(res), a)
        rows.append({"n": n, "n_theta": nt, "residuals": comm})
    orders = []
    for lo, hi in zip(rows, rows[1:]):
        entry = {}
        for name in lo["residuals"]:
            (r0, f0), (r1, f1) = lo["residuals"][name], hi["residuals"][name]
            order, floor = observed_order(r0, r1, f0, f1)
            entry[name] = {"order": order, "at_floor": floor}
        orders.append(entry)
    return rows, orders


def check_report(check, grid, residual, norm_refs, order_estimate=None):
    """JSON record for one identity check."""
    rec = {
        "check": check,
        "grid": {"n": grid.n, "n_theta": grid.n_theta, "n_boundary": grid.n_boundary},
        "residual": residual,
        "norm_refs": norm_refs,
        "order_estimate": order_estimate,
    }
    return json.dumps(_plain(rec), sort_keys=True)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        obj = obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj
