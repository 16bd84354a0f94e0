"""Image lattice on [-1, 1]^2, phantoms, bilinear sampling and file IO."""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "ImageGrid",
    "VectorFieldGrid",
    "pixel_centers",
    "make_phantom",
    "sample_bilinear",
    "write_csv",
    "read_csv",
    "write_image",
    "write_vector_csv",
    "read_vector_csv",
    "PHANTOM_KINDS",
]

PHANTOM_KINDS = ("gaussian", "disc", "annulus", "bump", "sum")

# feature supports (open sets) must lie within this radius
FEATURE_RADIUS = 0.9


class PhantomError(ValueError):
    """A phantom feature does not fit inside the unit disc."""


def pixel_centers(n):
    """1D pixel-center coordinates -1 + (i + 1/2) * 2/n."""
    return -1.0 + (np.arange(n) + 0.5) * (2.0 / n)


@dataclass
class ImageGrid:
    """Square lattice of real samples on [-1, 1]^2.

    ``values[i, j]`` is the sample at ``(x1_i, x2_j)`` with
    ``x_i = -1 + (i + 1/2) * spacing``.  When ``supported`` is set the
    samples within two pixels of the unit circle (and outside it) are zero.
    """

    values: np.ndarray
    supported: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            raise ValueError(f"ImageGrid needs a square 2D array, got {self.values.shape}")
        n = self.values.shape[0]
        if n < 2 or n % 2:
            raise ValueError(f"ImageGrid size must be a positive even integer, got {n}")
        if self.supported:
            margin = self.margin_mask()
            if np.any(self.values[margin] != 0.0):
                raise ValueError("supported ImageGrid has nonzero samples at the support margin")

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def spacing(self):
        return 2.0 / self.n

    def axis(self):
        return pixel_centers(self.n)

    def mesh(self):
        """Pixel-center coordinate arrays ``(x1, x2)`` in ``ij`` indexing."""
        a = self.axis()
        return np.meshgrid(a, a, indexing="ij")

    def radius(self):
        x1, x2 = self.mesh()
        return np.hypot(x1, x2)

    def margin_mask(self):
        """Pixels with |x| >= 1 - 2*spacing."""
        return self.radius() >= 1.0 - 2.0 * self.spacing

    def disc_mask(self, r=1.0):
        return self.radius() < r

    @classmethod
    def zeros(cls, n, supported=True):
        return cls(np.zeros((n, n)), supported=supported)

    @classmethod
    def from_function(cls, func, n, supported=True):
        """Sample ``func(x1, x2)`` at pixel centers, truncating to the support when asked."""
        a = pixel_centers(n)
        x1, x2 = np.meshgrid(a, a, indexing="ij")
        vals = np.asarray(func(x1, x2), dtype=float) * np.ones_like(x1)
        if supported:
            vals = np.where(np.hypot(x1, x2) >= 1.0 - 2.0 * (2.0 / n), 0.0, vals)
        return cls(vals, supported=supported)

    def __add__(self, other):
        return ImageGrid(self.values + other.values, self.supported and other.supported)

    def __mul__(self, scalar):
        return ImageGrid(self.values * scalar, self.supported)

    __rmul__ = __mul__

    def integral(self):
        """Riemann sum of the samples times the pixel area."""
        return float(self.values.sum() * self.spacing**2)


@dataclass
class VectorFieldGrid:
    """Two ImageGrids sharing one lattice: the components f1 and f2."""

    f1: ImageGrid
    f2: ImageGrid

    def __post_init__(self):
        if self.f1.n != self.f2.n or self.f1.supported != self.f2.supported:
            raise ValueError("vector field components must share n and support flag")

    @property
    def n(self):
        return self.f1.n

    @property
    def supported(self):
        return self.f1.supported

    @classmethod
    def from_function(cls, func, n, supported=True):
        """``func(x1, x2)`` returns the pair of component arrays."""
        a = pixel_centers(n)
        x1, x2 = np.meshgrid(a, a, indexing="ij")
        c1, c2 = func(x1, x2)
        out = []
        for c in (c1, c2):
            c = np.asarray(c, dtype=float) * np.ones_like(x1)
            if supported:
                c = np.where(np.hypot(x1, x2) >= 1.0 - 2.0 * (2.0 / n), 0.0, c)
            out.append(ImageGrid(c, supported=supported))
        return cls(*out)

    def magnitude(self):
        return np.hypot(self.f1.values, self.f2.values)

    def __add__(self, other):
        return VectorFieldGrid(self.f1 + other.f1, self.f2 + other.f2)

    def __sub__(self, other):
        return VectorFieldGrid(self.f1 + other.f1 * -1.0, self.f2 + other.f2 * -1.0)


# -- phantoms ---------------------------------------------------------------

def _center(params):
    c = np.asarray(params.get("center", (0.0, 0.0)), dtype=float)
    if c.shape != (2,):
        raise PhantomError(f"center must be a 2-vector, got {c!r}")
    return c


def _check_fits(kind, extent):
    if extent > FEATURE_RADIUS:
        raise PhantomError(
            f"{kind} phantom reaches |x| = {extent:.4g}; features must stay within |x| <= {FEATURE_RADIUS}"
        )


def _gaussian(x1, x2, params):
    c = _center(params)
    sigma = float(params.get("sigma", 0.25))
    amp = float(params.get("amplitude", 1.0))
    if sigma <= 0:
        raise PhantomError("gaussian sigma must be positive")
    _check_fits("gaussian", float(np.hypot(*c)))
    return amp * np.exp(-((x1 - c[0]) ** 2 + (x2 - c[1]) ** 2) / sigma**2)


def _disc(x1, x2, params):
    c = _center(params)
    radius = float(params.get("radius", 0.5))
    amp = float(params.get("amplitude", 1.0))
    if radius <= 0:
        raise PhantomError("disc radius must be positive")
    _check_fits("disc", float(np.hypot(*c)) + radius)
    return amp * ((x1 - c[0]) ** 2 + (x2 - c[1]) ** 2 < radius**2)


def _annulus(x1, x2, params):
    c = _center(params)
    inner = float(params.get("inner", 0.6))
    outer = float(params.get("outer", 0.85))
    amp = float(params.get("amplitude", 1.0))
    if not 0 <= inner < outer:
        raise PhantomError("annulus needs 0 <= inner < outer")
    _check_fits("annulus", float(np.hypot(*c)) + outer)
    rho2 = (x1 - c[0]) ** 2 + (x2 - c[1]) ** 2
    return amp * ((rho2 > inner**2) & (rho2 < outer**2))


def _bump(x1, x2, params):
    c = _center(params)
    radius = float(params.get("radius", 0.5))
    amp = float(params.get("amplitude", 1.0))
    if radius <= 0:
        raise PhantomError("bump radius must be positive")
    _check_fits("bump", float(np.hypot(*c)) + radius)
    return amp * bump_profile(((x1 - c[0]) ** 2 + (x2 - c[1]) ** 2) / radius**2)


def bump_profile(q):
    """exp(1 - 1/(1 - q)) for q < 1, zero otherwise (q is the squared scaled radius)."""
    q = np.asarray(q, dtype=float)
    out = np.zeros_like(q)
    inside = q < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - q[inside]))
    return out


_GENERATORS = {
    "gaussian": _gaussian,
    "disc": _disc,
    "annulus": _annulus,
    "bump": _bump,
}


def phantom_function(kind, params):
    """Return ``func(x1, x2)`` for a phantom description.

    ``kind="sum"`` takes ``params={"terms": [(kind, params), ...]}``.
    Feature checks run immediately, so a bad description fails here.
    """
    if kind == "sum":
        terms = [phantom_function(k, p) for k, p in params.get("terms", ())]
        if not terms:
            raise PhantomError("sum phantom needs at least one term")
        return lambda x1, x2: sum(t(x1, x2) for t in terms)
    try:
        gen = _GENERATORS[kind]
    except KeyError:
        raise PhantomError(f"unknown phantom kind {kind!r}; expected one of {PHANTOM_KINDS}") from None
    gen(np.zeros(1), np.zeros(1), params)
    return lambda x1, x2: gen(x1, x2, params)


def make_phantom(kind, params, n):
    """Sample a phantom on an n x n grid with the support flag set.

    Parameters
    ----------
    kind : {"gaussian", "disc", "annulus", "bump", "sum"}
    params : dict
        Per-kind parameters: ``center``, ``amplitude`` and one of ``sigma``
        (gaussian), ``radius`` (disc, bump), ``inner``/``outer`` (annulus);
        ``terms`` for sums.
    n : int
        Samples per axis, even and at least 16.

    Returns
    -------
    ImageGrid
        Samples at pixel centers, zeroed at the support margin.  Gaussian
        tails beyond the margin are truncated.
    """
    if int(n) != n or n < 16 or n % 2:
        raise ValueError(f"n must be an even integer >= 16, got {n}")
    return ImageGrid.from_function(phantom_function(kind, params), int(n), supported=True)


# -- sampling ---------------------------------------------------------------

def sample_bilinear(g, p1, p2=None):
    """Bilinear interpolation of an ImageGrid at points.

    ``p1``/``p2`` are coordinate arrays (or pass a single ``(2, ...)``
    array as ``p1``).  The lattice is extended by zeros, so values fall off
    linearly to 0 one pixel beyond the outermost pixel centers.
    """
    vals = g.values if isinstance(g, ImageGrid) else np.asarray(g, dtype=float)
    if p2 is None:
        p1, p2 = p1
    return _bilinear(vals, np.asarray(p1, dtype=float), np.asarray(p2, dtype=float))


def _bilinear(vals, p1, p2):
    n = vals.shape[0]
    inv_h = n / 2.0
    # fractional index in the zero-padded array (offset 1)
    u = (p1 + 1.0) * inv_h + 0.5
    v = (p2 + 1.0) * inv_h + 0.5
    u = np.clip(u, 0.0, n + 1.0)
    v = np.clip(v, 0.0, n + 1.0)
    i = np.minimum(u.astype(np.intp), n)
    j = np.minimum(v.astype(np.intp), n)
    fu = u - i
    fv = v - j
    padded = np.zeros((n + 2, n + 2))
    padded[1:-1, 1:-1] = vals
    flat = padded.ravel()
    base = i * (n + 2) + j
    f00 = flat[base]
    f01 = flat[base + 1]
    f10 = flat[base + n + 2]
    f11 = flat[base + n + 3]
    return (f00 * (1 - fu) + f10 * fu) * (1 - fv) + (f01 * (1 - fu) + f11 * fu) * fv


# -- file IO ----------------------------------------------------------------

def write_csv(g, path):
    """CSV layout: first line ``n``, then n rows of n reals (row i is x1_i)."""
    path = Path(path)
    vals = g.values
    with path.open("w") as fh:
        fh.write(f"{vals.shape[0]}\n")
        for row in vals:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def _parse_rows(lines, n, path):
    rows = []
    for lineno, line in enumerate(lines, start=2):
        fields = line.strip().split(",")
        if len(fields) != n:
            raise ValueError(f"{path}:{lineno}: expected {n} columns, found {len(fields)}")
        try:
            rows.append([float(f) for f in fields])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    return np.array(rows, dtype=float).reshape(len(rows), n)


def read_csv(path, supported=None):
    """Inverse of :func:`write_csv`.

    The support flag is re-derived from the data unless given explicitly.
    """
    path = Path(path)
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty file")
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise ValueError(f"{path}:1: header must be the integer n, got {lines[0]!r}") from None
    if len(lines) - 1 != n:
        raise ValueError(f"{path}: expected {n} data rows, found {len(lines) - 1}")
    vals = _parse_rows(lines[1:], n, path)
    grid = ImageGrid(vals)
    if supported is None:
        supported = not np.any(vals[grid.margin_mask()] != 0.0)
    return ImageGrid(vals, supported=supported)


def write_image(g, path):
    """Write an 8-bit binary PGM and a ``<name>.scale.json`` sidecar.

    Gray level ``round(255 * (v - min) / (max - min))``; a constant image
    maps to mid-gray 128.  Rows run from top (x2 = +1) to bottom, columns
    along x1.
    """
    path = Path(path)
    vals = g.values
    lo, hi = float(vals.min()), float(vals.max())
    if hi > lo:
        gray = np.rint(255.0 * (vals - lo) / (hi - lo))
    else:
        gray = np.full(vals.shape, 128.0)
    pix = gray.astype(np.uint8).T[::-1]
    h, w = pix.shape
    with path.open("wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(pix.tobytes())
    sidecar = path.with_name(path.stem + ".scale.json")
    sidecar.write_text(json.dumps({"min": lo, "max": hi}))
    return sidecar


def read_pgm(path):
    """Read a binary P5 PGM written by :func:`write_image` as a uint8 array."""
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0].strip() != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    w, h = (int(x) for x in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8, count=w * h).reshape(h, w)


def write_vector_csv(field, path):
    """Two stacked n x n blocks under a single ``n`` header."""
    path = Path(path)
    with path.open("w") as fh:
        fh.write(f"{field.n}\n")
        for comp in (field.f1, field.f2):
            for row in comp.values:
                fh.write(",".join(repr(float(v)) for v in row))
                fh.write("\n")


def read_vector_csv(path):
    path = Path(path)
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    try:
        n = int(lines[0].strip())
    except (IndexError, ValueError):
        raise ValueError(f"{path}:1: header must be the integer n") from None
    if len(lines) - 1 != 2 * n:
        raise ValueError(f"{path}: expected {2 * n} data rows, found {len(lines) - 1}")
    vals = _parse_rows(lines[1:], n, path)
    a, b = ImageGrid(vals[:n]), ImageGrid(vals[n:])
    sup = not (np.any(a.values[a.margin_mask()]) or np.any(b.values[b.margin_mask()]))
    return VectorFieldGrid(ImageGrid(a.values, sup), ImageGrid(b.values, sup))
