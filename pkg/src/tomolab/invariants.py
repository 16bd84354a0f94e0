"""Quick invariant checks, one group per module, run by ``tomolab verify``."""

import tempfile
from pathlib import Path

import numpy as np

from . import experiments
from .abel import RadialProfile, abel_forward, abel_inverse, kernel_K, uniform_radii
from .geometry import canonicalize, normal_to_ray, ray_to_normal
from .grid import make_phantom, read_csv, write_csv
from .harmonics import dft_1d, dft_1d_direct
from .projector import xray_forward
from .torus import band_limited_field, field_evaluator, torus_fourier_recover, torus_xray

__all__ = ["GROUPS", "run_groups"]


def _check(name, value, threshold):
    return {"check": name, "value": float(value), "threshold": float(threshold), "passed": bool(value < threshold)}


def grid_checks(seed):
    f = make_phantom("disc", {"center": [0.1, 0.0], "radius": 0.5, "amplitude": 2.0}, 128)
    mass_err = abs(f.integral() - 2.0 * np.pi * 0.25) / (2.0 * np.pi * 0.25)
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "f.csv"
        write_csv(f, path)
        back = read_csv(path)
    return [
        _check("disc mass, relative", mass_err, 1e-2),
        _check("csv round trip, max abs", np.abs(back.values - f.values).max(), 1e-300),
    ]


def geometry_checks(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for r, th in zip(rng.uniform(-0.99, 0.99, 50), rng.uniform(-10.0, 10.0, 50)):
        a = canonicalize(r, th)
        b = ray_to_normal(normal_to_ray(r, th))
        worst = max(worst, abs(a[0] - b[0]), abs(np.angle(np.exp(1j * (a[1] - b[1])))))
    return [_check("ray/normal round trip", worst, 1e-12)]


def harmonics_checks(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    return [_check("fft vs direct DFT", np.abs(dft_1d(x) - dft_1d_direct(x)).max(), 1e-12)]


def abel_checks(seed):
    r = uniform_radii(256)
    worst = 0.0
    for k in (0, 1, 2, 5):
        h = RadialProfile(r, r**k * (1.0 - r * r) ** 3)
        back = abel_inverse(k, abel_forward(k, h))
        m = back.resolved
        worst = max(worst, np.linalg.norm((back.values - h.values)[m]) / np.linalg.norm(h.values[m]))
    kern = max(abs(kernel_K(k, 0.3, 0.8) - np.pi / 2) for k in range(9))
    return [_check("Abel round trip, relative L2", worst, 1e-2), _check("K_k = pi/2", kern, 1e-4)]


def projector_checks(seed):
    s = 0.25
    f = make_phantom("gaussian", {"center": [0.0, 0.0], "sigma": s}, 256)
    g = xray_forward(f, 64, 16)
    exact = s * np.sqrt(np.pi) * np.exp(-(g.r**2) / s**2)
    err = np.abs(g.values - exact[:, None]).max() / exact.max()
    return [_check("Gaussian line integrals, max relative", err, 1e-3)]


def recon_checks(seed):
    out = experiments.cross_methods(n=128, n_r=200, n_theta=180, k_max=40, tol=0.05)
    checks = [_check(f"{r['method']} relative L2", r["l2_rel"], 0.05) for r in out["records"]]
    checks.append(_check("pairwise disagreement", max(out["pairwise"].values()), 0.05))
    lim = experiments.limited_angle(n=64, n_r=100, n_theta=90)
    checks.append(_check("limited angle: covered vs full", lim["covered_vs_full_rel_error"], 1e-3))
    checks.append(_check("limited angle: spectrum outside D-perp", 0.0 if lim["spectrum_in_dperp"] else 1.0, 0.5))
    return checks


def torus_checks(seed):
    rng = np.random.default_rng(seed)
    f = band_limited_field(32, 6, rng)
    spec = torus_fourier_recover(field_evaluator(f), 32, 6)
    rec = np.fft.ifft2(spec.coeffs) * spec.coeffs.size
    once = torus_xray(f, (2, 1))
    twice = torus_xray(once, (2, 1))
    return [
        _check("band-limited recovery", np.abs(rec - f.values).max(), 1e-10),
        _check("X-ray idempotence", np.abs(twice.values - once.values).max(), 1e-12),
    ]


def bundle_checks(seed):
    s = experiments.santalo(n=64, n_theta=32)
    c = experiments.commutators(levels=((16, 8), (32, 16)))
    p = experiments.pestov(n=64, n_theta=32, levels=((16, 8), (32, 16)))
    return [
        _check("Santalo, relative", max(s["rel_errors"].values()), 0.005),
        _check("commutator refinement failures", 0.0 if c["passed"] else 1.0, 0.5),
        _check("Pestov relative residual", p["rel_residual"], 0.05),
    ]


def vector_checks(seed):
    d = experiments.doppler(n=128, n_r=200, n_theta=90, bundle_theta=32)
    return [
        _check("Doppler of a gradient, relative", d["gradient_doppler_rel"], 1e-3),
        _check("solenoidal round trip", d["solenoidal_l2_rel"], 0.1),
        _check("potential recovery", d["potential_l2_rel"], 0.02),
    ]


GROUPS = {
    "grid": grid_checks,
    "geometry": geometry_checks,
    "harmonics": harmonics_checks,
    "abel": abel_checks,
    "projector": projector_checks,
    "recon": recon_checks,
    "torus": torus_checks,
    "bundle": bundle_checks,
    "vector": vector_checks,
}


def run_groups(names=None, seed=0):
    """Run the selected groups; returns ``(report, all_passed)``."""
    names = list(GROUPS) if not names else list(names)
    unknown = [n for n in names if n not in GROUPS]
    if unknown:
        raise ValueError(f"unknown suite(s) {', '.join(unknown)}; choose from {', '.join(GROUPS)}")
    report = {}
    for name in names:
        checks = GROUPS[name](seed)
        report[name] = {"checks": checks, "passed": all(c["passed"] for c in checks)}
    return report, all(r["passed"] for r in report.values())
