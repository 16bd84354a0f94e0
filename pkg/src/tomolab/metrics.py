"""Error measures and the reconstruction metrics record."""

import numpy as np

__all__ = ["rel_l2", "rel_linf", "pairwise_rel_l2", "metrics_record"]


def _vals(x):
    return np.asarray(getattr(x, "values", x), dtype=float)


def rel_l2(estimate, truth, mask=None):
    """||estimate - truth|| / ||truth|| over ``mask`` (all pixels by default)."""
    e, t = _vals(estimate), _vals(truth)
    if mask is None:
        mask = np.ones(t.shape, dtype=bool)
    denom = np.linalg.norm(t[mask])
    if denom == 0:
        return float(np.linalg.norm(e[mask]))
    return float(np.linalg.norm((e - t)[mask]) / denom)


def rel_linf(estimate, truth, mask=None):
    """max |estimate - truth| / max |truth|."""
    e, t = _vals(estimate), _vals(truth)
    if mask is None:
        mask = np.ones(t.shape, dtype=bool)
    denom = np.abs(t[mask]).max()
    diff = np.abs((e - t)[mask]).max()
    return float(diff / denom) if denom else float(diff)


def pairwise_rel_l2(images, mask=None):
    """Symmetric disagreement: ||a - b|| / max(||a||, ||b||) for every pair of named images."""
    names = list(images)
    out = {}
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            va, vb = _vals(images[a]), _vals(images[b])
            m = np.ones(va.shape, dtype=bool) if mask is None else mask
            denom = max(np.linalg.norm(va[m]), np.linalg.norm(vb[m]))
            out[f"{a}/{b}"] = float(np.linalg.norm((va - vb)[m]) / denom) if denom else 0.0
    return out


def metrics_record(method, n, n_r, n_theta, l2_rel=None, linf_rel=None, runtime_ms=None, **extra):
    rec = {
        "method": method,
        "n": int(n),
        "Nr": int(n_r),
        "Ntheta": int(n_theta),
        "l2_rel": l2_rel,
        "linf_rel": linf_rel,
        "runtime_ms": runtime_ms,
    }
    rec.update(extra)
    return rec
