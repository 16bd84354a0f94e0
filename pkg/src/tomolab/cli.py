"""Command-line front end.

Exit codes: 0 ok, 1 numerical acceptance failure, 2 usage error,
3 missing or unwritable file, 4 malformed or inconsistent input file.
"""

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .grid import PhantomError, make_phantom, read_csv, read_vector_csv, write_csv, write_image, write_vector_csv
from .metrics import metrics_record, rel_l2, rel_linf
from .projector import DopplerSinogram, Sinogram, doppler_forward, read_sinogram_csv, write_sinogram_csv, xray_forward
from .validation import parse_arcs

log = logging.getLogger("tomolab")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO, EXIT_FORMAT = 0, 1, 2, 3, 4

METHODS = ("cormack", "radon", "fbp", "fourier", "torus")
SUITES = ("limited-angle", "exterior", "pestov", "santalo", "commutators", "doppler", "cross-methods")


class UsageError(Exception):
    pass


class InputFormatError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    method: str = None
    suite: str = None
    kind: str = None
    params: dict = field(default_factory=dict)
    n: int = None
    n_r: int = None
    n_theta: int = None
    step: float = None
    K: int = None
    k_max: int = None
    R: float = None
    arcs: list = None
    doppler: bool = False
    input: str = None
    truth: str = None
    output: str = None
    seed: int = 0
    suites: list = None
    timing: bool = False


def _config_from_args(args):
    arcs = None
    if getattr(args, "arcs", None):
        try:
            arcs = parse_arcs(args.arcs)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    params = {}
    if getattr(args, "params", None):
        try:
            params = json.loads(args.params)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--params is not valid JSON: {exc}") from None
        if not isinstance(params, dict):
            raise UsageError("--params must be a JSON object")
    suites = None
    if getattr(args, "suites", None):
        suites = [s.strip() for s in args.suites.split(",") if s.strip()]
    cfg = RunConfig(
        command=args.command,
        method=getattr(args, "method", None),
        suite=getattr(args, "suite", None),
        kind=getattr(args, "kind", None),
        params=params,
        n=getattr(args, "n", None),
        n_r=getattr(args, "nr", None),
        n_theta=getattr(args, "ntheta", None),
        step=getattr(args, "step", None),
        K=getattr(args, "K", None),
        k_max=getattr(args, "kmax", None),
        R=getattr(args, "radius", None),
        arcs=arcs,
        doppler=bool(getattr(args, "doppler", False)),
        input=getattr(args, "input", None),
        truth=getattr(args, "truth", None),
        output=args.output,
        seed=args.seed,
        suites=suites,
        timing=bool(getattr(args, "timing", False)),
    )
    _check_config(cfg)
    return cfg


def _check_config(cfg):
    for name in ("n", "n_r", "n_theta"):
        v = getattr(cfg, name)
        if v is not None and v < 2:
            raise UsageError(f"--{name.replace('_', '')} must be at least 2, got {v}")
    if cfg.n is not None and cfg.n % 2:
        raise UsageError(f"--n must be even, got {cfg.n}")
    if cfg.n_theta is not None and cfg.n_theta % 2:
        raise UsageError(f"--ntheta must be even, got {cfg.n_theta}")
    if cfg.step is not None and cfg.step <= 0:
        raise UsageError(f"--step must be positive, got {cfg.step}")
    if cfg.k_max is not None and cfg.k_max < 0:
        raise UsageError(f"--kmax must be nonnegative, got {cfg.k_max}")
    if cfg.k_max is not None and cfg.method not in (None, "torus"):
        raise UsageError(f"--kmax applies to the torus method only, not {cfg.method!r}")


# -- file helpers --------------------------------------------------------------


def _need_input(path, what):
    if path is None:
        raise UsageError(f"{what} needs --in")
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"input file not found: {p}")
    return p


def _load(reader, path, *args):
    try:
        return reader(path, *args)
    except (ValueError, PhantomError) as exc:
        raise InputFormatError(str(exc)) from None


def _out_dir(cfg):
    out = Path(cfg.output or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path, payload):
    path.write_text(json.dumps(_plain(payload), indent=2, sort_keys=True) + "\n")


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


def _report(cfg, **body):
    body["config"] = asdict(cfg)
    return body


def _runtime(cfg, t0):
    ms = round(1000.0 * (time.perf_counter() - t0), 3)
    log.info("elapsed %.1f ms", ms)
    # wall time is not reproducible, so it enters reports only on request
    return ms if cfg.timing else None


# -- commands ---------------------------------------------------------------------


def cmd_phantom(cfg):
    if not cfg.kind:
        raise UsageError("phantom needs --kind")
    params = dict(cfg.params)
    if cfg.R is not None:
        params["radius"] = cfg.R
    params.setdefault("center", [0.0, 0.0])
    n = cfg.n or 256
    try:
        f = make_phantom(cfg.kind, params, n)
    except (PhantomError, ValueError, TypeError, KeyError) as exc:
        raise UsageError(f"bad phantom description: {exc}") from None
    out = _out_dir(cfg)
    write_csv(f, out / "phantom.csv")
    write_image(f, out / "phantom.pgm")
    _write_json(out / "phantom.json", _report(cfg, kind=cfg.kind, params=params, n=n, mass=f.integral()))
    return EXIT_OK


def _vector_phantom(cfg):
    from .experiments import gradient_of_bump, rotated_gradient_of_bump

    kind = cfg.kind or "solenoidal"
    if kind == "gradient":
        return gradient_of_bump(cfg.n or 256)[0]
    if kind == "solenoidal":
        return rotated_gradient_of_bump(cfg.n or 256)[0]
    raise UsageError(f"vector phantoms are 'gradient' or 'solenoidal', got {kind!r}")


def cmd_project(cfg):
    n_r, n_theta = cfg.n_r or 400, cfg.n_theta or 360
    if cfg.doppler:
        if cfg.input:
            F = _load(read_vector_csv, _need_input(cfg.input, "project"))
        else:
            F = _vector_phantom(cfg)
        if not F.supported:
            raise InputFormatError("vector field is nonzero on the support margin")
        try:
            g = doppler_forward(F, n_r, n_theta, cfg.step)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        out = _out_dir(cfg)
        if not cfg.input:
            write_vector_csv(F, out / "field.csv")
        name = "doppler.csv"
    else:
        f = _load(read_csv, _need_input(cfg.input, "project"))
        if not f.supported:
            raise InputFormatError("image is nonzero on the support margin")
        try:
            g = xray_forward(f, n_r, n_theta, cfg.step)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        out = _out_dir(cfg)
        name = "sinogram.csv"
    write_sinogram_csv(g, out / name)
    _write_json(out / "project.json", _report(cfg, Nr=n_r, Ntheta=n_theta, step=g.step, doppler=cfg.doppler))
    return EXIT_OK


def cmd_reconstruct(cfg):
    from .experiments import reconstruct

    if cfg.method not in METHODS:
        raise UsageError(f"--method must be one of {', '.join(METHODS)}")
    g = _load(read_sinogram_csv, _need_input(cfg.input, "reconstruct"))
    n = cfg.n or g.n_r + (g.n_r % 2)
    if cfg.method == "torus" and cfg.k_max is not None and cfg.k_max >= n / 2:
        raise UsageError(f"--kmax {cfg.k_max} must be below N/2 = {n // 2}")
    truth = None
    if cfg.truth:
        truth = _load(read_csv, _need_input(cfg.truth, "--truth"))
        if truth.n != n:
            raise InputFormatError(f"reference image is {truth.n} x {truth.n}, reconstruction is {n} x {n}")
    t0 = time.perf_counter()
    img = reconstruct(cfg.method, g, n, cfg.k_max)
    runtime = _runtime(cfg, t0)
    l2 = linf = None
    if truth is not None:
        mask = truth.disc_mask(0.8)
        l2, linf = rel_l2(img, truth, mask), rel_linf(img, truth, mask)
    out = _out_dir(cfg)
    write_csv(img, out / "image.csv")
    write_image(img, out / "image.pgm")
    record = metrics_record(cfg.method, n, g.n_r, g.n_theta, l2, linf, runtime)
    _write_json(out / "metrics.json", _report(cfg, **record))
    return EXIT_OK


def cmd_experiment(cfg):
    from .experiments import run_suite

    if cfg.suite not in SUITES:
        raise UsageError(f"suite must be one of {', '.join(SUITES)}")
    kwargs = {}
    sized = {"n": cfg.n, "n_r": cfg.n_r, "n_theta": cfg.n_theta}
    if cfg.suite in ("cross-methods", "limited-angle", "exterior", "doppler"):
        kwargs.update({k: v for k, v in sized.items() if v is not None})
    elif cfg.suite in ("santalo", "pestov"):
        kwargs.update({k: v for k, v in (("n", cfg.n), ("n_theta", cfg.n_theta)) if v is not None})
    if cfg.suite == "exterior" and cfg.R is not None:
        kwargs["R"] = cfg.R
    if cfg.suite == "limited-angle" and cfg.arcs:
        kwargs["arcs"] = cfg.arcs
    if cfg.suite == "cross-methods" and cfg.k_max is not None:
        n = cfg.n or 256
        if cfg.k_max >= n / 2:
            raise UsageError(f"--kmax {cfg.k_max} must be below N/2 = {n // 2}")
        kwargs["k_max"] = cfg.k_max
    t0 = time.perf_counter()
    try:
        result = run_suite(cfg.suite, **kwargs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    runtime = _runtime(cfg, t0)
    out = _out_dir(cfg)
    images = {}
    if "image" in result:
        images[cfg.suite] = result.pop("image")
    images.update(result.pop("images", {}))
    result.pop("phantom", None)
    for name, img in images.items():
        stem = name.replace("-", "_")
        vals = img.values
        if np.isnan(vals).any():
            img = type(img)(np.nan_to_num(vals))
        write_csv(img, out / f"{stem}.csv")
        write_image(img, out / f"{stem}.pgm")
    if not cfg.timing:
        for rec in result.get("records", []):
            rec["runtime_ms"] = None
        result.pop("project_ms", None)
        result.pop("total_s", None)
    _write_json(out / "metrics.json", _report(cfg, runtime_ms=runtime, **result))
    log.info("suite %s: %s", cfg.suite, "pass" if result["passed"] else "FAIL")
    return EXIT_OK if result["passed"] else EXIT_FAIL


def cmd_verify(cfg):
    from .invariants import run_groups

    try:
        report, ok = run_groups(cfg.suites, seed=cfg.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = _out_dir(cfg)
    _write_json(out / "verify.json", _report(cfg, suites=report, passed=ok))
    for name, rec in report.items():
        log.info("%-10s %s", name, "pass" if rec["passed"] else "FAIL")
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "phantom": cmd_phantom,
    "project": cmd_project,
    "reconstruct": cmd_reconstruct,
    "experiment": cmd_experiment,
    "verify": cmd_verify,
}


# -- argument parsing -------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", dest="output", default=".", help="output directory")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--timing", action="store_true", help="record wall time in reports")
    common.add_argument("-v", "--verbose", action="store_true")

    sizes = argparse.ArgumentParser(add_help=False)
    sizes.add_argument("--n", type=int)
    sizes.add_argument("--nr", type=int)
    sizes.add_argument("--ntheta", type=int)

    p = _Parser(prog="tomolab", description="Tomography on the unit disc.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ph = sub.add_parser("phantom", parents=[common], help="sample a phantom")
    ph.add_argument("--kind", required=True, choices=("gaussian", "disc", "annulus", "bump", "sum"))
    ph.add_argument("--params", help="JSON object of phantom parameters")
    ph.add_argument("--radius", type=float, help="disc or bump radius")
    ph.add_argument("--n", type=int)

    pr = sub.add_parser("project", parents=[common, sizes], help="forward projection")
    pr.add_argument("--in", dest="input", help="image CSV, or vector CSV with --doppler")
    pr.add_argument("--step", type=float)
    pr.add_argument("--doppler", action="store_true")
    pr.add_argument("--kind", help="built-in vector field when --doppler has no --in: gradient or solenoidal")

    rc = sub.add_parser("reconstruct", parents=[common, sizes], help="reconstruct an image from a sinogram")
    rc.add_argument("--method", required=True, choices=METHODS)
    rc.add_argument("--in", dest="input")
    rc.add_argument("--kmax", type=int)
    rc.add_argument("--truth", help="reference image CSV for error metrics")

    ex = sub.add_parser("experiment", parents=[common, sizes], help="run an experiment suite")
    ex.add_argument("suite", choices=SUITES)
    ex.add_argument("--radius", type=float, help="exterior radius R")
    ex.add_argument("--arcs", help="direction arcs a1:b1,a2:b2 in radians")
    ex.add_argument("--kmax", type=int)

    vf = sub.add_parser("verify", parents=[common], help="run the invariant checks of every module")
    vf.add_argument("--suites", help="comma-separated subset of module groups")
    return p


def _apply_threads():
    raw = os.environ.get("TOMOLAB_THREADS")
    if not raw:
        return
    try:
        k = int(raw)
        if k < 1:
            raise ValueError
    except ValueError:
        raise UsageError(f"TOMOLAB_THREADS must be a positive integer, got {raw!r}") from None
    import warnings

    import numba

    with warnings.catch_warnings():
        # numba reports unusable optional threading layers on first use
        warnings.simplefilter("ignore")
        numba.set_num_threads(min(k, numba.config.NUMBA_NUM_THREADS))


def main(argv=None):
    logging.basicConfig(format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        args = build_parser().parse_args(argv)
        log.setLevel(logging.INFO if args.verbose else logging.WARNING)
        _apply_threads()
        cfg = _config_from_args(args)
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        log.error("usage: %s", exc)
        return EXIT_USAGE
    except InputFormatError as exc:
        log.error("bad input: %s", exc)
        return EXIT_FORMAT
    except OSError as exc:
        log.error("io: %s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
