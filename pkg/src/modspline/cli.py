"""Command-line front end: ``modspline {analyze,fit,synth,verify}``.

Options come from flags, from a ``key = value`` file given with
``--config`` (keys spelled like the long flags, dashes or underscores), or
from built-in defaults, in that order of precedence.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime as _dt
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .design import build_model1, build_model2, dump_matrix
from .fitter import GridConfig, Signal, fit_fixed, grid_search, shared_basis
from .prototype import Constant, Sinusoid, sample
from .singularity import Status, Tolerances, analyze
from .spline import SplineSpec

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_DEFICIENT = 2
EXIT_UNKNOWN = 3

EEG_PRESET = {"degree": 4, "intervals": 5, "omega": 16.0, "samples": 1000,
              "t_start": 0.0, "t_end": 10.0}


class InputError(ValueError):
    pass


# -- input ---------------------------------------------------------------

def read_signal(path) -> Signal:
    """Read a ``t,y`` CSV into a :class:`Signal`."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    rows = list(csv.reader(text.splitlines()))
    if not rows or [c.strip() for c in rows[0]] != ["t", "y"]:
        raise InputError(f"{path}: first line must be the header 't,y'")
    times, values = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise InputError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
        try:
            t, y = (float(c) for c in row)
        except ValueError:
            raise InputError(f"{path}:{lineno}: non-numeric field in {row!r}") from None
        if "_" in row[0] + row[1] or not (math.isfinite(t) and math.isfinite(y)):
            raise InputError(f"{path}:{lineno}: NaN, infinite or malformed number in {row!r}")
        if times and t <= times[-1]:
            raise InputError(
                f"{path}:{lineno}: time column not strictly increasing ({t!r} after {times[-1]!r})")
        times.append(t)
        values.append(y)
    if len(times) < 2:
        raise InputError(f"{path}: need at least two samples")
    return Signal.from_arrays(times, values)


def write_signal(path, times, values):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("t,y\n")
        for t, y in zip(times, values):
            fh.write(f"{t:.17g},{y:.17g}\n")


def read_config(path) -> dict:
    config = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        config[key.replace("-", "_")] = value.strip("'\"")
    return config


def _floats(text):
    return [float(v) for v in str(text).replace(" ", "").split(",") if v]


def _range(text):
    parts = str(text).split(":")
    if len(parts) != 3:
        raise InputError(f"range must be START:END:STEP, got {text!r}")
    return tuple(_eval_number(p) for p in parts)


def _eval_number(text):
    """Float, also accepting multiples of pi such as ``2pi`` or ``pi/8``."""
    s = str(text).strip().lower().replace("*", "")
    if "pi" in s:
        head, _, tail = s.partition("pi")
        num = float(head) if head not in ("", "+") else (-1.0 if head == "-" else 1.0)
        den = float(tail[1:]) if tail.startswith("/") else 1.0
        if tail and not tail.startswith("/"):
            raise InputError(f"cannot parse number {text!r}")
        return num * math.pi / den
    try:
        return float(s)
    except ValueError:
        raise InputError(f"cannot parse number {text!r}") from None


def _bool(text):
    return str(text).strip().lower() in ("1", "true", "yes", "on")


# -- run configuration ---------------------------------------------------

@dataclasses.dataclass
class RunConfig:
    model: int = 1
    degree: int = 4
    intervals: int | None = None
    knots: list | None = None
    omega: float = 1.0
    tau: float = 0.0
    omega_range: tuple | None = None
    tau_range: tuple | None = None
    eps_zero: float = 1e-12
    eps_rank: float = 1e-10
    normalize: bool = True
    certify: bool | None = None
    prototype: str = "sinusoid"
    constant: float = 1.0
    output: str | None = None
    parallel: bool = False
    seed: int = 0
    preset: str | None = None
    samples: int = 1000
    t_start: float = 0.0
    t_end: float = 10.0
    noise: float = 0.0
    coeffs: str = "random"
    shift_coeffs: str = "random"

    def __post_init__(self):
        if self.model not in (1, 2):
            raise InputError(f"model must be 1 or 2, got {self.model}")
        if self.intervals is not None and self.knots is not None:
            raise InputError("give either intervals or knots, not both")
        if self.intervals is None and self.knots is None:
            self.intervals = 5

    @property
    def tolerances(self):
        return Tolerances(self.eps_zero, self.eps_rank)

    @property
    def has_grid(self):
        return self.omega_range is not None or self.tau_range is not None

    def grid_config(self):
        w = self.omega_range or (self.omega, self.omega, 1.0)
        t = self.tau_range or (self.tau, self.tau, 1.0)
        return GridConfig(*w, *t)

    def spline_spec(self, times) -> SplineSpec:
        t0, t1 = float(times[0]), float(times[-1])
        if self.knots is not None:
            knots = list(self.knots)
            if knots[0] != t0 or knots[-1] != t1:
                raise InputError(
                    f"explicit knots must span the samples [{t0!r}, {t1!r}], "
                    f"got [{knots[0]!r}, {knots[-1]!r}]")
            return SplineSpec(self.degree, knots)
        return SplineSpec.equidistant(self.degree, self.intervals, t0, t1)

    def prototype_fn(self, omega=None, tau=None):
        if self.prototype == "constant":
            return Constant(self.constant)
        if self.prototype != "sinusoid":
            raise InputError(f"unknown prototype {self.prototype!r}")
        return Sinusoid(self.omega if omega is None else omega, self.tau if tau is None else tau)

    def to_dict(self):
        out = dataclasses.asdict(self)
        out.pop("output")
        return out


_CONVERTERS = {
    "model": int, "degree": int, "intervals": int, "knots": _floats,
    "omega": _eval_number, "tau": _eval_number, "omega_range": _range, "tau_range": _range,
    "eps_zero": float, "eps_rank": float, "normalize": _bool, "certify": _bool,
    "prototype": str, "constant": float, "output": str, "parallel": _bool, "seed": int,
    "preset": str, "samples": int, "t_start": float, "t_end": float, "noise": float,
    "coeffs": str, "shift_coeffs": str,
}


def _layer(values, layer):
    """Merge ``layer`` over ``values``; knots and intervals displace each other."""
    if "knots" in layer:
        values.pop("intervals", None)
    if "intervals" in layer:
        values.pop("knots", None)
    values.update(layer)


def build_config(args) -> RunConfig:
    file_values = read_config(args.config) if getattr(args, "config", None) else {}
    for key in file_values:
        if key not in _CONVERTERS:
            raise InputError(f"unknown config key {key!r}")
    cli_values = {k: getattr(args, k) for k in _CONVERTERS if getattr(args, k, None) is not None}
    if getattr(args, "no_normalize", False):
        cli_values["normalize"] = "false"

    values = {}
    if "eeg" in (file_values.get("preset"), cli_values.get("preset")):
        _layer(values, dict(EEG_PRESET))
    for raw in (file_values, cli_values):
        _layer(values, {k: _CONVERTERS[k](v) for k, v in raw.items()})
    return RunConfig(**values)


def _load_signal(args, cfg: RunConfig):
    if args.input:
        signal = read_signal(args.input)
        digest = hashlib.sha256(Path(args.input).read_bytes()).hexdigest()
        return signal, {"path": str(args.input), "sha256": digest}
    if cfg.preset == "eeg" or args.command == "analyze":
        times = np.linspace(cfg.t_start, cfg.t_end, cfg.samples)
        signal = Signal.from_arrays(times, np.zeros_like(times))
        digest = hashlib.sha256(times.tobytes()).hexdigest()
        return signal, {"path": None, "synthetic_grid": True, "sha256": digest}
    raise InputError("--input is required")


# -- reporting -----------------------------------------------------------

def _report_base(command, cfg, input_info, signal):
    return {
        "tool": "modspline",
        "version": __version__,
        "command": command,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "input": dict(input_info, n_samples=signal.grid.n_samples),
        "config": cfg.to_dict(),
    }


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _print_verdict(verdict, out=None):
    out = out or sys.stdout
    by = f" ({verdict.by})" if verdict.by else ""
    print(f"verdict: {verdict.status.value}{by}", file=out)
    if verdict.reason:
        print(f"reason: {verdict.reason}", file=out)
    if verdict.numeric_rank is not None:
        print(f"numeric rank: {verdict.numeric_rank} / {verdict.n_columns}", file=out)
    if verdict.per_interval:
        print(f"{'k':>3} {'N_k':>6} {'Z_k':>6} {'required':>9} {'margin':>7}", file=out)
        for r in verdict.per_interval:
            print(f"{r.k:>3} {r.n_samples:>6} {r.n_zeros:>6} {r.required:>9} {r.margin:>7}",
                  file=out)


def _output_dir(cfg):
    if not cfg.output:
        return None
    out = Path(cfg.output)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise InputError(f"output directory {out} is not writable: {exc.strerror}") from exc
    return out


# -- commands ------------------------------------------------------------

def cmd_analyze(args) -> int:
    cfg = build_config(args)
    signal, info = _load_signal(args, cfg)
    spec = cfg.spline_spec(signal.times)
    samples = sample(cfg.prototype_fn(), signal.grid)
    build = build_model1 if cfg.model == 1 else build_model2
    dm = build(spec, signal.grid, samples, normalize=cfg.normalize)
    verdict = analyze(cfg.model, spec, signal.grid, samples, cfg.tolerances,
                      certify=bool(cfg.certify), dm=dm)
    _print_verdict(verdict)
    out = _output_dir(cfg)
    if out is not None:
        report = _report_base("analyze", cfg, info, signal)
        report["verdict"] = verdict.to_dict()
        report["normalization"] = dm.time_map.to_dict()
        _write_json(out / "report.json", report)
    if getattr(args, "dump_matrix", None):
        dump_matrix(dm, args.dump_matrix)
    return {Status.FULL_RANK: EXIT_OK, Status.DEFICIENT: EXIT_DEFICIENT,
            Status.UNKNOWN: EXIT_UNKNOWN}[verdict.status]


def cmd_fit(args) -> int:
    cfg = build_config(args)
    signal, info = _load_signal(args, cfg)
    out = _output_dir(cfg)
    spec = cfg.spline_spec(signal.times)
    certify = True if cfg.certify is None else cfg.certify
    table = None
    if cfg.has_grid:
        if cfg.prototype != "sinusoid":
            raise InputError("grid search needs the sinusoid prototype")
        grid_cfg = cfg.grid_config()
        best, table = grid_search(cfg.model, signal, spec, grid_cfg, cfg.tolerances,
                                  cfg.normalize, certify, n_jobs=-1 if cfg.parallel else None)
    else:
        best = fit_fixed(cfg.model, signal, spec, cfg.omega, cfg.tau, cfg.tolerances,
                         cfg.normalize, certify, prototype=cfg.prototype_fn())
    print(f"best omega={best.omega:.17g} tau={best.tau:.17g} sse={best.sse:.17g} "
          f"method={best.method}")
    if out is None:
        return EXIT_OK

    report = _report_base("fit", cfg, info, signal)
    report.update({
        "best": {
            "omega": best.omega,
            "tau": best.tau,
            "sse": best.sse,
            "method": best.method,
            "fallback": best.solution.fallback,
            "condition_estimate": best.solution.condition_estimate,
            "verdict": best.verdict.to_dict(),
        },
        "coefficients": {
            "modulated": best.modulated_coeffs.tolist(),
            "shift": None if best.shift_coeffs is None else best.shift_coeffs.tolist(),
        },
        "knots": list(spec.knots),
        "normalization": best.time_map.to_dict(),
        "grid": None if table is None else {"n_cells": len(table)},
    })
    _write_json(out / "report.json", report)

    fitted = best.evaluate(signal.times)
    with open(out / "fit.csv", "w", newline="", encoding="utf-8") as fh:
        fh.write("t,y,model_value,residual\n")
        for t, y, f in zip(signal.times, signal.values, fitted):
            fh.write(f"{t:.17g},{y:.17g},{f:.17g},{y - f:.17g}\n")
    if table is not None:
        with open(out / "grid.csv", "w", newline="", encoding="utf-8") as fh:
            fh.write("omega,tau,sse,solver_method\n")
            for cell in table:
                fh.write(f"{cell.omega:.17g},{cell.tau:.17g},{cell.sse:.17g},{cell.method}\n")
    return EXIT_OK


def synthesize(cfg: RunConfig):
    """Times and values of the configured wave model, with optional noise."""
    if cfg.samples < 2 or not cfg.t_end > cfg.t_start:
        raise InputError("need samples >= 2 and t_end > t_start")
    rng = np.random.default_rng(cfg.seed)
    times = np.linspace(cfg.t_start, cfg.t_end, cfg.samples)
    spec = cfg.spline_spec(times)

    def coeffs(text):
        if str(text).strip().lower() == "random":
            return rng.standard_normal(spec.n_coeffs)
        values = np.array(_floats(text))
        if values.size != spec.n_coeffs:
            raise InputError(f"expected {spec.n_coeffs} coefficients, got {values.size}")
        return values

    x1 = coeffs(cfg.coeffs)
    x2 = coeffs(cfg.shift_coeffs) if cfg.model == 2 else None
    basis_domain = shared_basis(Signal.from_arrays(times, np.zeros_like(times)), spec,
                                cfg.normalize)
    y = (basis_domain @ x1) * cfg.prototype_fn()(times)
    if x2 is not None:
        y = y + basis_domain @ x2
    if cfg.noise:
        y = y + rng.uniform(-cfg.noise, cfg.noise, times.size)
    return times, y


def cmd_synth(args) -> int:
    cfg = build_config(args)
    times, y = synthesize(cfg)
    target = Path(cfg.output or "signal.csv")
    if target.suffix.lower() != ".csv":
        target.mkdir(parents=True, exist_ok=True)
        target = target / "signal.csv"
    write_signal(target, times, y)
    print(f"wrote {times.size} samples to {target}")
    return EXIT_OK


def _seed_range(text):
    if ".." in text:
        lo, hi = text.split("..", 1)
        return range(int(lo), int(hi) + 1)
    return range(int(text))


def cmd_verify(args) -> int:
    from .oracle import verify

    seeds = _seed_range(args.seeds)
    models = (1, 2) if args.model is None else (int(args.model),)
    tol = Tolerances(float(args.eps_zero or 1e-12), float(args.eps_rank or 1e-10))
    summary = verify(seeds, models, tol)
    print(f"{'model':>5} {'instances':>9} {'certified':>9} {'deficient':>9} "
          f"{'unknown':>7} {'violations':>10}  result")
    failed = False
    for model, t in summary.items():
        ok = t["violations"] == 0
        failed |= not ok
        print(f"{model:>5} {t['instances']:>9} {t['certified']:>9} {t['deficient']:>9} "
              f"{t['unknown']:>7} {t['violations']:>10}  {'PASS' if ok else 'FAIL'}")
        if not ok:
            print(f"      failing seeds: {t['failed_seeds'][:20]}")
    return EXIT_ERROR if failed else EXIT_OK


# -- argument parsing ----------------------------------------------------

def _common(p, with_input=True):
    if with_input:
        p.add_argument("--input", help="signal CSV with header 't,y'")
    p.add_argument("--config", help="key = value run configuration file")
    p.add_argument("--output", help="output directory (synth: directory or .csv path)")
    p.add_argument("--model", choices=["1", "2"])
    p.add_argument("--degree", help="spline degree m")
    knots = p.add_mutually_exclusive_group()
    knots.add_argument("--intervals", help="number of equidistant intervals n")
    knots.add_argument("--knots", help="explicit knot chain a,b,c,...")
    omega = p.add_mutually_exclusive_group()
    omega.add_argument("--omega", help="prototype frequency (sin(omega*t + tau))")
    omega.add_argument("--omega-range", help="W0:WF:STEP, inclusive")
    tau = p.add_mutually_exclusive_group()
    tau.add_argument("--tau", help="prototype phase in radians (accepts e.g. pi/8)")
    tau.add_argument("--tau-range", help="T0:TF:STEP, inclusive (accepts pi multiples)")
    p.add_argument("--eps-zero")
    p.add_argument("--eps-rank")
    p.add_argument("--no-normalize", action="store_true",
                   help="assemble in raw time instead of [0, 1]")
    p.add_argument("--parallel", action="store_const", const="true",
                   help="evaluate grid cells concurrently")
    p.add_argument("--seed")
    p.add_argument("--prototype", choices=["sinusoid", "constant"])
    p.add_argument("--constant", help="value of the constant prototype")
    p.add_argument("--preset", choices=["eeg"],
                   help="eeg: 1000 samples over 10 s, n=5, m=4, omega=16")


def make_parser():
    parser = argparse.ArgumentParser(prog="modspline", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="singularity verdict for one (omega, tau)")
    _common(p)
    p.add_argument("--certify", action="store_const", const="true",
                   help="resolve an inconclusive check with a numeric rank")
    p.add_argument("--dump-matrix", help="write the design matrix as plain text")
    p.add_argument("--samples", help="synthetic grid size when no --input is given")
    p.add_argument("--t-start")
    p.add_argument("--t-end")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("fit", help="fit one cell or sweep an (omega, tau) grid")
    _common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("synth", help="write a synthetic wave-model signal")
    _common(p, with_input=False)
    p.add_argument("--samples", help="number of samples (default 1000)")
    p.add_argument("--t-start")
    p.add_argument("--t-end")
    p.add_argument("--noise", help="uniform noise amplitude")
    p.add_argument("--coeffs", help="modulated spline coefficients or 'random'")
    p.add_argument("--shift-coeffs", help="shift spline coefficients or 'random' (model 2)")
    p.set_defaults(func=cmd_synth, input=None)

    p = sub.add_parser("verify", help="seeded soundness sweep of the rank checks")
    p.add_argument("--seeds", default="0..99", help="A..B inclusive, or a count")
    p.add_argument("--model", choices=["1", "2"])
    p.add_argument("--eps-zero")
    p.add_argument("--eps-rank")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
