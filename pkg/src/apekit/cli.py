"""Command-line driver: ``apekit <command> [flags]``.

Every command writes one JSON report (or CSV rows with ``--format csv``) to
``--out`` or stdout.  Exit codes: 0 success, 2 invalid input, 3 solver
non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import BACKEND, __version__
from .curvature import NormalFormMetric, einstein_deficit, partial_evenness_check
from .fermat import explicit_chart_probe, fermat_forms, semidefiniteness_probe
from .geon import (
    GeonSpec,
    geon_chart,
    geon_mass,
    geon_mass_printed_sum,
    geon_normal_series,
    soliton_lapse_series,
)
from .mass import extract_mass, gauge_transform
from .radial import radial_curvature
from .serialize import dumps, from_dict, to_dict
from .static import StaticPair, lapse_coefficient, lstar_apply, static_residual
from .torus import ScalarField
from .yamabe import YamabeConvergenceError, YamabeProblem, mass_decrease_pipeline

COMMANDS = ("geon", "curvature", "mass", "gauge", "static", "yamabe", "fermat")
EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED = 0, 2, 3


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    n: int = 3
    periods: Optional[list] = None
    input_path: Optional[str] = None
    output_path: Optional[str] = None
    fmt: str = "json"
    tol: float = 1e-10
    K: Optional[int] = None
    samples: int = 8
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if self.fmt not in ("json", "csv"):
            raise InputError("format must be json or csv")
        if self.K is not None and self.K < self.n + 1:
            raise InputError(f"truncation order K must be >= n+1 = {self.n + 1}")
        if self.tol <= 0:
            raise InputError("tolerance must be positive")


def _threads() -> int:
    raw = os.environ.get("APEKIT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise InputError(f"APEKIT_THREADS must be an integer, got {raw!r}")


def _spec(cfg: RunConfig) -> GeonSpec:
    periods = cfg.periods if cfg.periods is not None else [1.0] * (cfg.n - 2)
    return GeonSpec(cfg.n, tuple(sorted(periods)))


def _load_metric(cfg: RunConfig):
    """Metric from --input or the geon of --n/--periods.

    Input JSON is either {"geon": {"n": 3, "periods": [1]}} or
    {"n": 3, "lam": 0, "h": <tensor_series record>}.
    Returns (metric, spec or None).
    """
    if cfg.input_path is None:
        spec = _spec(cfg)
        return geon_normal_series(spec, cfg.K, cfg.samples), spec
    try:
        with open(cfg.input_path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {cfg.input_path}: {exc}")
    except OSError as exc:
        raise InputError(f"cannot read {cfg.input_path}: {exc}")
    if not isinstance(data, dict):
        raise InputError("metric spec must be a JSON object")
    try:
        if "geon" in data:
            g = data["geon"]
            spec = GeonSpec(int(g["n"]), tuple(g.get("periods", [1.0] * (int(g["n"]) - 2))))
            return geon_normal_series(spec, cfg.K, cfg.samples), spec
        h = from_dict(data["h"])
        return NormalFormMetric(int(data["n"]), h.grid, h, data.get("lam")), None
    except (KeyError, TypeError) as exc:
        raise InputError(f"invalid metric spec: missing or mistyped field {exc}")


def _sample_points(lo, hi, count):
    return list(np.linspace(lo, hi, count))


def _geon_sweep(spec: GeonSpec, points):
    chart = geon_chart(spec, "rho")
    n = spec.n
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        vals = list(pool.map(lambda s: radial_curvature(chart, s).scalar + n * (n - 1), points))
    return float(max(abs(v) for v in vals))


# commands ---------------------------------------------------------------

def _cmd_geon(cfg):
    spec = _spec(cfg)
    m = geon_normal_series(spec, cfg.K, cfg.samples)
    rep = extract_mass(m)
    return {
        "command": "geon",
        "spec": spec.to_dict(),
        "xi_period": spec.xi_period,
        "mass": geon_mass(spec),
        "mass_extracted": rep.m,
        "mass_printed_sum": geon_mass_printed_sum(spec),
        "kappa_diagonal": np.diag(rep.kappa.values).tolist(),
        "theta_max_abs": float(np.max(np.abs(rep.theta.values))),
        "mu": float(np.mean(rep.mu.values)),
        "max_scalar_curvature_residual": _geon_sweep(spec, _sample_points(0.0, 4.0, 50)),
    }


def _cmd_curvature(cfg):
    m, _ = _load_metric(cfg)
    rep = einstein_deficit(m, cfg.tol)
    return {"command": "curvature", "n": m.n, "K": m.K, **rep.to_dict()}


def _cmd_mass(cfg):
    m, _ = _load_metric(cfg)
    return {"command": "mass", "n": m.n, **extract_mass(m).to_dict()}


def _cmd_gauge(cfg):
    m, _ = _load_metric(cfg)
    amp = float(cfg.options.get("amplitude", 0.1))
    mode = int(cfg.options.get("mode", 1))
    grid = m.grid
    y = grid.coordinates()[0]
    omega0 = ScalarField(grid, amp * np.cos(2.0 * math.pi * mode * y / grid.periods[0]))
    new, data = gauge_transform(m, omega0, cfg.tol)
    before, after = extract_mass(m), extract_mass(new)
    weight = after.mu.values * np.exp(m.n * omega0.values) - before.mu.values
    even, _ = partial_evenness_check(new)
    return {
        "command": "gauge",
        "n": m.n,
        "amplitude": amp,
        "mode": mode,
        "weight_identity_max_abs": float(np.max(np.abs(weight))),
        "partially_even": bool(even),
        "omega_x_coefficient_max_abs": float(np.max(np.abs(data.omega.coeffs[1]))),
        "cross_residual": data.cross_residual,
        "mass_before": before.m,
        "mass_after": after.m,
    }


def _cmd_static(cfg):
    preset = cfg.options.get("preset", "soliton")
    if preset != "soliton":
        raise InputError(f"unknown preset {preset!r}")
    spec = _spec(cfg)
    n = spec.n
    res = 0.0
    for coord, pts in (("rho", _sample_points(0.0, 3.0, 16)), ("x", _sample_points(0.05, 1.0, 8))):
        chart = geon_chart(spec, coord)
        pair = StaticPair(chart)
        for s in pts:
            res = max(res, static_residual(pair, s).max_abs,
                      float(np.max(np.abs(lstar_apply(chart, chart.lapse, s)))))
    mu = float(np.mean(extract_mass(geon_normal_series(spec)).mu.values))
    xN = soliton_lapse_series(spec)
    return {
        "command": "static",
        "preset": preset,
        "n": n,
        "max_residual": res,
        "mu": mu,
        "lapse_coefficient": float(lapse_coefficient(xN, n - 1)),
        "lapse_coefficient_expected": -mu / (2.0 * n),
    }


def _cmd_yamabe(cfg):
    spec = _spec(cfg)
    bump = float(cfg.options.get("bump", 0.1))
    problem = YamabeProblem(spec.n, spec, bump, float(cfg.options.get("center", 1.0)),
                            float(cfg.options.get("width", 0.5)))
    kw = {"h": float(cfg.options.get("h", 0.02)), "max_iter": int(cfg.options.get("max_iter", 20))}
    out = mass_decrease_pipeline(spec, problem, **kw)
    report = {"command": "yamabe", "n": spec.n, "bump": bump, **out.to_dict()}
    prof = out.solution.profile
    report["profile"] = {"rho": prof.rho.tolist(), "x": prof.x.tolist(), "phi": prof.phi.tolist()}
    return report


def _cmd_fermat(cfg):
    m, spec = _load_metric(cfg)
    rep = extract_mass(m)
    lapse = soliton_lapse_series(spec, m.K) if spec is not None else None
    data = fermat_forms(m, lapse, rep)
    probe = semidefiniteness_probe(data)
    out = {
        "command": "fermat",
        "n": m.n,
        "leading_ktilde": to_dict(type(data.ktilde)(data.ktilde.coeffs[m.n - 1:m.n], data.ktilde.grid)),
        "leading_mean_curvature_mean": float(np.mean(data.htilde_mean.coeffs[m.n - 1])),
        "expected_mean_curvature": float(-m.n * np.mean(rep.mu.values)),
        **{"leading_" + k: v for k, v in probe.to_dict().items()},
    }
    if spec is not None:
        xs = [1e-3, 0.1, 0.5, 1.0]
        chart_probe = explicit_chart_probe(geon_chart(spec, "x"), xs)
        out["chart_verdict"] = chart_probe.verdict
        out["chart_eigenvalues"] = np.asarray(chart_probe.eigenvalues).tolist()
        out["chart_points"] = xs
    return out


HANDLERS = {
    "geon": _cmd_geon,
    "curvature": _cmd_curvature,
    "mass": _cmd_mass,
    "gauge": _cmd_gauge,
    "static": _cmd_static,
    "yamabe": _cmd_yamabe,
    "fermat": _cmd_fermat,
}


# output -----------------------------------------------------------------

def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def _csv_cell(v):
    if isinstance(v, float):
        return format(v, ".17g")
    return "" if v is None else str(v)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return dumps(report) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    prof = report.get("profile")
    if prof is not None:
        keys = list(prof)
        w.writerow(keys)
        for row in zip(*(prof[k] for k in keys)):
            w.writerow([_csv_cell(float(v)) for v in row])
        return buf.getvalue()
    w.writerow(["key", "value"])
    for k, v in _flatten(report):
        w.writerow([k, _csv_cell(v)])
    return buf.getvalue()


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        report = HANDLERS[cfg.command](cfg)
    except YamabeConvergenceError as exc:
        print(f"error: solver did not converge: {exc}", file=stderr)
        return EXIT_NONCONVERGED
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INVALID
    text = render(report, cfg.fmt)
    if cfg.output_path is None:
        stdout.write(text)
    else:
        try:
            with open(cfg.output_path, "w") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write {cfg.output_path}: {exc}", file=stderr)
            return EXIT_INVALID
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="apekit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"apekit {__version__} ({BACKEND} kernels)")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--n", type=int, default=3)
        s.add_argument("--periods", type=float, nargs="+")
        s.add_argument("--K", type=int)
        s.add_argument("--samples", type=int, default=8)
        s.add_argument("--tol", type=float, default=1e-10)
        s.add_argument("--out")
        s.add_argument("--format", choices=("json", "csv"), default="json")
        s.add_argument("--input")
        if name == "gauge":
            s.add_argument("--amplitude", type=float, default=0.1)
            s.add_argument("--mode", type=int, default=1)
        if name == "static":
            s.add_argument("--preset", default="soliton")
        if name == "yamabe":
            s.add_argument("--bump", type=float, default=0.1)
            s.add_argument("--center", type=float, default=1.0)
            s.add_argument("--width", type=float, default=0.5)
            s.add_argument("--h", type=float, default=0.02)
            s.add_argument("--max-iter", dest="max_iter", type=int, default=20)
    return p


_OPTION_KEYS = ("amplitude", "mode", "preset", "bump", "center", "width", "h", "max_iter")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    opts = {k: getattr(args, k) for k in _OPTION_KEYS if hasattr(args, k)}
    try:
        cfg = RunConfig(args.command, args.n, args.periods, args.input, args.out, args.format,
                        args.tol, args.K, args.samples, opts)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
