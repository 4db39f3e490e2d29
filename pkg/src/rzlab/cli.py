"""Command-line front end: validation, point moments, integration,
simulation, sweeps and prediction comparison, with deterministic JSON
and CSV emission.

Exit codes: 0 success, 2 model not positive definite, 3 numerical
failure (factorization failure, or max-depth quadrature with error
above 10x tolerance), 4 bad configuration.

All file and stdout output is deterministic for a fixed configuration;
wall-clock timing goes to stderr only (the runtime_ms CSV column is
intentionally left empty).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .asymptotics import CLAIMS, InsufficientPoints, fit_slope, predict
from .integrator import ExpectedZeroReport, expected_zeros
from .model import (FactorizationFailure, ModelSpec, build_covariance,
                    validate)
from .moments import OverflowRisk, moments_direct, moments_fast
from .simulator import SampleConfig, ZeroCountEstimate, run_simulation

CSV_COLUMNS = ("experiment", "kind", "n", "sigma", "rho", "method",
               "interval_lo", "interval_hi", "value", "stderr", "err_est",
               "seed", "samples", "tol", "runtime_ms")

EXIT_OK = 0
EXIT_NOT_PSD = 2
EXIT_NUMERICAL = 3
EXIT_BAD_CONFIG = 4

METHODS = ("kacrice", "mc", "both")


class _CliConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse's default exit(2) collides with the PSD code
        raise _CliConfigError(message)


@dataclass(frozen=True)
class ExperimentConfig:
    spec: ModelSpec
    method: str = "kacrice"
    tol: float = 1e-8
    samples: int = 10000
    seed: int = 0
    sweep_n: Optional[tuple[int, ...]] = None
    output: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if self.method in ("mc", "both") and self.samples < 1:
            raise ValueError("samples must be >= 1 for Monte Carlo runs")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def to_dict(self) -> dict:
        d = {"spec": self.spec.to_dict(), "method": self.method, "tol": self.tol,
             "samples": int(self.samples), "seed": int(self.seed),
             "workers": int(self.workers)}
        if self.sweep_n is not None:
            d["sweep_n"] = [int(n) for n in self.sweep_n]
        if self.output is not None:
            d["output"] = self.output
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        sweep_n = d.get("sweep_n")
        return cls(spec=ModelSpec.from_dict(d["spec"]),
                   method=d.get("method", "kacrice"),
                   tol=float(d.get("tol", 1e-8)),
                   samples=int(d.get("samples", 10000)),
                   seed=int(d.get("seed", 0)),
                   sweep_n=None if sweep_n is None else tuple(int(n) for n in sweep_n),
                   output=d.get("output"),
                   workers=int(d.get("workers", 1)))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, int):
        return str(v)
    return f"{float(v):.17g}"


def _append_rows(path: Path, rows: list[dict]) -> None:
    header_needed = not path.exists() or path.stat().st_size == 0
    with open(path, "a", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if header_needed:
            writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row.get(col)) for col in CSV_COLUMNS])


def _emit_json(obj: dict, output: Optional[str]) -> None:
    text = json.dumps(obj, indent=2)
    print(text)
    if output:
        Path(f"{output}.json").write_text(text + "\n", encoding="utf-8")


def _base_row(experiment: str, spec: ModelSpec, method: str) -> dict:
    return {"experiment": experiment, "kind": spec.kind, "n": int(spec.n),
            "sigma": float(spec.sigma), "rho": float(spec.rho), "method": method}


def _kacrice_rows(experiment: str, spec: ModelSpec, report: ExpectedZeroReport,
                  tol: float) -> list[dict]:
    rows = []
    for r in report.per_interval:
        row = _base_row(experiment, spec, "kacrice")
        row.update(interval_lo=r.a, interval_hi=r.b, value=r.value,
                   err_est=r.err_est, tol=tol)
        rows.append(row)
    return rows


def _mc_rows(experiment: str, spec: ModelSpec, est: ZeroCountEstimate,
             samples: int) -> list[dict]:
    rows = []
    for (a, b), mean, se in est.per_interval:
        row = _base_row(experiment, spec, "mc")
        row.update(interval_lo=a, interval_hi=b, value=mean, stderr=se,
                   seed=int(est.seed), samples=int(samples))
        rows.append(row)
    total = _base_row(experiment, spec, "mc")
    total.update(interval_lo=-math.inf, interval_hi=math.inf,
                 value=est.mean_total, stderr=est.se_total,
                 seed=int(est.seed), samples=int(samples))
    rows.append(total)
    return rows


def _unit_congruent(spec: ModelSpec) -> ModelSpec:
    return dataclasses.replace(spec, sigma=1.0)


def _psd_gate(spec: ModelSpec) -> bool:
    # Definiteness of D R D (D = diag(sigma^i) > 0) equals that of the
    # unit-variance model, which never overflows. Proven-sufficient
    # conditions short-circuit so large sweeps need not densify an n x n
    # matrix; anything inconclusive goes to the checked factorization.
    if spec.n == 1 or spec.kind == "independent":
        return True
    if spec.kind == "constant_corr":
        # equicorrelation spectrum: 1 - rho (n-1 times) and 1 + (n-1) rho
        return spec.rho < 1.0
    if spec.kind == "geometric_pos" and spec.rho < 1.0:
        return True  # AR(1)-type correlation matrices are PD for rho < 1
    if spec.kind == "geometric_neg" and 2.0 * spec.rho < 1.0 - spec.rho:
        return True  # strict diagonal dominance (rho < 1/3)
    return validate(build_covariance(_unit_congruent(spec))).is_positive_definite


def _gate_or_fail(spec: ModelSpec) -> Optional[int]:
    if not _psd_gate(spec):
        print(f"model {spec.to_dict()} is not positive definite", file=sys.stderr)
        return EXIT_NOT_PSD
    return None


def _quadrature_failed(report: ExpectedZeroReport, tol: float) -> bool:
    return any(r.max_depth and r.err_est > 10.0 * tol for r in report.per_interval)


# ----------------------------------------------------------------- commands

def _cmd_validate(cfg: ExperimentConfig, args) -> int:
    spec = cfg.spec
    out = {"spec": spec.to_dict()}
    try:
        rep = validate(build_covariance(spec))
    except ValueError:
        # sigma^(2i) not representable; verdict via the congruent unit model
        rep = validate(build_covariance(_unit_congruent(spec)))
        out["congruent_unit_model"] = True
    out.update(rep.to_dict())
    _emit_json(out, cfg.output)
    return EXIT_OK if rep.is_positive_definite else EXIT_NOT_PSD


def _cmd_moments(cfg: ExperimentConfig, args) -> int:
    failed = _gate_or_fail(cfg.spec)
    if failed:
        return failed
    evaluator = moments_direct if args.evaluator == "direct" else moments_fast
    point = evaluator(cfg.spec, args.x)
    _emit_json({"spec": cfg.spec.to_dict(), "evaluator": args.evaluator,
                **point.to_dict()}, cfg.output)
    return EXIT_OK


def _cmd_integrate(cfg: ExperimentConfig, args) -> int:
    failed = _gate_or_fail(cfg.spec)
    if failed:
        return failed
    report = expected_zeros(cfg.spec, cfg.tol)
    _emit_json({"spec": cfg.spec.to_dict(), "tol": cfg.tol, **report.to_dict()},
               cfg.output)
    if cfg.output:
        _append_rows(Path(f"{cfg.output}.csv"),
                     _kacrice_rows("integrate", cfg.spec, report, cfg.tol))
    return EXIT_NUMERICAL if _quadrature_failed(report, cfg.tol) else EXIT_OK


def _cmd_simulate(cfg: ExperimentConfig, args) -> int:
    failed = _gate_or_fail(cfg.spec)
    if failed:
        return failed
    est = run_simulation(SampleConfig(spec=cfg.spec, samples=cfg.samples,
                                      seed=cfg.seed, workers=cfg.workers))
    _emit_json({"spec": cfg.spec.to_dict(), "samples": cfg.samples,
                **est.to_dict()}, cfg.output)
    if cfg.output:
        _append_rows(Path(f"{cfg.output}.csv"),
                     _mc_rows("simulate", cfg.spec, est, cfg.samples))
    if args.histogram:
        lines = ["count,frequency"]
        lines += [f"{k},{v}" for k, v in sorted(est.histogram.items())]
        text = "\n".join(lines) + "\n"
        if cfg.output:
            Path(f"{cfg.output}.hist.csv").write_text(text, encoding="utf-8")
        else:
            print(text, end="")
    return EXIT_OK


def _cmd_sweep(cfg: ExperimentConfig, args) -> int:
    if not cfg.sweep_n:
        raise _CliConfigError("sweep requires --n with one or more values")
    ns = tuple(sorted(set(int(n) for n in cfg.sweep_n)))
    specs = {n: dataclasses.replace(cfg.spec, n=n) for n in ns}
    for n in ns:
        failed = _gate_or_fail(specs[n])
        if failed:
            return failed
    rows: list[dict] = []
    results = []
    numerical_failure = False
    for n in ns:
        spec_n = specs[n]
        entry: dict = {"n": n}
        if cfg.method in ("kacrice", "both"):
            report = expected_zeros(spec_n, cfg.tol)
            numerical_failure |= _quadrature_failed(report, cfg.tol)
            entry["kacrice"] = report.to_dict()
            row = _base_row("sweep", spec_n, "kacrice")
            row.update(interval_lo=-math.inf, interval_hi=math.inf,
                       value=report.en_total,
                       err_est=sum(r.err_est for r in report.per_interval),
                       tol=cfg.tol)
            rows.append(row)
        if cfg.method in ("mc", "both"):
            est = run_simulation(SampleConfig(spec=spec_n, samples=cfg.samples,
                                              seed=cfg.seed, workers=cfg.workers))
            entry["mc"] = est.to_dict()
            row = _base_row("sweep", spec_n, "mc")
            row.update(interval_lo=-math.inf, interval_hi=math.inf,
                       value=est.mean_total, stderr=est.se_total,
                       seed=cfg.seed, samples=cfg.samples)
            rows.append(row)
        results.append(entry)
    rows.sort(key=lambda r: (r["n"], r["method"], r["interval_lo"]))
    _emit_json({"spec": cfg.spec.to_dict(), "sweep_n": list(ns),
                "method": cfg.method, "tol": cfg.tol, "samples": cfg.samples,
                "seed": cfg.seed, "results": results}, cfg.output)
    if cfg.output:
        _append_rows(Path(f"{cfg.output}.csv"), rows)
    return EXIT_NUMERICAL if numerical_failure else EXIT_OK


def _cmd_compare(cfg: ExperimentConfig, args) -> int:
    if not cfg.sweep_n:
        raise _CliConfigError("compare requires --n with one or more values")
    ns = tuple(sorted(set(int(n) for n in cfg.sweep_n)))
    specs = {n: dataclasses.replace(cfg.spec, n=n) for n in ns}
    for n in ns:
        failed = _gate_or_fail(specs[n])
        if failed:
            return failed
    points = []
    rows = []
    for n in ns:
        report = expected_zeros(specs[n], cfg.tol)
        point = {"n": n, "measured_en_total": report.en_total}
        for claim in CLAIMS:
            point[claim] = predict(claim, n, cfg.spec.sigma)
        points.append(point)
        row = _base_row("compare", specs[n], "kacrice")
        row.update(interval_lo=-math.inf, interval_hi=math.inf,
                   value=report.en_total, tol=cfg.tol)
        rows.append(row)
    try:
        fit = fit_slope([(p["n"], p["measured_en_total"]) for p in points]).to_dict()
    except InsufficientPoints:
        fit = None
    _emit_json({"spec": cfg.spec.to_dict(), "tol": cfg.tol, "points": points,
                "fit": fit}, cfg.output)
    if cfg.output:
        _append_rows(Path(f"{cfg.output}.csv"), rows)
        table = Path(f"{cfg.output}.compare.csv")
        with open(table, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "kind", "sigma", "rho", "measured_en_total",
                             *CLAIMS])
            for p in points:
                writer.writerow([p["n"], cfg.spec.kind, _fmt(cfg.spec.sigma),
                                 _fmt(cfg.spec.rho), _fmt(p["measured_en_total"]),
                                 *[_fmt(p[c]) for c in CLAIMS]])
    return EXIT_OK


# -------------------------------------------------------------- arg parsing

def _parse_n_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(piece) for piece in text.split(",") if piece.strip())
    except ValueError as exc:
        raise _CliConfigError(f"bad n list {text!r}: {exc}") from exc
    if not values:
        raise _CliConfigError(f"bad n list {text!r}")
    return values


def _add_common(sub: argparse.ArgumentParser, n_list: bool) -> None:
    sub.add_argument("--config", help="JSON config file; flags override its fields")
    sub.add_argument("--kind", choices=("independent", "constant_corr",
                                        "geometric_pos", "geometric_neg"))
    if n_list:
        sub.add_argument("--n", help="comma-separated coefficient counts")
    else:
        sub.add_argument("--n", type=int, help="coefficient count")
    sub.add_argument("--sigma", type=float)
    sub.add_argument("--rho", type=float)
    sub.add_argument("--tol", type=float)
    sub.add_argument("--samples", type=int)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--workers", type=int,
                     help="defaults to RZLAB_WORKERS or 1")
    sub.add_argument("--output", help="path prefix for .json/.csv files")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rzlab",
                     description="Expected real zeros of random algebraic "
                                 "polynomials: exact integration and Monte Carlo")
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = subs.add_parser("validate", help="positive-definiteness report")
    _add_common(p, n_list=False)
    p.set_defaults(func=_cmd_validate)

    p = subs.add_parser("moments", help="second moments at a point, as JSON")
    _add_common(p, n_list=False)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--evaluator", choices=("fast", "direct"), default="fast")
    p.set_defaults(func=_cmd_moments)

    p = subs.add_parser("integrate", help="expected real zeros by quadrature")
    _add_common(p, n_list=False)
    p.set_defaults(func=_cmd_integrate)

    p = subs.add_parser("simulate", help="Monte Carlo zero counts")
    _add_common(p, n_list=False)
    p.add_argument("--histogram", action="store_true",
                   help="emit count,frequency histogram CSV")
    p.set_defaults(func=_cmd_simulate)

    p = subs.add_parser("sweep", help="run both methods over a list of n")
    _add_common(p, n_list=True)
    p.add_argument("--method", choices=METHODS)
    p.set_defaults(func=_cmd_sweep)

    p = subs.add_parser("compare", help="measured totals vs growth predictions")
    _add_common(p, n_list=True)
    p.set_defaults(func=_cmd_compare)

    return parser


def _build_config(args, n_list: bool) -> ExperimentConfig:
    file_cfg: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        if not isinstance(file_cfg, dict):
            raise _CliConfigError(f"config {args.config} must hold a JSON object")
    spec_d = dict(file_cfg.get("spec", {}))
    sweep_n = file_cfg.get("sweep_n")
    if args.kind is not None:
        spec_d["kind"] = args.kind
    if getattr(args, "n", None) is not None:
        if n_list:
            sweep_n = _parse_n_list(args.n)
            spec_d["n"] = sweep_n[0]
        else:
            spec_d["n"] = args.n
    elif n_list and sweep_n:
        spec_d.setdefault("n", int(sweep_n[0]))
    if args.sigma is not None:
        spec_d["sigma"] = args.sigma
    if args.rho is not None:
        spec_d["rho"] = args.rho
    if "kind" not in spec_d or "n" not in spec_d:
        raise _CliConfigError("--kind and --n are required (flags or config file)")
    spec_d.setdefault("sigma", 1.0)
    spec_d.setdefault("rho", 0.0)

    def pick(flag, key, default):
        value = getattr(args, flag, None)
        if value is not None:
            return value
        return file_cfg.get(key, default)

    workers_default = int(os.environ.get("RZLAB_WORKERS", "1"))
    try:
        return ExperimentConfig(
            spec=ModelSpec.from_dict(spec_d),
            method=pick("method", "method", "kacrice"),
            tol=float(pick("tol", "tol", 1e-8)),
            samples=int(pick("samples", "samples", 10000)),
            seed=int(pick("seed", "seed", 0)),
            sweep_n=tuple(int(n) for n in sweep_n) if sweep_n else None,
            output=pick("output", "output", None),
            workers=int(pick("workers", "workers", workers_default)),
        )
    except (ValueError, KeyError, TypeError) as exc:
        raise _CliConfigError(str(exc)) from exc


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _build_config(args, n_list=args.command in ("sweep", "compare"))
        start = time.perf_counter()
        status = args.func(cfg, args)
        elapsed_ms = 1e3 * (time.perf_counter() - start)
        print(f"[rzlab] {args.command} finished in {elapsed_ms:.1f} ms "
              f"(exit {status})", file=sys.stderr)
        return status
    except _CliConfigError as exc:
        print(f"[rzlab] config error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except (OSError, json.JSONDecodeError, OverflowRisk, ValueError) as exc:
        print(f"[rzlab] config error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except FactorizationFailure as exc:
        print(f"[rzlab] numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
