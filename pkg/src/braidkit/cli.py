"""Command-line front end: verification reports, moment tables and operator matrices."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

from braidkit.braided_space import check_braiding_well_defined, NotCovariant
from braidkit.models import ModelSpec, ModelValidationError, UnknownModel, build_model
from braidkit.operators import (
    NotWellDefined,
    SuiteEntry,
    antipode_op,
    applicable_leibniz,
    check_well_defined,
    cross_relation_residual,
    derivative_op,
    dilaton_op,
    intertwiner_residual,
    leibniz_residual,
    rotation_op,
    twisting_residual,
)
from braidkit.rmatrix import NoMetric, NotRibbonScalar, hecke_check, metric_residuals, mixed_relations_residual, qybe_residual
from braidkit.scalars import PoleAtSpecialization, QScalar, specialize

__all__ = ["VerificationReport", "emit_report", "main", "run_verify_suite"]

DEFAULT_MAX_DEGREE = 4
OP_CHOICES = ("partial", "partialbar", "lplus", "lminus", "dilaton", "antipode", "theta-v", "theta-u")


@dataclass
class VerificationReport:
    model: str
    max_degree: int
    lambda_nu: bool
    entries: list[SuiteEntry] = field(default_factory=list)
    skipped: list[tuple[str, str]] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(e.status == "pass" for e in self.entries)

    def to_json_obj(self, with_timings: bool = False) -> dict:
        out = {
            "model": self.model,
            "config": {"max_degree": self.max_degree, "lambda_nu": self.lambda_nu},
            "entries": [e.to_json_obj() for e in self.entries],
            "skipped": [{"suite": s, "reason": r} for s, r in self.skipped],
            "passed": self.passed,
        }
        if with_timings:
            out["timings"] = {k: round(v, 3) for k, v in self.timings.items()}
        return out

    def to_text(self) -> str:
        lines = [f"model {self.model}  max_degree {self.max_degree}  lambda_nu {'on' if self.lambda_nu else 'off'}"]
        for e in self.entries:
            lines.append(f"{e.status.upper():4}  {e.identity}  [{e.anchor}]  degree {e.degree}  residual {e.residual}")
        for s, r in self.skipped:
            lines.append(f"SKIP  {s}  ({r})")
        lines.append("all pass" if self.passed else "FAILURES")
        return "\n".join(lines) + "\n"


def emit_report(report: VerificationReport, fmt: str = "json", path: str | None = None,
                with_timings: bool = False) -> str:
    """Serialize ``report``; JSON uses sorted keys so equal reports give equal bytes."""
    if fmt == "json":
        text = json.dumps(report.to_json_obj(with_timings), sort_keys=True, indent=2) + "\n"
    elif fmt == "text":
        text = report.to_text()
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


# -- suites ------------------------------------------------------------------------------


def _matrix_residual(mat) -> str:
    worst = "0"
    for _, _, v in mat.entries():
        s = str(QScalar(v))
        if worst == "0" or (len(s), s) > (len(worst), worst):
            worst = s
    return worst


def rmatrix_battery(model: ModelSpec) -> list[SuiteEntry]:
    out = [SuiteEntry("qybe", "R12 R13 R23 = R23 R13 R12", 0, _matrix_residual(qybe_residual(model.R)))]
    hecke_target = model.seed if model.seed is not None else model.R
    out.append(SuiteEntry("hecke", "quadratic minimal polynomial of PR", 0,
                          "0" if hecke_check(hecke_target).holds else "1"))
    for k, res in enumerate(mixed_relations_residual(model.Rprime, model.R), 1):
        out.append(SuiteEntry(f"mixed relation {k}", "compatibility of R' with R", 0, _matrix_residual(res)))
    if model.eta is not None:
        for k, res in enumerate(metric_residuals(model.R, model.eta, model.lambda_squared), 1):
            out.append(SuiteEntry(f"metric identity {k}", "eta invariance under R", 0, _matrix_residual(res)))
    return out


def well_definedness(model: ModelSpec, max_degree: int) -> list[SuiteEntry]:
    """Braiding and derivatives preserve the relation ideal; residual ``1`` marks a violation."""
    out = []
    for total in range(2, max_degree + 1):
        bad = "0"
        for m in range(0, total + 1):
            try:
                check_braiding_well_defined(model, m, total - m)
            except NotCovariant:
                bad = "1"
        out.append(SuiteEntry("braiding well defined", "Psi preserves the relations", total, bad))
    for m in range(2, max_degree + 1):
        bad = "0"
        for i in range(model.n):
            for op in (derivative_op(model, i), derivative_op(model, i, True)):
                try:
                    check_well_defined(op, m)
                except NotWellDefined:
                    bad = "1"
        out.append(SuiteEntry("derivatives well defined", "d and dbar preserve the relations", m, bad))
    return out


def _suites(model: ModelSpec, D: int, use_lambda_nu: bool):
    from braidkit import integration, star_metric

    yield "rmatrix", lambda: rmatrix_battery(model), None
    yield "well-definedness", lambda: well_definedness(model, D), None
    for v in applicable_leibniz(model):
        yield f"leibniz:{v}", (lambda v=v: leibniz_residual(model, v, D)), None
    yield "intertwiner", lambda: intertwiner_residual(model, D), None
    yield "cross", lambda: cross_relation_residual(model, D), None
    yield "twisting", lambda: twisting_residual(model, D), None
    no_metric = None if model.eta is not None else "no quantum metric"
    yield "theta-star", lambda: star_metric.theta_star_consistency(model, D), no_metric
    adj_skip = no_metric or (None if model.lam is not None else "lambda is not in Q(q)")
    yield "adjointness", lambda: integration.adjointness_residual(model, D, use_lambda_nu), adj_skip
    yield "conj-symmetry", lambda: integration.conj_symmetry_residual(model, D, use_lambda_nu), no_metric


def run_verify_suite(name: str, max_degree: int, use_lambda_nu: bool = True) -> VerificationReport:
    """Run every applicable identity suite on the built-in model ``name``, in a fixed order."""
    model = build_model(name)
    report = VerificationReport(name, max_degree, use_lambda_nu)
    for suite, run, skip in _suites(model, max_degree, use_lambda_nu):
        if skip is not None:
            report.skipped.append((suite, skip))
            continue
        t0 = time.perf_counter()
        report.entries.extend(run())
        report.timings[suite] = time.perf_counter() - t0
    return report


# -- other subcommands ------------------------------------------------------------------------


def _op_blocks(model: ModelSpec, op: str, m: int) -> dict:
    from braidkit.star_metric import theta_automorphism

    n = model.n
    if op in ("partial", "partialbar"):
        return {str(i): derivative_op(model, i, op == "partialbar").block(m).to_json_obj() for i in range(n)}
    if op in ("lplus", "lminus"):
        sign = "+" if op == "lplus" else "-"
        return {f"{i},{j}": rotation_op(model, i, j, sign).block(m).to_json_obj()
                for i in range(n) for j in range(n)}
    if op == "dilaton":
        return {"": dilaton_op(model).block(m).to_json_obj()}
    if op == "antipode":
        return {"": antipode_op(model).block(m).to_json_obj()}
    return {"": theta_automorphism(model, op[-1]).block(m).to_json_obj()}


def _dense(mat, conv=str) -> list[list[str]]:
    return [[conv(v) for v in row] for row in mat.to_dense(0)]


def _theta_obj(model: ModelSpec) -> dict:
    if model.theta is None:
        raise NotRibbonScalar(f"{model.name} carries no theta data")
    t = model.theta
    return {"model": model.name, "v": _dense(t.v, lambda x: str(QScalar(x))),
            "u": _dense(t.u, lambda x: str(QScalar(x))), "lambda_nu": str(t.lambda_nu)}


def _specialized(model: ModelSpec, q0: Fraction) -> dict:
    def sp(x):
        return str(specialize(QScalar(x), q0))

    out = {"model": model.name, "q": str(q0), "R": _dense(model.R.mat, sp), "Rprime": _dense(model.Rprime.mat, sp)}
    if model.eta is not None:
        out["eta"] = _dense(model.eta, sp)
        out["lambda_squared"] = sp(model.lambda_squared)
    if model.theta is not None:
        out["v"] = _dense(model.theta.v, sp)
        out["u"] = _dense(model.theta.u, sp)
        out["lambda_nu"] = sp(model.theta.lambda_nu)
    return out


def _dump(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _default_degree() -> int:
    raw = os.environ.get("BRAIDKIT_MAX_DEGREE")
    if raw is None:
        return DEFAULT_MAX_DEGREE
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"BRAIDKIT_MAX_DEGREE must be an integer, got {raw!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="braidkit", description="Exact checks on braided covector spaces.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the identity suites on a model")
    v.add_argument("model")
    v.add_argument("--max-degree", type=int, default=None)
    v.add_argument("--no-lambda-nu", action="store_true", help="drop the lambda_nu^|b| weight of the form")
    v.add_argument("--report", default="-", help="output path (default stdout)")
    v.add_argument("--format", choices=("json", "text"), default="json")
    v.add_argument("--timings", action="store_true", help="include wall-clock timings in JSON")

    z = sub.add_parser("ztable", help="moments of the Gaussian functional")
    z.add_argument("model")
    z.add_argument("--degree", type=int, required=True)

    o = sub.add_parser("opmatrix", help="matrix of an operator on one degree")
    o.add_argument("model")
    o.add_argument("--op", choices=OP_CHOICES, required=True)
    o.add_argument("--degree", type=int, required=True)

    t = sub.add_parser("theta", help="v, u and lambda_nu")
    t.add_argument("model")

    s = sub.add_parser("specialize", help="model data at a rational value of q")
    s.add_argument("model")
    s.add_argument("--q", required=True, type=Fraction)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        if args.command == "verify":
            D = args.max_degree if args.max_degree is not None else _default_degree()
            if D < 0:
                raise ValueError("max degree must be non-negative")
            report = run_verify_suite(args.model, D, not args.no_lambda_nu)
            emit_report(report, args.format, args.report, args.timings)
            return 0 if report.passed else 1
        model = build_model(args.model)
        if args.degree < 0 if hasattr(args, "degree") else False:
            raise ValueError("degree must be non-negative")
        if args.command == "ztable":
            from braidkit.integration import moment_table

            _dump(moment_table(model).to_json_obj(args.degree))
        elif args.command == "opmatrix":
            _dump({"model": model.name, "op": args.op, "degree": args.degree,
                   "blocks": _op_blocks(model, args.op, args.degree)})
        elif args.command == "theta":
            _dump(_theta_obj(model))
        else:
            _dump(_specialized(model, args.q))
        return 0
    except UnknownModel as exc:
        print(f"braidkit: unknown model {exc.args[0]!r}", file=sys.stderr)
    except (NoMetric, NotRibbonScalar, PoleAtSpecialization, ModelValidationError, ValueError) as exc:
        print(f"braidkit: {type(exc).__name__}: {exc}", file=sys.stderr)
    except OSError as exc:
        print(f"braidkit: {exc}", file=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
