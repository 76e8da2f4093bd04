"""Command line front end.

Exit codes: 0 success, 1 verification failure, 2 configuration or parse error.
"""
from __future__ import annotations

import argparse
import itertools
import json
import sys
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from . import report
from .charts import curvature_bundle
from .config import (Scenario, build_geometry, load_scenario, resolve_lambda_bar,
                     sample_plan)
from .discrepancies import COLUMNS, discrepancy_table
from .grw import classify, family_chart, fiber_constant_fraction
from .verify import SamplePlan, coordinate_lambda, einstein_residual, verify_warped

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    pass


def _load(args) -> Scenario:
    if args.scenario is None:
        raise ConfigError("--scenario is required for this command")
    try:
        return load_scenario(args.scenario)
    except FileNotFoundError as exc:
        raise ConfigError(f"scenario not found: {exc.filename}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {args.scenario}: {exc}") from exc
    except ValidationError as exc:
        raise ConfigError(f"invalid scenario {args.scenario}:\n{exc}") from exc


def _build(sc: Scenario):
    try:
        return build_geometry(sc)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _out(args) -> Path:
    return Path(args.out)


def cmd_curvature(args, out) -> int:
    sc = _load(args)
    geo = _build(sc)
    chart = geo.chart
    if sc.points is not None:
        points = np.array(sc.points, dtype=float)
        if points.ndim != 2 or points.shape[1] != chart.dim:
            raise ConfigError(f"points must be lists of {chart.dim} coordinates")
    else:
        points = sample_plan(sc, args.samples, args.seed).generate(chart)
    bundle = curvature_bundle(chart, points)
    d = chart.dim
    rows = []
    for p in range(len(points)):
        quantities = [
            ("metric", bundle.metric[p], 2), ("christoffel", bundle.christoffel[p], 3),
            ("riemann", bundle.riemann[p], 4), ("ricci", bundle.ricci[p], 2),
            ("scalar", bundle.scalar[p], 0), ("einstein", bundle.einstein[p], 2),
        ]
        for name, arr, rank in quantities:
            for idx in itertools.product(range(d), repeat=rank):
                label = ".".join(chart.coord_names[i] for i in idx) or "-"
                rows.append([p, name, label, float(arr[idx] if rank else arr)])
    header = ["point", "quantity", "indices", "value"]
    coords = report.csv_text(["point", *chart.coord_names],
                             [[i, *map(float, pt)] for i, pt in enumerate(points)])
    text = report.csv_text(header, rows)
    out.write(coords)
    out.write(text)
    if args.out:
        report.write(_out(args) / "curvature.csv", text)
        report.write(_out(args) / "points.csv", coords)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    sc = _load(args)
    geo = _build(sc)
    plan = sample_plan(sc, args.samples, args.seed)
    tol = args.tol if args.tol is not None else sc.tolerances.residual
    try:
        points = plan.generate(geo.chart)
        lam = resolve_lambda_bar(sc, geo, points)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if geo.warped is None:
        rep = einstein_residual(geo.chart, lam, plan, tol)
        rep.extra["lambda_bar_coordinate"] = float(np.mean(coordinate_lambda(geo.chart, points)))
    else:
        paper = None
        if geo.family is not None:
            pc = geo.family.paper_constants()
            paper = {"lambda_bar": pc.lambda_bar_paper, "lambda_fiber": pc.lambda_fiber_paper}
        rep = verify_warped(geo.warped, lam, plan, tol, sc.tolerances.oracle, paper)
        rep.lambda_bar_stats = _restat(rep.lambda_bar_stats, sc.tolerances.constancy)
        rep.lambda_fiber_stats = _restat(rep.lambda_fiber_stats, sc.tolerances.constancy)
        rep.tolerances["constancy"] = sc.tolerances.constancy
    doc = {"scenario": sc.name, "command": "verify", "seed": plan.seed, **rep.to_dict()}
    outdir = _out(args)
    report.write(outdir / "report.json", report.dumps(doc) + "\n")
    report.write(outdir / "residuals.csv",
                 report.csv_text([*rep.coord_names, "max_abs", "max_rel"], rep.residual_rows()))
    for key in ("lambda_bar", "max_abs_residual", "max_rel_residual", "oracle_diff"):
        if doc[key] is not None:
            out.write(f"{key},{report.fmt(doc[key])}\n")
    for key, stats in (("lambda_bar_stats", rep.lambda_bar_stats),
                       ("lambda_fiber_stats", rep.lambda_fiber_stats)):
        if stats is not None:
            out.write(f"{key},{report.fmt(stats[0])},{report.fmt(stats[1])},{bool(stats[2])}\n")
    for key, flag in rep.sign_agreement.items():
        out.write(f"sign_{key},{flag}\n")
    out.write(f"pass,{rep.passed}\n")
    return EXIT_OK if rep.passed else EXIT_FAIL


def _restat(stats, rel):
    if stats is None:
        return None
    mean, std, _ = stats
    return mean, std, std <= rel * max(1.0, abs(mean))


def cmd_classify(args, out) -> int:
    lam, n, L, k, b = args.lambda_bar, args.n, args.L, 1.0, 0.0
    if args.scenario is not None:
        sc = _load(args)
        if sc.classify is None:
            raise ConfigError("scenario has no 'classify' section")
        c = sc.classify
        lam = c.lambda_bar if lam is None else lam
        n = c.n if n is None else n
        L = c.L if L is None else L
        k, b = c.k, c.b
    if lam is None or n is None:
        raise ConfigError("classify needs --lambda-bar and --n (or a scenario 'classify' section)")
    try:
        families = classify(lam, n, L if L is not None else 1.0, k, b)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    plan = SamplePlan(args.samples or 100, args.seed if args.seed is not None else SamplePlan().seed)
    rows = []
    for fam in families:
        pc = fam.paper_constants()
        w = family_chart(fam)
        pts = plan.generate(w.product)
        lb_oracle = float(np.mean(coordinate_lambda(w.product, pts)))
        lf_oracle = float(np.mean(coordinate_lambda(w.fiber, pts[:, 1:])))
        rows.append({
            "kind": fam.kind.value, "n": fam.n, "L": float(fam.L), "k": float(fam.k),
            "b": float(fam.b),
            "lambda_bar_paper": pc.lambda_bar_paper, "lambda_fiber_paper": pc.lambda_fiber_paper,
            "lambda_bar_oracle": lb_oracle, "lambda_fiber_oracle": lf_oracle,
            "fiber_constant_units": str(fiber_constant_fraction(fam.n)),
        })
    header = list(rows[0])
    out.write(report.csv_text(header, [[r[h] for h in header] for r in rows]))
    if args.out:
        report.write(_out(args) / "families.json", report.dumps(rows) + "\n")
    return EXIT_OK


def cmd_discrepancies(args, out) -> int:
    n = args.n if args.n is not None else 3
    L = args.L if args.L is not None else 1.0
    plan = SamplePlan(args.samples or 100, args.seed if args.seed is not None else SamplePlan().seed)
    tol = args.tol if args.tol is not None else 1e-6
    try:
        rows = discrepancy_table(n=n, L=L, plan=plan, tol=tol)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    text = report.csv_text(COLUMNS, [[r[c] for c in COLUMNS] for r in rows])
    out.write(text)
    if args.out:
        report.write(_out(args) / "discrepancies.csv", text)
        report.write(_out(args) / "discrepancies.json", report.dumps(rows) + "\n")
    return EXIT_OK


COMMANDS = {
    "curvature": cmd_curvature,
    "verify": cmd_verify,
    "classify": cmd_classify,
    "discrepancies": cmd_discrepancies,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="warpcheck",
                                description="Verify warped-product curvature and Einstein equations.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--scenario", help="JSON scenario file")
    p.add_argument("--out", help="directory for report files")
    p.add_argument("--seed", type=lambda s: int(s, 0), help="sampling seed override")
    p.add_argument("--samples", type=int, help="sample count override")
    p.add_argument("--tol", type=float, help="residual tolerance override")
    p.add_argument("--lambda-bar", dest="lambda_bar", type=float, help="classify: total-space constant")
    p.add_argument("--n", type=int, help="fiber dimension (classify, discrepancies)")
    p.add_argument("--L", type=float, help="length scale (classify hint, discrepancies)")
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.command == "verify" and args.out is None:
        args.out = "warpcheck-out"
    try:
        return COMMANDS[args.command](args, out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
