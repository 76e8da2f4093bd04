"""Ground-truth checks: Einstein residuals, closed-form vs. coordinate
curvature, constancy of the derived cosmological constants."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .charts import Exclusion, MetricChart, curvature_bundle
from .warped import (WarpedProduct, closed_form_curvature, fiber_einstein_condition,
                     lambda_bar)

ACCEPTANCE_SEED = 0xC05A05
RESIDUAL_TOL = 1e-6
ORACLE_TOL = 1e-6
CONSTANCY_REL = 1e-8


class NoAdmissibleSamples(ValueError):
    pass


@dataclass(frozen=True)
class SamplePlan:
    count: int = 100
    seed: int = ACCEPTANCE_SEED
    bounds: dict = field(default_factory=dict)
    exclusions: tuple[Exclusion, ...] = ()

    def generate(self, chart: MetricChart) -> np.ndarray:
        """``count`` admissible points of ``chart``, deterministic in ``seed``."""
        if self.count < 1:
            raise ValueError("sample count must be positive")
        bounds = {**chart.domain_hints.bounds, **self.bounds}
        lo = np.array([bounds.get(c, (-1.0, 1.0))[0] for c in chart.coord_names], dtype=float)
        hi = np.array([bounds.get(c, (-1.0, 1.0))[1] for c in chart.coord_names], dtype=float)
        index = {c: i for i, c in enumerate(chart.coord_names)}
        rng = np.random.default_rng(self.seed)
        kept = []
        total = 0
        for _ in range(50):
            cand = lo + (hi - lo) * rng.random((2 * self.count, chart.dim))
            ok = chart.admissible(cand)
            for ex in self.exclusions:
                ok &= ex.distance(cand[:, index[ex.coord]]) >= ex.radius
            kept.append(cand[ok])
            total += int(ok.sum())
            if total >= self.count:
                break
        if total == 0:
            raise NoAdmissibleSamples(f"no admissible sample points for chart {chart.name!r}")
        if total < self.count:
            raise NoAdmissibleSamples(
                f"only {total} of {self.count} admissible points found for {chart.name!r}")
        return np.concatenate(kept)[: self.count]


@dataclass
class VerificationReport:
    chart: str
    samples: int
    lambda_bar: float
    max_abs_residual: float
    max_rel_residual: float
    tolerances: dict
    passed: bool
    lambda_bar_stats: tuple | None = None
    lambda_fiber_stats: tuple | None = None
    oracle_diff: float | None = None
    sign_agreement: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    coord_names: tuple = ()
    points: np.ndarray | None = field(default=None, repr=False)
    point_abs: np.ndarray | None = field(default=None, repr=False)
    point_rel: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        def stats(s):
            if s is None:
                return None
            return {"mean": float(s[0]), "std": float(s[1]), "is_constant": bool(s[2])}

        return {
            "chart": self.chart,
            "samples": self.samples,
            "lambda_bar": float(self.lambda_bar),
            "max_abs_residual": float(self.max_abs_residual),
            "max_rel_residual": float(self.max_rel_residual),
            "lambda_bar_stats": stats(self.lambda_bar_stats),
            "lambda_fiber_stats": stats(self.lambda_fiber_stats),
            "oracle_diff": None if self.oracle_diff is None else float(self.oracle_diff),
            "sign_agreement": dict(self.sign_agreement),
            "tolerances": dict(self.tolerances),
            "extra": dict(self.extra),
            "pass": bool(self.passed),
        }

    def residual_rows(self):
        for p, a, r in zip(self.points, self.point_abs, self.point_rel):
            yield [*map(float, p), float(a), float(r)]


def _residuals(chart: MetricChart, lam: float, points: np.ndarray):
    bundle = curvature_bundle(chart, points)
    g = bundle.metric
    res = np.abs(bundle.einstein + lam * g).max(axis=(-1, -2))
    scale = np.maximum(1.0, np.abs(g).max(axis=(-1, -2)))
    return res, res / scale


def einstein_residual(chart: MetricChart, lambda_bar: float, plan: SamplePlan,
                      tol: float = RESIDUAL_TOL) -> VerificationReport:
    """``max |G_ab + lambda_bar g_ab|`` over the plan's sample points.

    The relative residual divides each point's maximum by
    ``max(1, max |g_ab|)`` at that point; the check passes when it is at most
    ``tol``.
    """
    points = plan.generate(chart)
    abs_r, rel_r = _residuals(chart, lambda_bar, points)
    max_rel = float(rel_r.max())
    return VerificationReport(
        chart=chart.name, samples=len(points), lambda_bar=float(lambda_bar),
        max_abs_residual=float(abs_r.max()), max_rel_residual=max_rel,
        tolerances={"residual": tol}, passed=max_rel <= tol,
        coord_names=chart.coord_names, points=points, point_abs=abs_r, point_rel=rel_r)


def coordinate_lambda(chart: MetricChart, points) -> np.ndarray:
    """Pointwise ``-g^ab G_ab / dim``: the constant ``G = -lambda g`` would need."""
    bundle = curvature_bundle(chart, points)
    return -np.einsum("...ab,...ab->...", bundle.inverse, bundle.einstein) / chart.dim


def _rel_diff(a: np.ndarray, b: np.ndarray, axes) -> float:
    scale = np.maximum(1.0, np.abs(b).max(axis=axes))
    return float((np.abs(a - b).max(axis=axes) / scale).max())


def oracle_diff(w: WarpedProduct, plan: SamplePlan) -> float:
    """Largest normalised gap between closed-form and coordinate curvature.

    Each tensor is compared per point and divided by ``max(1, max |oracle|)``
    at that point; Ricci, scalar and Einstein tensors are all included.
    """
    points = plan.generate(w.product)
    return _oracle_diff_at(w, points)


def _oracle_diff_at(w: WarpedProduct, points) -> float:
    cf = closed_form_curvature(w, points)
    bf = curvature_bundle(w.product, points)
    return max(_rel_diff(cf.ricci, bf.ricci, (-1, -2)),
               _rel_diff(cf.einstein, bf.einstein, (-1, -2)),
               _rel_diff(cf.scalar[..., None], bf.scalar[..., None], (-1,)))


def constancy(values, rel: float = CONSTANCY_REL):
    """``(mean, std, is_constant)`` with ``is_constant`` iff
    ``std <= rel * max(1, |mean|)``."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("constancy needs at least one value")
    if v.size < 2:
        raise ValueError("constancy needs at least two samples")
    mean = float(v.mean())
    std = float(v.std())
    return mean, std, std <= rel * max(1.0, abs(mean))


def sign_of(x: float, scale: float = 1.0, tol: float = 1e-9) -> int:
    if abs(x) <= tol * max(1.0, abs(scale)):
        return 0
    return 1 if x > 0 else -1


def verify_warped(w: WarpedProduct, lam: float, plan: SamplePlan, tol: float = RESIDUAL_TOL,
                  oracle_tol: float = ORACLE_TOL, paper: dict | None = None) -> VerificationReport:
    """Einstein residual, closed-form agreement and constancy for a product.

    ``paper`` optionally maps ``lambda_bar`` / ``lambda_fiber`` to published
    values; their signs are compared against the sampled oracle values.
    """
    report = einstein_residual(w.product, lam, plan, tol)
    points = report.points
    x = points[..., : w.m]
    diff = _oracle_diff_at(w, points)
    report.oracle_diff = diff
    report.tolerances["oracle"] = oracle_tol
    report.passed = report.passed and diff <= oracle_tol
    if w.m + w.n > 2:
        report.lambda_bar_stats = constancy(lambda_bar(w, x))
    report.lambda_fiber_stats = constancy(fiber_einstein_condition(w, x)[0])
    report.extra["lambda_bar_coordinate"] = constancy(coordinate_lambda(w.product, points))[0]
    report.extra["lambda_fiber_coordinate"] = constancy(
        coordinate_lambda(w.fiber, points[..., w.m:]))[0]
    if paper:
        oracle = {"lambda_bar": report.extra["lambda_bar_coordinate"],
                  "lambda_fiber": report.extra["lambda_fiber_coordinate"]}
        for key, value in paper.items():
            agree = sign_of(value, value) == sign_of(oracle[key], value)
            report.sign_agreement[key] = "agrees" if agree else "disagrees"
    return report
