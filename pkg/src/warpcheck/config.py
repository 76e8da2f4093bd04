"""Scenario files: strict JSON (``"version": 1``) describing a geometry to check."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from . import charts, grw
from .charts import DomainHints, Exclusion, MetricChart, ScalarField
from .expr import Const, Expression, parse
from .verify import (ACCEPTANCE_SEED, CONSTANCY_REL, ORACLE_TOL, RESIDUAL_TOL,
                     SamplePlan, coordinate_lambda)
from .warped import WarpedProduct, assemble, lambda_bar, torus_chart


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ExclusionSpec(_Strict):
    coord: str
    at: float
    period: Optional[float] = None
    radius: float = 1e-2


class ChartSpec(_Strict):
    builtin: Literal["line", "torus", "sphere", "hyperbolic", "flat", "flat_spherical",
                     "matched", "custom"] = "custom"
    dim: Optional[int] = None
    scale: float = 1.0
    coords: Optional[list[str]] = None
    metric: Optional[list[list[Union[str, float]]]] = None
    diagonal: Optional[list[Union[str, float]]] = None
    signature: Optional[list[int]] = None
    params: dict[str, float] = {}
    bounds: dict[str, tuple[float, float]] = {}
    exclusions: list[ExclusionSpec] = []

    @model_validator(mode="after")
    def _check(self):
        if self.builtin == "custom":
            if (self.metric is None) == (self.diagonal is None):
                raise ValueError("custom chart needs exactly one of 'metric' or 'diagonal'")
            if not self.coords:
                raise ValueError("custom chart needs 'coords'")
        return self


class WarpingSpec(_Strict):
    family: Optional[Literal["exp", "cosh", "sinh", "cos", "linear"]] = None
    k: float = 1.0
    L: float = 1.0
    b: float = 0.0
    n: Optional[int] = None
    expression: Optional[str] = None
    params: dict[str, float] = {}

    @model_validator(mode="after")
    def _check(self):
        if (self.family is None) == (self.expression is None):
            raise ValueError("warping needs exactly one of 'family' or 'expression'")
        return self


class LambdaSpec(_Strict):
    policy: Literal["paper", "oracle", "explicit"] = "oracle"
    value: Optional[float] = None

    @model_validator(mode="after")
    def _check(self):
        if self.policy == "explicit" and self.value is None:
            raise ValueError("explicit lambda_bar policy needs 'value'")
        return self


class SamplingSpec(_Strict):
    count: int = 100
    seed: int = ACCEPTANCE_SEED
    bounds: dict[str, tuple[float, float]] = {}


class Tolerances(_Strict):
    residual: float = RESIDUAL_TOL
    oracle: float = ORACLE_TOL
    constancy: float = CONSTANCY_REL


class ClassifySpec(_Strict):
    lambda_bar: float
    n: int
    L: float = 1.0
    k: float = 1.0
    b: float = 0.0


class Scenario(_Strict):
    version: Literal[1]
    name: str = ""
    base: Optional[ChartSpec] = None
    fiber: Optional[ChartSpec] = None
    warping: Optional[WarpingSpec] = None
    lambda_bar: LambdaSpec = LambdaSpec()
    sampling: SamplingSpec = SamplingSpec()
    tolerances: Tolerances = Tolerances()
    points: Optional[list[list[float]]] = None
    classify: Optional[ClassifySpec] = None


def load_scenario(path) -> Scenario:
    text = Path(path).read_text()
    return Scenario.model_validate(json.loads(text))


# --- building geometry from a scenario ----------------------------------------

def _hints(spec: ChartSpec, base: DomainHints | None = None) -> DomainHints:
    extra = DomainHints(dict(spec.bounds),
                        tuple(Exclusion(e.coord, e.at, e.period, e.radius) for e in spec.exclusions))
    return extra if base is None else base.merged(extra)


def _with_hints(chart: MetricChart, spec: ChartSpec) -> MetricChart:
    hints = _hints(spec, chart.domain_hints)
    return MetricChart(chart.coord_names, chart.components, chart.signature, hints, chart.name)


def build_chart(spec: ChartSpec, role: str, family: "grw.GRWFamily | None" = None) -> MetricChart:
    kind = spec.builtin
    dim = spec.dim
    if kind == "custom":
        signature = spec.signature or [1] * len(spec.coords)
        metric = spec.diagonal if spec.diagonal is not None else spec.metric
        return MetricChart.from_strings(spec.coords, metric, signature, spec.params,
                                        _hints(spec), name=f"custom-{role}")
    if kind == "matched":
        if family is None:
            raise ValueError("'matched' fiber requires a warping family")
        chart = family.matched_fiber()
    elif kind == "line":
        chart = charts.line_chart((spec.coords or ["t"])[0])
    elif kind == "torus":
        chart = torus_chart(dim or 2, spec.coords)
    elif kind == "sphere":
        coords = spec.coords
        if coords is None and role == "base":
            coords = [f"bth{i + 1}" for i in range((dim or 2) - 1)] + ["bph"]
        chart = charts.sphere_chart(dim or 2, spec.scale, coords)
    elif kind == "hyperbolic":
        chart = charts.hyperbolic_chart(dim or 2, spec.scale, spec.coords)
    elif kind == "flat":
        coords = spec.coords or [f"{'x' if role == 'base' else 'y'}{i + 1}" for i in range(dim or 2)]
        chart = charts.flat_chart(coords, spec.signature)
    else:
        chart = grw.flat_spherical_fiber()
    if dim is not None and chart.dim != dim:
        raise ValueError(f"{role} chart has dimension {chart.dim}, scenario says {dim}")
    return _with_hints(chart, spec)


class Geometry:
    """What a scenario resolves to: a single chart, or a warped product."""

    def __init__(self, chart: MetricChart, warped: WarpedProduct | None = None,
                 family: "grw.GRWFamily | None" = None):
        self.chart = chart
        self.warped = warped
        self.family = family


def build_geometry(sc: Scenario) -> Geometry:
    w = sc.warping
    if w is not None and w.family is not None:
        fiber_spec = sc.fiber or ChartSpec(builtin="matched")
        n = w.n or fiber_spec.dim
        if n is None and fiber_spec.builtin == "flat_spherical":
            n = 3
        if n is None:
            raise ValueError("warping family needs the fiber dimension ('n' or fiber 'dim')")
        fam = grw.GRWFamily(grw.Family(w.family), n, w.k, w.L, w.b)
        fiber = build_chart(fiber_spec, "fiber", fam)
        if fiber.dim != n:
            raise ValueError(f"fiber has dimension {fiber.dim}, warping family says n={n}")
        base = fam.base_chart()
        if sc.base is not None:
            if sc.base.builtin not in ("line", "custom") or sc.base.metric or sc.base.diagonal:
                raise ValueError("GRW families use the built-in time line as base")
            base = _with_hints(base, sc.base)
        wp = assemble(base, fiber, fam.warping)
        return Geometry(wp.product, wp, fam)
    if sc.base is None:
        raise ValueError("scenario needs a 'base' chart")
    base = build_chart(sc.base, "base")
    if sc.fiber is None:
        if w is not None:
            raise ValueError("a warping function needs a fiber")
        return Geometry(base)
    fiber = build_chart(sc.fiber, "fiber")
    if w is None:
        f = ScalarField(Expression(Const(1.0), base.coord_names))
    else:
        f = ScalarField(parse(w.expression, base.coord_names, w.params).bind(**w.params))
    wp = assemble(base, fiber, f)
    return Geometry(wp.product, wp)


def sample_plan(sc: Scenario, count: int | None = None, seed: int | None = None) -> SamplePlan:
    return SamplePlan(count if count is not None else sc.sampling.count,
                      seed if seed is not None else sc.sampling.seed,
                      dict(sc.sampling.bounds))


def resolve_lambda_bar(sc: Scenario, geo: Geometry, points: np.ndarray) -> float:
    pol = sc.lambda_bar
    if pol.policy == "explicit":
        return float(pol.value)
    if pol.policy == "oracle":
        return float(np.mean(coordinate_lambda(geo.chart, points)))
    if geo.family is not None:
        return geo.family.paper_constants().lambda_bar_paper
    if geo.warped is not None:
        return float(np.mean(lambda_bar(geo.warped, points[..., : geo.warped.m])))
    raise ValueError("'paper' lambda_bar policy needs a warped product")
