"""Curvature by direct coordinate differentiation on a single chart.

Everything here is batched: a point of shape ``(dim,)`` gives unbatched
arrays, a stack of shape ``(N, dim)`` gives arrays with a leading ``N`` axis.

Index conventions::

    christoffel[..., k, i, j]  = Gamma^k_{ij}
    riemann[..., l, i, j, k]   = R^l_{ijk}
        = d_j Gamma^l_{ik} - d_k Gamma^l_{ij}
          + Gamma^l_{jm} Gamma^m_{ik} - Gamma^l_{km} Gamma^m_{ij}
    ricci[..., i, j]           = R^k_{ikj}

so that the unit n-sphere has Ric = (n - 1) g.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .expr import Expression, constant, eval_jet2, parse

DET_FLOOR = 1e-12


class SingularMetricError(ValueError):
    pass


@dataclass(frozen=True)
class Exclusion:
    """Points with ``|x - at - h*period| < radius`` for some integer ``h`` are
    inadmissible (``period=None`` excludes a single locus)."""

    coord: str
    at: float
    period: float | None = None
    radius: float = 1e-2

    def distance(self, x: np.ndarray) -> np.ndarray:
        d = np.asarray(x, dtype=float) - self.at
        if self.period:
            p = abs(self.period)
            d = np.abs(d - p * np.round(d / p))
        return np.abs(d)


@dataclass(frozen=True)
class DomainHints:
    bounds: dict = field(default_factory=dict)
    exclusions: tuple[Exclusion, ...] = ()

    def merged(self, other: "DomainHints") -> "DomainHints":
        return DomainHints({**self.bounds, **other.bounds},
                           self.exclusions + other.exclusions)


@dataclass(frozen=True)
class MetricChart:
    coord_names: tuple[str, ...]
    components: tuple[tuple[Expression, ...], ...]
    signature: tuple[int, ...]
    domain_hints: DomainHints = field(default_factory=DomainHints)
    name: str = ""

    def __post_init__(self):
        d = len(self.coord_names)
        if d == 0 or len(set(self.coord_names)) != d:
            raise ValueError(f"coordinate names must be nonempty and distinct: {self.coord_names}")
        if len(self.components) != d or any(len(row) != d for row in self.components):
            raise ValueError(f"metric must be {d}x{d}")
        if len(self.signature) != d or any(s not in (-1, 1) for s in self.signature):
            raise ValueError(f"signature must be {d} entries of +-1, got {self.signature}")
        for row in self.components:
            for e in row:
                if e.coords != self.coord_names:
                    raise ValueError("component expressions must live on the chart coordinates")
                if e.free_params:
                    raise ValueError(f"unbound symbols {sorted(e.free_params)} in metric")

    @property
    def dim(self) -> int:
        return len(self.coord_names)

    @classmethod
    def from_strings(cls, coords: Sequence[str], metric, signature: Sequence[int],
                     params: dict | None = None, hints: DomainHints | None = None,
                     name: str = "") -> "MetricChart":
        """Build a chart from a full matrix (or a diagonal list) of expression text.

        The lower triangle of a full matrix must repeat the upper one; the
        upper expression object is reused so that components are bitwise
        symmetric.
        """
        coords = tuple(coords)
        params = dict(params or {})
        d = len(coords)

        def mk(text) -> Expression:
            if isinstance(text, (int, float)):
                return constant(text, coords)
            return parse(str(text), coords, params).bind(**params)

        if len(metric) == d and all(not isinstance(r, (list, tuple)) for r in metric):
            zero = constant(0.0, coords)
            rows = [[mk(metric[i]) if i == j else zero for j in range(d)] for i in range(d)]
        else:
            rows = [[mk(metric[i][j]) for j in range(d)] for i in range(d)]
            for i in range(d):
                for j in range(i):
                    if rows[i][j] != rows[j][i]:
                        raise ValueError(f"metric not symmetric at ({i}, {j})")
                    rows[i][j] = rows[j][i]
        return cls(coords, tuple(tuple(r) for r in rows), tuple(int(s) for s in signature),
                   hints or DomainHints(), name)

    def metric_jets(self, p):
        """Metric, first and second derivatives: ``g[..., a, b]``,
        ``dg[..., a, b, c] = d_c g_ab``, ``ddg[..., a, b, c, e] = d_c d_e g_ab``."""
        p = np.asarray(p, dtype=float)
        d = self.dim
        batch = p.shape[:-1]
        g = np.zeros(batch + (d, d))
        dg = np.zeros(batch + (d, d, d))
        ddg = np.zeros(batch + (d, d, d, d))
        for i in range(d):
            for j in range(i, d):
                jet = eval_jet2(self.components[i][j], p)
                for a, b in ((i, j), (j, i)):
                    g[..., a, b] = jet.value
                    dg[..., a, b, :] = jet.grad
                    ddg[..., a, b, :, :] = jet.hess
        return g, dg, ddg

    def metric(self, p) -> np.ndarray:
        return self.metric_jets(p)[0]

    def admissible(self, p) -> np.ndarray:
        """Boolean mask: outside exclusions, inside bounds, metric nondegenerate."""
        p = np.atleast_2d(np.asarray(p, dtype=float))
        ok = np.ones(p.shape[0], dtype=bool)
        index = {c: i for i, c in enumerate(self.coord_names)}
        for c, (lo, hi) in self.domain_hints.bounds.items():
            x = p[:, index[c]]
            ok &= (x >= lo) & (x <= hi)
        for ex in self.domain_hints.exclusions:
            ok &= ex.distance(p[:, index[ex.coord]]) >= ex.radius
        if ok.any():
            try:
                ok[ok] = self._regular(self.metric(p[ok]))
            except ValueError:
                # fall back to pointwise evaluation to isolate domain errors
                for k in np.flatnonzero(ok):
                    try:
                        ok[k] = self._regular(self.metric(p[k])[None])[0]
                    except ValueError:
                        ok[k] = False
        return ok

    def _regular(self, g: np.ndarray) -> np.ndarray:
        negatives = sum(1 for s in self.signature if s < 0)
        return ((np.abs(np.linalg.det(g)) >= DET_FLOOR)
                & ((np.linalg.eigvalsh(g) < 0).sum(axis=-1) == negatives))

    def signature_matches(self, p) -> np.ndarray:
        g = np.atleast_3d(self.metric(np.atleast_2d(p)))
        eig = np.linalg.eigvalsh(g)
        negatives = (eig < 0).sum(axis=-1)
        return negatives == sum(1 for s in self.signature if s < 0)


@dataclass(frozen=True)
class ScalarField:
    expr: Expression

    @classmethod
    def parse(cls, text: str, coords: Sequence[str], **params: float) -> "ScalarField":
        return cls(parse(text, coords, params).bind(**params))

    def jet(self, p):
        return eval_jet2(self.expr, p)


@dataclass
class CurvatureBundle:
    point: np.ndarray
    metric: np.ndarray
    inverse: np.ndarray
    christoffel: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: np.ndarray
    einstein: np.ndarray


def _inverse(g: np.ndarray) -> np.ndarray:
    det = np.linalg.det(g)
    if np.any(np.abs(det) < DET_FLOOR):
        raise SingularMetricError(f"degenerate metric (|det| = {np.min(np.abs(det)):.3g})")
    return np.linalg.inv(g)


def _first_kind(dg: np.ndarray) -> np.ndarray:
    # [l, i, j] = 1/2 (d_j g_il + d_i g_jl - d_l g_ij)
    return 0.5 * (np.einsum("...ilj->...lij", dg) + np.einsum("...jli->...lij", dg)
                  - np.einsum("...ijl->...lij", dg))


def _connection(g, dg, ddg):
    ginv = _inverse(g)
    first = _first_kind(dg)
    gamma = np.einsum("...kl,...lij->...kij", ginv, first)
    dfirst = 0.5 * (np.einsum("...iljm->...lijm", ddg) + np.einsum("...jlim->...lijm", ddg)
                    - np.einsum("...ijlm->...lijm", ddg))
    dginv = -np.einsum("...ka,...abm,...bl->...klm", ginv, dg, ginv)
    dgamma = (np.einsum("...klm,...lij->...kijm", dginv, first)
              + np.einsum("...kl,...lijm->...kijm", ginv, dfirst))
    return ginv, gamma, dgamma


def christoffel(chart: MetricChart, p) -> np.ndarray:
    """Second-kind Christoffel symbols ``[..., k, i, j]`` at ``p``."""
    g, dg, _ = chart.metric_jets(p)
    ginv = _inverse(g)
    first = _first_kind(dg)
    return np.einsum("...kl,...lij->...kij", ginv, first)


def curvature_bundle(chart: MetricChart, p) -> CurvatureBundle:
    p = np.asarray(p, dtype=float)
    g, dg, ddg = chart.metric_jets(p)
    ginv, gamma, dgamma = _connection(g, dg, ddg)
    # half[..., l, i, j, k] = d_j Gamma^l_{ik} + Gamma^l_{jm} Gamma^m_{ik}; antisymmetrising
    # in (j, k) makes R^l_{ijk} = -R^l_{ikj} hold bitwise
    half = (np.einsum("...likj->...lijk", dgamma)
            + np.einsum("...ljm,...mik->...lijk", gamma, gamma))
    riemann = half - np.swapaxes(half, -1, -2)
    ricci = np.einsum("...kikj->...ij", riemann)
    scalar = np.einsum("...ij,...ij->...", ginv, ricci)
    einstein = ricci - 0.5 * scalar[..., None, None] * g
    return CurvatureBundle(p, g, ginv, gamma, riemann, ricci, scalar, einstein)


@dataclass
class FieldCalculus:
    value: np.ndarray
    gradient: np.ndarray
    hessian: np.ndarray
    laplacian: np.ndarray
    grad_norm_sq: np.ndarray


def field_calculus(chart: MetricChart, psi: ScalarField, p) -> FieldCalculus:
    """Covariant Hessian, Laplacian and squared gradient norm of ``psi``."""
    if psi.expr.coords != chart.coord_names:
        psi = ScalarField(psi.expr.on(chart.coord_names))
    p = np.asarray(p, dtype=float)
    g, dg, ddg = chart.metric_jets(p)
    ginv = _inverse(g)
    first = _first_kind(dg)
    gamma = np.einsum("...kl,...lij->...kij", ginv, first)
    jet = psi.jet(p)
    hess = jet.hess - np.einsum("...kij,...k->...ij", gamma, jet.grad)
    lap = np.einsum("...ij,...ij->...", ginv, hess)
    norm = np.einsum("...ij,...i,...j->...", ginv, jet.grad, jet.grad)
    return FieldCalculus(jet.value, jet.grad, hess, lap, norm)


# --- standard charts ------------------------------------------------------

def flat_chart(coords: Sequence[str], signature: Sequence[int] | None = None,
               bounds: tuple[float, float] = (-1.0, 1.0), name: str = "flat") -> MetricChart:
    coords = tuple(coords)
    signature = tuple(signature or (1,) * len(coords))
    hints = DomainHints({c: bounds for c in coords})
    return MetricChart.from_strings(coords, [float(s) for s in signature], signature,
                                    hints=hints, name=name)


def line_chart(coord: str = "t", bounds: tuple[float, float] = (-1.0, 1.0)) -> MetricChart:
    """The time axis ``(I, -dt^2)``."""
    return flat_chart((coord,), (-1,), bounds, name="line")


def sphere_chart(n: int, r: float = 1.0, coords: Sequence[str] | None = None,
                 pole_margin: float = 0.3, exclusion_radius: float = 1e-2) -> MetricChart:
    """Round n-sphere of radius ``r`` in polar angles ``th1..th{n-1}, ph``."""
    if n < 1:
        raise ValueError("sphere dimension must be >= 1")
    coords = tuple(coords or [f"th{i + 1}" for i in range(n - 1)] + ["ph"])
    if len(coords) != n:
        raise ValueError(f"need {n} coordinate names")
    diag = []
    for i in range(n):
        factor = "*".join(f"sin({c})^2" for c in coords[:i])
        diag.append(f"{r!r}^2" + (f"*{factor}" if factor else ""))
    bounds = {c: (pole_margin, math.pi - pole_margin) for c in coords[:-1]}
    bounds[coords[-1]] = (-math.pi, math.pi)
    exclusions = tuple(Exclusion(c, 0.0, math.pi, exclusion_radius) for c in coords[:-1])
    return MetricChart.from_strings(coords, diag, (1,) * n,
                                    hints=DomainHints(bounds, exclusions), name="sphere")


def hyperbolic_chart(n: int, r: float = 1.0, coords: Sequence[str] | None = None) -> MetricChart:
    """Hyperbolic n-space of curvature radius ``r``: ``r^2 (du^2 + dz^2) / z^2``."""
    coords = tuple(coords or [f"u{i + 1}" for i in range(n - 1)] + ["z"])
    if len(coords) != n:
        raise ValueError(f"need {n} coordinate names")
    z = coords[-1]
    diag = [f"{r!r}^2/{z}^2"] * n
    bounds = {c: (-1.0, 1.0) for c in coords[:-1]}
    bounds[z] = (0.5, 2.0)
    return MetricChart.from_strings(coords, diag, (1,) * n,
                                    hints=DomainHints(bounds, (Exclusion(z, 0.0),)),
                                    name="hyperbolic")
