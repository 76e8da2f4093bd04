"""Warped products ``g + f^2 h`` and their closed-form curvature.

Base indices ``i, j`` run over the first ``m`` product coordinates and fiber
indices ``alpha, beta`` over the remaining ``n``. All base-side quantities
(Hessian, Laplacian and gradient norm of ``f``) are taken with the base
chart's own metric, so Riemannian and Lorentzian bases share one path.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .charts import (DomainHints, MetricChart, ScalarField, curvature_bundle,
                     field_calculus, flat_chart, sphere_chart)
from .expr import BinOp, Const, Expression, Pow, eval_jet2, parse


class WarpingError(ValueError):
    pass


@dataclass(frozen=True)
class WarpedProduct:
    base: MetricChart
    fiber: MetricChart
    f: ScalarField
    product: MetricChart

    @property
    def m(self) -> int:
        return self.base.dim

    @property
    def n(self) -> int:
        return self.fiber.dim

    def split(self, p):
        p = np.asarray(p, dtype=float)
        return p[..., :self.m], p[..., self.m:]


def _base_samples(base: MetricChart, count: int = 64) -> np.ndarray:
    rng = np.random.default_rng(0)
    lo = np.array([base.domain_hints.bounds.get(c, (-1.0, 1.0))[0] for c in base.coord_names])
    hi = np.array([base.domain_hints.bounds.get(c, (-1.0, 1.0))[1] for c in base.coord_names])
    pts = lo + (hi - lo) * rng.random((count, base.dim))
    return np.vstack([lo, hi, pts])


def assemble(base: MetricChart, fiber: MetricChart, f: ScalarField,
             check_points=None) -> WarpedProduct:
    """Product chart with ``g_ij`` on the base block, ``f(x)^2 h_ab(y)`` on
    the fiber block and zeros in between.

    ``f`` is checked for positivity at ``check_points`` (default: corners
    plus a fixed pseudo-random sweep of the base bounds).
    """
    clash = set(base.coord_names) & set(fiber.coord_names)
    if clash:
        raise ValueError(f"base and fiber share coordinate names {sorted(clash)}")
    if f.expr.coords != base.coord_names:
        f = ScalarField(f.expr.on(base.coord_names))
    pts = _base_samples(base) if check_points is None else np.atleast_2d(check_points)
    values = eval_jet2(f.expr, pts).value
    if np.any(values <= 0):
        bad = pts[np.argmax(values <= 0)]
        raise WarpingError(f"warping function is not positive at {bad.tolist()}")

    coords = base.coord_names + fiber.coord_names
    m, n = base.dim, fiber.dim
    zero = Expression(Const(0.0), coords)
    f2 = Pow(f.expr.root, Fraction(2))
    rows = []
    for a in range(m + n):
        row = []
        for b in range(m + n):
            if a < m and b < m:
                row.append(base.components[a][b].on(coords))
            elif a >= m and b >= m:
                h = fiber.components[a - m][b - m]
                if isinstance(h.root, Const) and h.root.value == 0.0:
                    row.append(zero)
                else:
                    row.append(Expression(BinOp("*", f2, h.root), coords))
            else:
                row.append(zero)
        rows.append(tuple(row))
    # keep the lower triangle bitwise identical to the upper one
    for a in range(m + n):
        for b in range(a):
            rows[a] = rows[a][:b] + (rows[b][a],) + rows[a][b + 1:]
    product = MetricChart(coords, tuple(rows), base.signature + fiber.signature,
                          base.domain_hints.merged(fiber.domain_hints),
                          name=f"{base.name or 'base'} x_f {fiber.name or 'fiber'}")
    return WarpedProduct(base, fiber, f, product)


@dataclass
class WarpedCurvature:
    m: int
    n: int
    metric: np.ndarray
    ric_base: np.ndarray
    ric_mixed: np.ndarray
    ric_fiber: np.ndarray
    scalar: np.ndarray
    ein_base: np.ndarray
    ein_mixed: np.ndarray
    ein_fiber: np.ndarray

    def _full(self, base, mixed, fiber):
        m = self.m
        out = np.zeros(self.metric.shape)
        out[..., :m, :m] = base
        out[..., :m, m:] = mixed
        out[..., m:, :m] = np.swapaxes(mixed, -1, -2)
        out[..., m:, m:] = fiber
        return out

    @property
    def ricci(self) -> np.ndarray:
        return self._full(self.ric_base, self.ric_mixed, self.ric_fiber)

    @property
    def einstein(self) -> np.ndarray:
        return self._full(self.ein_base, self.ein_mixed, self.ein_fiber)


@dataclass
class _BaseTerms:
    f: np.ndarray
    hess: np.ndarray
    lap: np.ndarray
    norm: np.ndarray
    bundle: object


def _base_terms(w: WarpedProduct, x) -> _BaseTerms:
    fc = field_calculus(w.base, w.f, x)
    if np.any(fc.value <= 0):
        raise WarpingError("warping function is not positive at the requested point")
    return _BaseTerms(fc.value, fc.hessian, fc.laplacian, fc.grad_norm_sq,
                      curvature_bundle(w.base, x))


def closed_form_curvature(w: WarpedProduct, p) -> WarpedCurvature:
    """Ricci, scalar and Einstein tensors of the product from factor data only."""
    x, y = w.split(p)
    m, n = w.m, w.n
    bt = _base_terms(w, x)
    fib = curvature_bundle(w.fiber, y)
    f = bt.f[..., None, None]
    lap_f = (bt.lap / bt.f)[..., None, None]
    norm_f2 = (bt.norm / bt.f ** 2)[..., None, None]
    g = bt.bundle.metric
    h = fib.metric
    s1 = bt.bundle.scalar[..., None, None]
    s2 = fib.scalar[..., None, None]

    ric_base = bt.bundle.ricci - (n / f) * bt.hess
    ric_fiber = fib.ricci - (lap_f + (n - 1) * norm_f2) * f ** 2 * h
    scalar = (bt.bundle.scalar + fib.scalar / bt.f ** 2 - 2 * n * bt.lap / bt.f
              - n * (n - 1) * bt.norm / bt.f ** 2)
    ein_base = (bt.bundle.einstein - (n / f) * bt.hess
                - 0.5 * (s2 / f ** 2 - 2 * n * lap_f - n * (n - 1) * norm_f2) * g)
    ein_fiber = fib.einstein - f ** 2 * (lap_f * (1 - n) + 0.5 * s1
                                         + (n - 1) * (2 - n) / 2 * norm_f2) * h
    batch = np.shape(bt.f)
    mixed = np.zeros(batch + (m, n))
    metric = w.product.metric(p)
    return WarpedCurvature(m, n, metric, ric_base, mixed, ric_fiber, scalar,
                           ein_base, mixed.copy(), ein_fiber)


def lambda_bar(w: WarpedProduct, x) -> np.ndarray:
    """Cosmological constant forced by the trace of the base block of the
    Einstein equation, ``-((m+n-2)/(2m)) (n lap(f)/f - S_base)``, pointwise."""
    m, n = w.m, w.n
    if m + n <= 2:
        raise ValueError("lambda_bar needs m + n > 2")
    bt = _base_terms(w, x)
    return -((m + n - 2) / (2 * m)) * (n * bt.lap / bt.f - bt.bundle.scalar)


def fiber_einstein_condition(w: WarpedProduct, x):
    """``(lambda_fiber, ric_coeff)`` at base point(s) ``x``.

    ``ric_coeff`` is the multiple of ``h`` the fiber Ricci tensor must equal
    for the product to solve the Einstein equation, and ``lambda_fiber`` the
    induced fiber cosmological constant ``-(1 - n/2) ric_coeff``.
    """
    m, n = w.m, w.n
    bt = _base_terms(w, x)
    ric_coeff = bt.f ** 2 * (bt.lap / bt.f * (1 - n / m) + bt.bundle.scalar / m
                             + (n - 1) * bt.norm / bt.f ** 2)
    return -(1 - n / 2) * ric_coeff, ric_coeff


def eigenvalue_check(w: WarpedProduct, lam_bar: float, x):
    """Signed residuals ``(derived, printed)`` of ``lap(f) = mu f``.

    ``derived`` uses ``mu = ((m+n-2) S - 2 m lam_bar) / (n (m+n-2))`` obtained
    by solving the trace equation for ``lap(f)/f``; ``printed`` uses the
    published eigenvalue ``(2 m lam_bar + (m+n-2) S) / (n (m+n-2))``.
    """
    m, n = w.m, w.n
    if m + n <= 2:
        raise ValueError("eigenvalue_check needs m + n > 2")
    bt = _base_terms(w, x)
    s1 = bt.bundle.scalar
    mu_derived = ((m + n - 2) * s1 - 2 * m * lam_bar) / (n * (m + n - 2))
    mu_printed = (2 * m * lam_bar + (m + n - 2) * s1) / (n * (m + n - 2))
    return bt.lap - bt.f * mu_derived, bt.lap - bt.f * mu_printed


# --- example products -------------------------------------------------------

def fuzzed_warped_product(seed: int, amplitude: float = 0.2) -> WarpedProduct:
    """Random smooth 2D Riemannian base over the unit 2-sphere.

    Every base metric entry is perturbed by at most ``amplitude`` in absolute
    value, which keeps the base positive definite for ``amplitude < 0.5``.
    """
    rng = np.random.default_rng(seed)
    coords = ("x1", "x2")

    def bump():
        a, b, c = (float(v) for v in rng.uniform(-1, 1, 3))
        w1, w2 = (float(v) for v in rng.uniform(0.5, 2.0, 2))
        # |a sin| + |b cos| + |c| x1 x2 with x in [-1, 1], scaled to amplitude
        norm = abs(a) + abs(b) + abs(c)
        s = amplitude / norm
        return (f"({s * a!r})*sin({w1!r}*x1 + {w2!r}*x2) + ({s * b!r})*cos({w2!r}*x1 - {w1!r}*x2)"
                f" + ({s * c!r})*x1*x2")

    g11, g22, g12 = f"1 + {bump()}", f"1 + {bump()}", bump()
    base = MetricChart.from_strings(coords, [[g11, g12], [g12, g22]], (1, 1),
                                    hints=DomainHints({c: (-1.0, 1.0) for c in coords}),
                                    name="fuzzed")
    c1, c2 = (float(v) for v in rng.uniform(-0.1, 0.1, 2))
    f = ScalarField(parse(f"1 + 0.1*x1^2 + ({c1!r})*sin(x2) + ({c2!r})*x1*x2", coords))
    return assemble(base, sphere_chart(2), f)


def direct_product(base: MetricChart, fiber: MetricChart) -> WarpedProduct:
    return assemble(base, fiber, ScalarField(Expression(Const(1.0), base.coord_names)))


def torus_chart(m: int = 2, coords=None) -> MetricChart:
    """Flat torus: identity metric on a periodic box of side 2 pi."""
    coords = tuple(coords or [f"x{i + 1}" for i in range(m)])
    return flat_chart(coords, bounds=(0.0, 2 * np.pi), name="torus")
