"""Generalized Robertson-Walker spacetimes ``-dt^2 + f(t)^2 h``.

The five exact warping families and their published constants live here,
together with the B-function form of the cosmological constant and the
standard Einstein fibers that realise each family locally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .charts import (DomainHints, Exclusion, MetricChart, ScalarField,
                     flat_chart, hyperbolic_chart, line_chart, sphere_chart)
from .expr import parse
from .warped import WarpedProduct, assemble


class Family(str, Enum):
    EXP = "exp"
    COSH = "cosh"
    SINH = "sinh"
    COS = "cos"
    LINEAR = "linear"


_WARPING = {
    Family.EXP: "exp(t/L)/sqrt(k)",
    Family.COSH: "cosh((b+t)/L)/sqrt(k)",
    Family.SINH: "sinh((b+t)/L)/sqrt(k)",
    Family.COS: "cos((b+t)/L)/sqrt(k)",
    Family.LINEAR: "(b-t)/L",
}


@dataclass(frozen=True)
class FamilyConstants:
    lambda_bar_paper: float
    lambda_fiber_paper: float
    lambda_bar_oracle: float | None = None
    lambda_fiber_oracle: float | None = None


@dataclass(frozen=True)
class GRWFamily:
    kind: Family
    n: int
    k: float = 1.0
    L: float = 1.0
    b: float = 0.0
    exclusion_radius: float = 1e-2

    def __post_init__(self):
        object.__setattr__(self, "kind", Family(self.kind))
        if self.n <= 1:
            raise ValueError("GRW fiber dimension must exceed 1")
        if self.L == 0:
            raise ValueError("L must be nonzero")
        if self.kind is not Family.LINEAR and self.k <= 0:
            raise ValueError("k must be positive")

    @property
    def warping(self) -> ScalarField:
        e = parse(_WARPING[self.kind], ("t",), ("k", "L", "b"))
        return ScalarField(e.bind(k=self.k, L=self.L, b=self.b))

    @property
    def excluded_times(self) -> tuple[Exclusion, ...]:
        r = self.exclusion_radius
        if self.kind is Family.SINH:
            return (Exclusion("t", -self.b, None, r),)
        if self.kind is Family.COS:
            return (Exclusion("t", -self.b + self.L * math.pi / 2, abs(self.L) * math.pi, r),)
        if self.kind is Family.LINEAR:
            return (Exclusion("t", self.b, None, r),)
        return ()

    def time_window(self) -> tuple[float, float]:
        """A sampling interval on which the warping function is positive."""
        L, b = self.L, self.b
        if self.kind is Family.EXP:
            lo, hi = -L, L
        elif self.kind is Family.COSH:
            lo, hi = L * -1.0 - b, L * 1.0 - b
        elif self.kind is Family.SINH:
            lo, hi = L * 0.1 - b, L * 1.5 - b
        elif self.kind is Family.COS:
            lo, hi = L * -1.2 - b, L * 1.2 - b
        else:
            lo, hi = b - L * 0.1, b - L * 1.5
        return (min(lo, hi), max(lo, hi))

    def base_chart(self) -> MetricChart:
        base = line_chart("t", self.time_window())
        return MetricChart(base.coord_names, base.components, base.signature,
                           DomainHints(base.domain_hints.bounds, self.excluded_times),
                           name=f"line[{self.kind.value}]")

    def paper_constants(self) -> FamilyConstants:
        """Constants as published for this family."""
        n, k, L = self.n, self.k, self.L
        big = n * (n - 1) / (2 * L ** 2)
        small = (n - 1) * (n - 2) / (2 * k * L ** 2)
        if self.kind is Family.EXP:
            return FamilyConstants(-big, 0.0)
        if self.kind is Family.COSH:
            return FamilyConstants(-big, -small)
        if self.kind is Family.SINH:
            return FamilyConstants(-big, small)
        if self.kind is Family.COS:
            return FamilyConstants(big, small)
        return FamilyConstants(0.0, (n - 1) * (n - 2) / (2 * L ** 2))

    def matched_fiber(self) -> MetricChart:
        """Standard fiber whose Ricci tensor is what the family requires."""
        r = abs(self.L) * math.sqrt(self.k)
        if self.kind is Family.EXP:
            return standard_fiber("flat", self.n)[0]
        if self.kind is Family.COSH:
            return standard_fiber("sphere", self.n, r)[0]
        if self.kind is Family.LINEAR:
            return standard_fiber("hyperbolic", self.n, abs(self.L))[0]
        return standard_fiber("hyperbolic", self.n, r)[0]


def _jets(f: ScalarField, t):
    t = np.asarray(t, dtype=float)
    jet = f.jet(t[..., None])
    f0, f1, f2 = jet.value, jet.grad[..., 0], jet.hess[..., 0, 0]
    if np.any(f0 <= 0):
        raise ValueError("warping function must be positive")
    return f0, f1, f2


def b_function(f: ScalarField, t):
    """``B = 2 f'/f`` and its derivative ``B' = 2 (f''/f - (f'/f)^2)``."""
    f0, f1, f2 = _jets(f, t)
    return 2 * f1 / f0, 2 * (f2 / f0 - (f1 / f0) ** 2)


def grw_constants(f: ScalarField, n: int, t):
    """``(lambda_bar_126, lambda_fiber_128, ein_fiber_coeff_127)`` at ``t``.

    ``lambda_bar_126 = -n(n-1)(B^2 + 2B')/8``; the fiber Einstein block is
    ``-(n-1)(n-2) f^2 B'/4 h`` and the induced fiber constant is minus its
    coefficient.
    """
    if n <= 1:
        raise ValueError("n must exceed 1")
    f0, _, _ = _jets(f, t)
    B, dB = b_function(f, t)
    coeff = -(n - 1) * (n - 2) * f0 ** 2 * dB / 4
    return -n * (n - 1) * (B ** 2 + 2 * dB) / 8, -coeff, coeff


def classify(lambda_bar: float, n: int, L_hint: float = 1.0, k: float = 1.0,
             b: float = 0.0, atol: float = 1e-12) -> list[GRWFamily]:
    """Families whose published constant is ``lambda_bar`` (published sign)."""
    if n <= 1:
        raise ValueError("n must exceed 1")
    if abs(lambda_bar) <= atol:
        return [GRWFamily(Family.LINEAR, n, k, L_hint, b)]
    L = math.sqrt(n * (n - 1) / (2 * abs(lambda_bar)))
    if lambda_bar < 0:
        return [GRWFamily(kind, n, k, L, b) for kind in (Family.EXP, Family.COSH, Family.SINH)]
    return [GRWFamily(Family.COS, n, k, L, b)]


def fiber_constant_fraction(n: int) -> Fraction:
    """Exact ``(n-1)(n-2)/2``: the fiber constant in units of ``1/(k L^2)``."""
    return Fraction((n - 1) * (n - 2), 2)


def family_chart(fam: GRWFamily, fiber: MetricChart | None = None) -> WarpedProduct:
    fiber = fam.matched_fiber() if fiber is None else fiber
    if fiber.dim != fam.n:
        raise ValueError(f"fiber has dimension {fiber.dim}, family needs {fam.n}")
    return assemble(fam.base_chart(), fiber, fam.warping)


def standard_fiber(kind: str, n: int, r: float = 1.0) -> tuple[MetricChart, float]:
    """A Riemannian Einstein n-manifold and its constant ``L_f`` in ``G = -L_f h``."""
    if n < 2:
        raise ValueError("fiber dimension must be at least 2")
    c = (n - 1) * (n - 2) / (2 * r ** 2)
    if kind == "sphere":
        return sphere_chart(n, r), c
    if kind == "hyperbolic":
        return hyperbolic_chart(n, r), -c
    if kind == "flat":
        return flat_chart([f"y{i + 1}" for i in range(n)]), 0.0
    raise ValueError(f"unknown fiber kind {kind!r}")


def flat_spherical_fiber() -> MetricChart:
    """Euclidean 3-space in spherical coordinates ``(r, theta, phi)``."""
    hints = DomainHints({"r": (0.5, 2.0), "theta": (0.3, math.pi - 0.3), "phi": (-math.pi, math.pi)},
                        (Exclusion("theta", 0.0, math.pi), Exclusion("r", 0.0)))
    return MetricChart.from_strings(("r", "theta", "phi"), ["1", "r^2", "r^2*sin(theta)^2"],
                                    (1, 1, 1), hints=hints, name="flat-spherical")


def de_sitter(lam: float) -> WarpedProduct:
    if lam <= 0:
        raise ValueError("de Sitter needs a positive cosmological constant")
    fam = GRWFamily(Family.EXP, 3, 1.0, math.sqrt(3.0 / lam))
    return family_chart(fam, flat_spherical_fiber())


def de_sitter_chart(lam: float) -> MetricChart:
    """``-dt^2 + exp(2 sqrt(lam/3) t) (dr^2 + r^2 dOmega^2)``."""
    return de_sitter(lam).product
