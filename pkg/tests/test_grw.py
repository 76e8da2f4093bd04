import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from warpcheck.charts import ScalarField, curvature_bundle
from warpcheck.grw import (Family, GRWFamily, b_function, classify, de_sitter, de_sitter_chart,
                           family_chart, fiber_constant_fraction, grw_constants, standard_fiber)
from warpcheck.verify import SamplePlan, constancy, coordinate_lambda, einstein_residual

GRID = list(itertools.product(Family, (2, 3, 4), (0.5, 1.0, 2.0), (0.5, 1.0), (0.0, 0.7)))


def _f(text):
    return ScalarField.parse(text, ("t",))


class TestBFunction:
    def test_exponential(self):
        B, dB = b_function(_f("exp(t/2)"), np.array([-0.3, 0.0, 0.8]))
        assert np.allclose(B, 1.0, rtol=1e-15) and np.allclose(dB, 0.0, atol=1e-15)

    def test_cos(self):
        B, dB = b_function(_f("cos(t/2)/sqrt(3)"), 0.0)
        assert B == 0.0 and dB == pytest.approx(-2 / 4, rel=1e-15)

    def test_linear(self):
        b = 0.7
        B, dB = b_function(_f(f"({b} - t)/1"), b - 1)
        assert B == pytest.approx(-2.0, rel=1e-15) and dB == pytest.approx(-2.0, rel=1e-15)

    def test_nonpositive(self):
        with pytest.raises(ValueError):
            b_function(_f("t"), -1.0)


class TestConstants:
    @pytest.mark.parametrize("n, L", [(2, 1.0), (3, 0.5), (5, 2.0)])
    def test_cos(self, n, L):
        lb, _, _ = grw_constants(_f(f"cos(t/{L})/sqrt(2)"), n, np.linspace(-0.5, 0.5, 5) * L)
        assert np.allclose(lb, n * (n - 1) / (2 * L**2), rtol=1e-13)

    def test_exponential(self):
        lb, lf, coeff = grw_constants(_f("exp(t)"), 3, 0.4)
        assert lb == pytest.approx(-3.0, rel=1e-15)
        assert lf == 0.0 and coeff == 0.0

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_linear(self, n):
        lb, lf, coeff = grw_constants(_f("(0.7 - t)/1.5"), n, np.array([-1.0, 0.0, 0.5]))
        assert np.allclose(lb, 0.0, atol=1e-14)
        assert np.allclose(lf, -(n - 1) * (n - 2) / (2 * 1.5**2), rtol=1e-14, atol=1e-15)
        assert np.array_equal(lf, -coeff)

    def test_dimension(self):
        with pytest.raises(ValueError):
            grw_constants(_f("exp(t)"), 1, 0.0)


class TestClassify:
    def test_negative(self):
        fams = classify(-3.0, 3)
        assert [f.kind for f in fams] == [Family.EXP, Family.COSH, Family.SINH]
        assert all(f.L == 1.0 and f.k == 1.0 and f.b == 0.0 for f in fams)

    def test_positive(self):
        (fam,) = classify(3.0, 3)
        assert fam.kind is Family.COS and fam.L == 1.0

    def test_zero(self):
        (fam,) = classify(0.0, 4, L_hint=2.0)
        assert fam.kind is Family.LINEAR and fam.L == 2.0

    def test_round_trip(self):
        for kind, n, L, k, b in GRID[::7]:
            pc = GRWFamily(kind, n, k, L, b).paper_constants()
            fams = classify(pc.lambda_bar_paper, n, L)
            assert kind in {f.kind for f in fams}
            assert all(f.L == pytest.approx(L, rel=1e-14) for f in fams)

    def test_dimension(self):
        with pytest.raises(ValueError):
            classify(1.0, 1)


class TestFamilyChart:
    def test_exponential_flat(self):
        w = family_chart(GRWFamily(Family.EXP, 3), standard_fiber("flat", 3)[0])
        g = w.product.metric([0.4, 0.1, 0.2, 0.3])
        assert g[0, 0] == -1.0
        assert np.allclose(np.diag(g)[1:], math.exp(0.8), rtol=1e-15)
        assert np.count_nonzero(g - np.diag(np.diag(g))) == 0

    def test_sinh_excludes_singular_time(self):
        fam = GRWFamily(Family.SINH, 3, b=0.0)
        (ex,) = fam.excluded_times
        assert ex.at == 0.0 and ex.radius == 1e-2
        pts = np.array([[0.005, 0.0, 0.0, 1.0]])
        assert not family_chart(fam).product.admissible(pts)[0]

    def test_cos_excludes_periodic_times(self):
        (ex,) = GRWFamily(Family.COS, 3).excluded_times
        t = math.pi / 2 + np.arange(-3, 4) * math.pi
        assert np.all(ex.distance(t) < 1e-12)
        assert ex.distance(np.array([0.0]))[0] == pytest.approx(math.pi / 2)

    def test_linear_excludes_b(self):
        (ex,) = GRWFamily(Family.LINEAR, 3, b=0.7).excluded_times
        assert ex.at == 0.7

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            family_chart(GRWFamily(Family.EXP, 3), standard_fiber("flat", 2)[0])

    @pytest.mark.parametrize("kwargs", [dict(n=1), dict(n=3, L=0.0), dict(n=3, k=0.0)])
    def test_invalid_parameters(self, kwargs):
        with pytest.raises(ValueError):
            GRWFamily(Family.COSH, **kwargs)

    def test_warping_is_positive_on_window(self):
        for kind, n, L, k, b in GRID:
            fam = GRWFamily(kind, n, k, L, b)
            lo, hi = fam.time_window()
            t = np.linspace(lo, hi, 41)
            t = t[fam.base_chart().admissible(t[:, None])]
            assert np.all(fam.warping.jet(t[:, None]).value > 0)


class TestStandardFiber:
    def test_flat(self):
        chart, c = standard_fiber("flat", 4)
        b = curvature_bundle(chart, [0.1, 0.2, 0.3, 0.4])
        assert c == 0.0 and not b.einstein.any()

    @pytest.mark.parametrize("kind, expected", [("sphere", 1.0), ("hyperbolic", -1.0)])
    def test_three_dimensional(self, kind, expected):
        chart, c = standard_fiber(kind, 3)
        assert c == expected
        b = curvature_bundle(chart, SamplePlan(50, 2).generate(chart))
        assert np.abs(b.einstein + c * b.metric).max() < 1e-12

    @pytest.mark.parametrize("kind, n, r", [("sphere", 4, 0.7), ("hyperbolic", 2, 2.0),
                                            ("hyperbolic", 4, 1.3)])
    def test_constants_match_coordinates(self, kind, n, r):
        chart, c = standard_fiber(kind, n, r)
        b = curvature_bundle(chart, SamplePlan(30, 3).generate(chart))
        assert np.abs(b.einstein + c * b.metric).max() < 1e-12

    def test_dimension(self):
        with pytest.raises(ValueError):
            standard_fiber("sphere", 1)


class TestDeSitter:
    def test_unit_rate(self):
        w = de_sitter(3.0)
        assert w.f.jet([[0.5]]).value[0] == pytest.approx(math.exp(0.5), rel=1e-15)

    def test_point(self):
        b = curvature_bundle(de_sitter_chart(3.0), [0.2, 1.0, math.pi / 3, 0.4])
        assert np.abs(b.einstein + 3 * b.metric).max() < 1e-6

    def test_matches_exponential_family(self):
        lam = 12.0
        chart = de_sitter_chart(lam)
        fam = GRWFamily(Family.EXP, 3, 1.0, math.sqrt(3 / lam))
        pts = SamplePlan(20, 1).generate(chart)
        assert np.allclose(chart.metric(pts),
                           family_chart(fam, de_sitter(lam).fiber).product.metric(pts), rtol=1e-15)

    def test_nonpositive(self):
        with pytest.raises(ValueError):
            de_sitter_chart(-1.0)


@pytest.mark.parametrize("kind, n", list(itertools.product(Family, (2, 3, 4))))
def test_constants_against_published_values(kind, n):
    for L, k, b in itertools.product((0.5, 1.0, 2.0), (0.5, 1.0), (0.0, 0.7)):
        fam = GRWFamily(kind, n, k, L, b)
        pts = SamplePlan(100, 3).generate(fam.base_chart())[:, 0]
        lb, lf, _ = grw_constants(fam.warping, n, pts)
        pc = fam.paper_constants()
        assert constancy(lb)[2]
        assert np.allclose(lb, pc.lambda_bar_paper, rtol=1e-9, atol=1e-12)
        assert np.allclose(np.abs(lf), abs(pc.lambda_fiber_paper), rtol=1e-9, atol=1e-12)


def test_einstein_residual_with_matched_and_mismatched_fibers():
    plan = SamplePlan(100, 21)
    exp = family_chart(GRWFamily(Family.EXP, 3), standard_fiber("flat", 3)[0])
    lam = float(coordinate_lambda(exp.product, plan.generate(exp.product)).mean())
    assert einstein_residual(exp.product, lam, plan).passed

    fam = GRWFamily(Family.COSH, 3)
    cosh = family_chart(fam)
    lam = float(coordinate_lambda(cosh.product, plan.generate(cosh.product)).mean())
    assert einstein_residual(cosh.product, lam, plan).passed

    flat = family_chart(fam, standard_fiber("flat", 3)[0])
    lam = float(coordinate_lambda(flat.product, plan.generate(flat.product)).mean())
    assert einstein_residual(flat.product, lam, plan).max_rel_residual > 1e-2


def test_four_dimensional_fiber_constant():
    assert fiber_constant_fraction(4) == Fraction(3)
    for L in (0.5, 1.0, 2.0):
        assert GRWFamily(Family.LINEAR, 4, L=L).paper_constants().lambda_fiber_paper == 3 / L**2
        _, lf, _ = grw_constants(GRWFamily(Family.LINEAR, 4, L=L).warping, 4, -1.0)
        assert abs(lf) == pytest.approx(3 / L**2, rel=1e-14)
