"""Published constants against coordinate evidence, family by family.

Three comparisons are tabulated:

* ``A``: the total-space constant from the B-function form and the
  published classification, against the coordinate Einstein tensor.
* ``B``: the induced fiber constant (B-function form and published value) against
  the fiber's own Einstein tensor.
* ``C``: the Laplacian eigenvalue of the warping function as printed against
  the value obtained by solving the trace equation.
"""
from __future__ import annotations

import numpy as np

from .grw import Family, GRWFamily, family_chart, grw_constants
from .verify import (RESIDUAL_TOL, SamplePlan, coordinate_lambda, einstein_residual)
from .warped import eigenvalue_check, field_calculus, fiber_einstein_condition, lambda_bar

COLUMNS = ("tension", "family", "quantity", "paper", "formula", "derived", "oracle",
           "residual_oracle", "residual_paper", "verdict")


def family_rows(fam: GRWFamily, plan: SamplePlan, tol: float = RESIDUAL_TOL) -> list[dict]:
    w = family_chart(fam)
    pts = plan.generate(w.product)
    t = pts[:, 0]
    x = pts[:, :1]
    paper = fam.paper_constants()
    lb126, lf128, _ = grw_constants(fam.warping, fam.n, t)
    lb_oracle = float(np.mean(coordinate_lambda(w.product, pts)))

    res_oracle = einstein_residual(w.product, lb_oracle, plan, tol).max_rel_residual
    res_paper = einstein_residual(w.product, paper.lambda_bar_paper, plan, tol).max_rel_residual
    rows = [{
        "tension": "A", "family": fam.kind.value, "quantity": "lambda_bar",
        "paper": paper.lambda_bar_paper, "formula": float(np.mean(lb126)),
        "derived": float(np.mean(lambda_bar(w, x))), "oracle": lb_oracle,
        "residual_oracle": res_oracle, "residual_paper": res_paper,
        "verdict": "agrees" if res_paper <= tol else "disagrees",
    }]

    fiber_plan = SamplePlan(plan.count, plan.seed)
    lf_oracle = float(np.mean(coordinate_lambda(w.fiber, fiber_plan.generate(w.fiber))))
    lf128_mean = float(np.mean(lf128))
    fres_128 = einstein_residual(w.fiber, lf128_mean, fiber_plan, tol).max_rel_residual
    fres_paper = einstein_residual(w.fiber, paper.lambda_fiber_paper, fiber_plan,
                                   tol).max_rel_residual
    rows.append({
        "tension": "B", "family": fam.kind.value, "quantity": "lambda_fiber",
        "paper": paper.lambda_fiber_paper, "formula": lf128_mean,
        "derived": float(np.mean(fiber_einstein_condition(w, x)[0])), "oracle": lf_oracle,
        "residual_oracle": fres_128, "residual_paper": fres_paper,
        "verdict": "agrees" if fres_paper <= tol else "disagrees",
    })

    m, n = w.m, w.n
    fc = field_calculus(w.base, w.f, x)
    derived, printed = eigenvalue_check(w, lb_oracle, x)
    # a one-dimensional base has zero scalar curvature
    mu_derived = -2 * m * lb_oracle / (n * (m + n - 2))
    mu_printed = 2 * m * lb_oracle / (n * (m + n - 2))
    worst_printed = float(np.abs(printed).max())
    rows.append({
        "tension": "C", "family": fam.kind.value, "quantity": "laplacian_eigenvalue",
        "paper": mu_printed, "formula": mu_printed, "derived": mu_derived,
        "oracle": float(np.mean(fc.laplacian / fc.value)),
        "residual_oracle": float(np.abs(derived).max()), "residual_paper": worst_printed,
        "verdict": "agrees" if worst_printed <= 1e-9 else "disagrees",
    })
    return rows


def discrepancy_table(n: int = 3, L: float = 1.0, k: float = 1.0, b: float = 0.0,
                      plan: SamplePlan | None = None, tol: float = RESIDUAL_TOL) -> list[dict]:
    plan = plan or SamplePlan()
    rows = []
    for kind in Family:
        rows.extend(family_rows(GRWFamily(kind, n, k, L, b), plan, tol))
    return rows
