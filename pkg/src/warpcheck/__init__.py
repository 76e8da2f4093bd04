"""Numerical verification of warped-product curvature and Einstein equations."""
from .charts import (CurvatureBundle, MetricChart, ScalarField, christoffel,
                     curvature_bundle, field_calculus)
from .expr import Expression, eval_jet2, parse
from .grw import (Family, GRWFamily, b_function, classify, de_sitter_chart, family_chart,
                  grw_constants, standard_fiber)
from .jets import Jet2
from .verify import (SamplePlan, VerificationReport, constancy, einstein_residual,
                     oracle_diff)
from .warped import (WarpedCurvature, WarpedProduct, assemble, closed_form_curvature,
                     eigenvalue_check, fiber_einstein_condition, lambda_bar)

__version__ = "0.1.0"

__all__ = [
    "CurvatureBundle", "Expression", "Family", "GRWFamily", "Jet2", "MetricChart",
    "SamplePlan", "ScalarField", "VerificationReport", "WarpedCurvature", "WarpedProduct",
    "assemble", "b_function", "christoffel", "classify", "closed_form_curvature", "constancy",
    "curvature_bundle", "de_sitter_chart", "eigenvalue_check", "einstein_residual",
    "eval_jet2", "family_chart", "fiber_einstein_condition", "field_calculus",
    "grw_constants", "lambda_bar", "oracle_diff", "parse", "standard_fiber",
]
