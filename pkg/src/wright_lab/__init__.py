"""Numerical laboratory for the Wright function and Wright positive linear operators."""

__version__ = "0.1.0"

from .special_fn import (  # noqa: E402
    SeriesConvergenceError,
    SeriesResult,
    WrightParams,
    bessel_I,
    bessel_identity_residual,
    log_gamma,
    mehrez_gap,
    wright_phi,
)
from .operator_core import (  # noqa: E402
    OperatorConfig,
    TestFunction,
    WeightDistribution,
    apply_operator,
    build_weights,
    central_moment,
    falling_factorial_coeffs,
    raw_moment_closed_form,
    raw_moment_series,
)
