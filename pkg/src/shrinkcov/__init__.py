"""Shrinkage covariance estimation with trace confidence intervals for vector time series."""

__version__ = "0.1.0"

from .covariance import (CovMatrix, DiagTarget, condition_number, diagonal_target, eigenvalues,
                         project_onto_span, sample_covariance, scaled_trace, trace)
from .errors import ConfigurationError, DataError, NumericError, ShrinkcovError
from .longrun import (KernelSpec, LongRunVariance, beta_hat_sq, cross_cov_squares,
                      default_lag_truncation, sigma_tr_sq, univariate_longrun_variance)
from .normal import normal_quantile
from .panel import ReturnsPanel
from .portfolio import (PortfolioWeights, RiskBounds, min_variance_weights,
                        portfolio_risk_bounds, rolling_portfolio_study)
from .shrinkage import (MatrixBounds, ShrinkageEstimate, TraceInterval,
                        diag_estimator_covariance, diag_marginal_intervals,
                        projection_variance_bounds, shrink_to_diagonal, shrink_to_identity,
                        shrinkage_bounds, trace_confidence_interval)
from .simulate import (LinearProcessSpec, SimConfig, simulate_ar1_panel,
                       simulate_linear_process, true_scaled_trace_ar1)
