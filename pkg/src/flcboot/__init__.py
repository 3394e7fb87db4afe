"""Exact F tests for subsets of random effects in linear mixed models, with
residual, m-out-of-n, double and fast double bootstrap counterparts."""

from .bootstrap import (
    BootstrapPlan,
    Variant,
    bootstrap_p,
    choose_m,
    double_bootstrap,
    fast_double_bootstrap,
    resample_m_out_of_n,
    resample_nonnull,
    resample_null,
)
from .config import ExperimentConfig, MethodSpec, load_config, parse_config
from .distributions import ErrorDistribution, ErrorTag, draw_error_vector, draw_mvnormal, draw_wishart
from .errors import ConfigError, DegenerateDesign, DimensionMismatch, DomainError, NotPSD, SaturatedFit
from .flctest import Method, TestResult, f_cdf, f_sf, flc_statistic, flc_test
from .harness import RejectionTable, emit_csv, fdb_diagnostics, run_experiment
from .projection import DesignMatrices, ProjectionPair, build_projection_pair, fitted_null, rss_full, rss_null
from .scenarios import ScenarioSpec, Setting, generate, tested_split

__version__ = "0.1.0"
