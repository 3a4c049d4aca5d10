"""Experiment configurations, reproduction runs, the statement suite and the CLI."""
from .config import SCENARIOS, ExperimentConfig, GridSpec, default_config, load_config
from .experiments import (
    RUNNERS,
    Check,
    ExperimentResult,
    initial_data,
    max_principle_trials,
    run_angenent,
    run_custom,
    run_dimension_monotonicity,
    run_example1,
    run_example2,
    run_experiment,
    run_jobs,
    run_monotonicity_audit,
    run_stratification,
    tangent_stability,
    write_rows_csv,
)

__all__ = [
    "SCENARIOS", "ExperimentConfig", "GridSpec", "default_config", "load_config",
    "RUNNERS", "Check", "ExperimentResult", "initial_data", "max_principle_trials",
    "run_angenent", "run_custom", "run_dimension_monotonicity", "run_example1", "run_example2",
    "run_experiment", "run_jobs", "run_monotonicity_audit", "run_stratification",
    "tangent_stability", "write_rows_csv",
]
