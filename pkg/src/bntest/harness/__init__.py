"""Monte-Carlo harness: instance families, tester adapters, trials and sweeps."""
from .calibrate import calibrate_alpha, calibrate_closeness_constant
from .registry import FAMILIES, TESTERS, Instance, build_instance, get_tester, make_source
from .runner import (CSV_COLUMNS, ErrorRateReport, ExperimentConfig, TrialResult, reports_to_csv,
                     reports_to_json, run_trials, sweep_points, sweep_sample_complexity, sweep_table,
                     trial_rngs, wilson_interval)

__all__ = [
    "calibrate_alpha", "calibrate_closeness_constant", "FAMILIES", "TESTERS", "Instance",
    "build_instance", "get_tester", "make_source", "CSV_COLUMNS", "ErrorRateReport",
    "ExperimentConfig", "TrialResult", "reports_to_csv", "reports_to_json", "run_trials",
    "sweep_points", "sweep_sample_complexity", "sweep_table", "trial_rngs", "wilson_interval",
]
