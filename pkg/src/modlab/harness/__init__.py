"""Scenario runner, invariant checks and command line interface."""
from .checks import CHECKS, CheckResult, run_checks
from .config import ConfigError, load_config
from .scenario import (DataSpec, NormTimeseries, Scenario, constant_report, gaussian_suite,
                       run_scenario, scenario_from_config)
