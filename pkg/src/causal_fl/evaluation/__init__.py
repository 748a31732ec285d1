"""Cost metrics, fault seeding and experiment orchestration."""
from .experiment import Config, discover, report_json, report_markdown, run_experiment, scatter_csv
from .metrics import (covariate_imbalance, effective_rank, exam_score, fault_position, hit_at_n)
from .mutate import FaultSpec, seed_faults

__all__ = [
    "Config",
    "FaultSpec",
    "covariate_imbalance",
    "discover",
    "effective_rank",
    "exam_score",
    "fault_position",
    "hit_at_n",
    "report_json",
    "report_markdown",
    "run_experiment",
    "scatter_csv",
    "seed_faults",
]
