from .bench import BatchReport, BenchConfig, CorridorConfig, make_corridor_scenario, run_benchmark
from .metrics import (metric_avg_deviation, metric_freezing_rate, metric_normalized_path_length)
from .simulate import TrialResult, init_state, run_trial, step_world

__all__ = [
    "BatchReport", "BenchConfig", "CorridorConfig", "TrialResult", "init_state", "make_corridor_scenario",
    "metric_avg_deviation", "metric_freezing_rate", "metric_normalized_path_length", "run_benchmark",
    "run_trial", "step_world",
]
