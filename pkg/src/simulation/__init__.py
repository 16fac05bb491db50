"""Epoch-by-epoch serving simulation and its outputs"""

from src.simulation.simulator import RunConfig, RunTrace, build_candidates, run, run_suite, serve_order
from src.simulation.writers import (
    LOG_HEADER,
    METRICS_HEADER,
    format_summary,
    metrics_frame,
    recommendations_frame,
    summary_frame,
    sweep_frame,
    write_trace,
)
from src.simulation.replay import replay_matches, replay_metrics

__all__ = [
    "RunConfig",
    "RunTrace",
    "build_candidates",
    "run",
    "run_suite",
    "serve_order",
    "LOG_HEADER",
    "METRICS_HEADER",
    "format_summary",
    "metrics_frame",
    "recommendations_frame",
    "summary_frame",
    "sweep_frame",
    "write_trace",
    "replay_matches",
    "replay_metrics",
]
