from ddos_analysis.eval.aggregate import aggregate_by_k, mean_over_nodes, node_reports, report_table
from ddos_analysis.eval.metrics import (
    METRIC_COLUMNS,
    MetricsReport,
    confusion_counts,
    evaluate,
    from_counts,
    roc_auc,
    threshold_metrics,
)
from ddos_analysis.eval.report import plain, write_report, write_table
from ddos_analysis.eval.sessions import SessionStats, run_lengths, session_stats, timeline
from ddos_analysis.eval.sweep import detector_scores, evaluate_detector, flatten_scores, sweep_ar

__all__ = [
    "METRIC_COLUMNS",
    "MetricsReport",
    "SessionStats",
    "aggregate_by_k",
    "confusion_counts",
    "detector_scores",
    "evaluate",
    "evaluate_detector",
    "flatten_scores",
    "from_counts",
    "mean_over_nodes",
    "node_reports",
    "plain",
    "report_table",
    "roc_auc",
    "run_lengths",
    "session_stats",
    "sweep_ar",
    "threshold_metrics",
    "timeline",
    "write_report",
    "write_table",
]
