from .metrics import (ClassMetrics, ConfusionMetrics, MetricsReport, confusion_metrics,
                      roc_auc, roc_curve)
from .report import markdown_summary, markdown_table, report_json
from .scenarios import (SCENARIO_PAIRS, ScenarioSpec, partition, run_scenario,
                        scenario)
from .split import stratified_split

__all__ = [
    "ClassMetrics", "ConfusionMetrics", "MetricsReport", "SCENARIO_PAIRS",
    "ScenarioSpec", "confusion_metrics", "markdown_summary", "markdown_table",
    "partition", "report_json", "roc_auc", "roc_curve", "run_scenario",
    "scenario", "stratified_split",
]
