"""Render metrics reports as JSON and markdown tables."""
from __future__ import annotations

import json
from itertools import groupby

from .metrics import MetricsReport

KIND_TITLES = {"mfcc": "MFCC features", "chroma": "Chroma features",
               "contrast": "Spectral Contrast features",
               "combined": "Combined features (MFCC, Chroma, Spectral Contrast)"}


def report_json(report: MetricsReport) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"


def _pct(x: float) -> str:
    return f"{100.0 * x:.2f}"


def markdown_table(reports) -> str:
    """Rows are model x class, columns precision/recall/F1/AUC/accuracy, one block per feature kind."""
    lines = ["| Model | Class | Precision | Recall | F1-Score | AUC | Acc |",
             "|---|---|---|---|---|---|---|"]
    for kind, block in groupby(reports, key=lambda r: r.feature_kind):
        lines.append(f"| **{KIND_TITLES.get(kind, kind)}** | | | | | | |")
        for r in block:
            c = r.confusion
            auc = "n/a" if r.auc is None else f"{r.auc:.3f}"
            lines.append(f"| {r.model_family.upper()} | COVID-19 positive | {_pct(c.positive.precision)} | "
                         f"{_pct(c.positive.recall)} | {_pct(c.positive.f1)} | {auc} | {c.accuracy:.2f} |")
            lines.append(f"| | COVID-19 negative | {_pct(c.negative.precision)} | "
                         f"{_pct(c.negative.recall)} | {_pct(c.negative.f1)} | | |")
    return "\n".join(lines) + "\n"


def markdown_summary(reports, failures=(), title="Experiment summary") -> str:
    """Per-scenario tables, plus a list of cells that failed."""
    out = [f"# {title}", ""]
    reports = sorted(reports, key=lambda r: (r.scenario_id or 0, r.feature_kind, r.model_family))
    for sid, block in groupby(reports, key=lambda r: r.scenario_id):
        block = list(block)
        extra = block[0].extra
        out.append(f"## Scenario {sid}: train on {extra.get('train_source')}, "
                   f"test on {extra.get('test_source')}")
        out.append("")
        out.append(markdown_table(block))
    if failures:
        out.append("## Failed cells")
        out.append("")
        for cell, message in failures:
            out.append(f"- {cell}: {message}")
        out.append("")
    return "\n".join(out)
