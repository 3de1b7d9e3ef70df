"""Dataset manifest CSV loading with metadata-based quality filtering."""
from __future__ import annotations

import csv
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import MissingColumn, UnknownLabel, UnreadableFile

log = logging.getLogger(__name__)

REQUIRED = ("path", "dataset", "label")
DATASETS = ("COUGHVID", "Virufy")
LABELS = ("positive", "negative")


@dataclass(frozen=True)
class ManifestEntry:
    path: Path
    dataset: str
    label: str
    cough_detected: float | None = None
    snr_db: float | None = None
    expert_quality: str | None = None

    @property
    def source_id(self) -> str:
        return self.path.name


@dataclass(frozen=True)
class QualityFilter:
    enabled: bool = True
    min_cough_detected: float = 0.8
    min_snr_db: float | None = None
    expert_quality: tuple[str, ...] | None = None
    columns: dict = field(default_factory=lambda: {
        "cough_detected": "cough_detected", "snr_db": "snr_db", "expert_quality": "expert_quality"})


@dataclass
class ManifestSummary:
    total: int = 0
    kept: int = 0
    dropped: Counter = field(default_factory=Counter)

    def to_dict(self) -> dict:
        return {"total": self.total, "kept": self.kept, "dropped": dict(sorted(self.dropped.items()))}


def _optional_float(value):
    if value is None or str(value).strip() == "":
        return None
    return float(value)


def _canonical(value: str, allowed, what: str) -> str:
    for a in allowed:
        if value.strip().lower() == a.lower():
            return a
    raise UnknownLabel(f"unknown {what} {value!r}; expected one of {allowed}")


def load_manifest(path, quality: QualityFilter = QualityFilter(), check_files: bool = True):
    """Read a manifest and apply the quality filter.

    Returns ``(entries, summary)``. Relative paths resolve against the
    manifest's directory. Optional metadata only filters rows that carry it.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8-sig")
    except (OSError, UnicodeDecodeError) as exc:
        raise UnreadableFile(f"cannot read manifest {path}: {exc}") from exc
    reader = csv.DictReader(text.splitlines())
    header = reader.fieldnames or []
    missing = [c for c in REQUIRED if c not in header]
    if missing:
        raise MissingColumn(f"{path}: missing required column(s) {missing}")

    cols = {**QualityFilter().columns, **quality.columns}
    summary = ManifestSummary()
    entries = []
    for row in reader:
        summary.total += 1
        entry = ManifestEntry(
            path=(path.parent / row["path"]) if not Path(row["path"]).is_absolute() else Path(row["path"]),
            dataset=_canonical(row["dataset"], DATASETS, "dataset"),
            label=_canonical(row["label"], LABELS, "label"),
            cough_detected=_optional_float(row.get(cols["cough_detected"])),
            snr_db=_optional_float(row.get(cols["snr_db"])),
            expert_quality=(row.get(cols["expert_quality"]) or None),
        )
        reason = None
        if check_files and not entry.path.exists():
            reason = "missing_file"
        elif quality.enabled:
            if entry.cough_detected is not None and entry.cough_detected < quality.min_cough_detected:
                reason = "cough_detected"
            elif (quality.min_snr_db is not None and entry.snr_db is not None
                  and entry.snr_db < quality.min_snr_db):
                reason = "snr_db"
            elif (quality.expert_quality is not None and entry.expert_quality is not None
                  and entry.expert_quality not in quality.expert_quality):
                reason = "expert_quality"
        if reason:
            summary.dropped[reason] += 1
            log.info("dropping %s (%s)", row["path"], reason)
        else:
            entries.append(entry)
    summary.kept = len(entries)
    log.info("manifest %s: kept %d of %d rows; dropped %s", path, summary.kept, summary.total,
             dict(summary.dropped) or "none")
    return entries, summary
