"""Versioned JSON persistence for trained models."""
from __future__ import annotations

import json
from pathlib import Path

from ..errors import UnsupportedFormatVersion
from .common import FORMAT_VERSION
from .mlp import MLPModel
from .svm import SVMModel


def dumps(model) -> str:
    return json.dumps(model.to_dict(), sort_keys=True, indent=1)


def loads(text: str):
    d = json.loads(text)
    if d.get("format_version") != FORMAT_VERSION:
        raise UnsupportedFormatVersion(f"unsupported model format_version {d.get('format_version')!r}")
    family = d.get("family")
    if family == "mlp":
        return MLPModel.from_dict(d)
    if family == "svm":
        return SVMModel.from_dict(d)
    raise UnsupportedFormatVersion(f"unknown model family {family!r}")


def save_model(model, path) -> None:
    Path(path).write_text(dumps(model), encoding="utf-8")


def load_model(path):
    return loads(Path(path).read_text(encoding="utf-8"))
