"""Collects one verdict line per acceptance criterion for the terminal summary."""

LINES: dict = {}


def record(number: int, ok: bool, title: str, detail: str = "") -> None:
    verdict = "PASS" if ok else "FAIL"
    LINES[number] = f"[{verdict}] criterion {number}: {title}" + (f" ({detail})" if detail else "")


def skip(number: int, title: str, reason: str) -> None:
    LINES[number] = f"[SKIP] criterion {number}: {title} ({reason})"
