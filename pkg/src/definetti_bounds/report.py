"""Flat report rows and their CSV/JSON serialisation.

Rationals are written as ``num/den``; approximate reals with 15 significant
digits, their enclosure radius going in ``error_bound``.
"""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from typing import Any, Iterable, Mapping

from .arith import PrecisionFloat, format_rational
from .bounds import BoundResult, VerificationReport
from .divergences import TV_L1

COLUMNS = (
    "subject_id", "c", "n", "k", "metric", "value", "bound_id", "bound_value", "convention",
    "valid", "pass", "slack", "error_bound", "tight", "note",
)

Row = dict[str, str]


def fmt_value(x: Fraction | PrecisionFloat | int | None) -> str:
    if x is None:
        return ""
    if isinstance(x, PrecisionFloat):
        return x.format()
    return format_rational(x)


def fmt_real(x: Fraction | None) -> str:
    return "" if x is None else f"{float(x):.15g}"


def _radius(x) -> Fraction:
    return x.abs_error_bound if isinstance(x, PrecisionFloat) else Fraction(0)


def _flag(x: bool) -> str:
    return "true" if x else "false"


def convention(metric: str) -> str:
    return "L1" if metric == TV_L1 else "nats"


def new_row(**fields: Any) -> Row:
    row = {col: "" for col in COLUMNS}
    for key, value in fields.items():
        if key not in row:
            raise KeyError(key)
        row[key] = str(value)
    return row


def extras_note(result: BoundResult) -> str:
    return ";".join(f"{key}={fmt_value(val)}" for key, val in sorted(result.extras.items()))


def report_rows(report: VerificationReport, metrics: Iterable[str]) -> list[Row]:
    """One divergence row per metric followed by one row per checked bound."""
    metrics = list(metrics)
    head = dict(subject_id=report.subject_id, c=report.c, n=report.n, k=report.k)
    rows = []
    for metric in metrics:
        div = report.divergences.get(metric)
        if div is None:
            continue
        rows.append(new_row(**head, metric=metric, value=fmt_value(div), convention=convention(metric),
                            error_bound=fmt_real(_radius(div))))
        for entry in report.entries:
            if entry.metric != metric or entry.status == "n/a":
                continue
            bound = entry.bound
            notes = [entry.reason] if entry.reason else []
            if bound is not None and bound.extras:
                notes.append(extras_note(bound))
            rows.append(new_row(
                **head, metric=metric, value=fmt_value(div), bound_id=entry.bound_id,
                bound_value=fmt_value(bound.value if bound else None),
                convention=convention(metric),
                valid=_flag(bound.valid) if bound else "",
                **{"pass": entry.status if entry.status == "skipped" else _flag(entry.status == "pass")},
                slack=fmt_real(entry.slack),
                error_bound=fmt_real(entry.error_bound) if entry.slack is not None else "",
                tight=_flag(entry.tight) if entry.slack is not None else "",
                note=" | ".join(notes),
            ))
    return rows


def to_csv(rows: Iterable[Mapping[str, str]]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def to_json(rows: Iterable[Mapping[str, str]]) -> str:
    return json.dumps(list(rows), indent=2) + "\n"


def render(rows: Iterable[Mapping[str, str]], fmt: str) -> str:
    return to_json(rows) if fmt == "json" else to_csv(rows)
