"""Report rows, verdict rules and byte-stable CSV/JSON output."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

COLUMNS = ("pair_id", "quantity", "lhs", "rhs", "slack", "verdict", "method", "std_error")
VERDICTS = ("holds", "holds-vacuous", "violated", "invalid-domain", "infinite")
_FLOATS = ("lhs", "rhs", "slack", "std_error")


@dataclass(frozen=True)
class ReportRow:
    pair_id: str
    quantity: str
    lhs: float
    rhs: float
    slack: float
    verdict: str
    method: str
    std_error: float | None = None
    # (slot, lhs_part, rhs_part) for constant fitting; never emitted
    fit: tuple | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")


def signed_slack(lhs: float, rhs: float) -> float:
    if math.isinf(lhs) and math.isinf(rhs) and lhs == rhs:
        return 0.0
    return rhs - lhs


def decide(
    lhs: float,
    rhs: float,
    *,
    tol: float,
    sigma: float = 3.0,
    std_error: float | None = None,
    valid: bool = True,
    vacuous: bool = False,
) -> tuple[float, str]:
    """(slack, verdict) for the claim lhs <= rhs."""
    slack = signed_slack(lhs, rhs)
    if not valid:
        return slack, "invalid-domain"
    if math.isinf(lhs):
        return slack, "infinite" if math.isinf(rhs) else "violated"
    if math.isinf(rhs) or vacuous:
        return slack, "holds-vacuous"
    buffer = tol + (sigma * std_error if std_error else 0.0)
    return slack, "violated" if slack < -buffer else "holds"


def make_row(pair_id, quantity, lhs, rhs, method, *, tol, sigma=3.0, std_error=None, valid=True, vacuous=False, fit=None):
    lhs, rhs = float(lhs), float(rhs)
    slack, verdict = decide(lhs, rhs, tol=tol, sigma=sigma, std_error=std_error, valid=valid, vacuous=vacuous)
    se = None if std_error is None else float(std_error)
    return ReportRow(pair_id, quantity, lhs, rhs, slack, verdict, method, se, fit)


def _fmt(x: float | None) -> str:
    if x is None:
        return ""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".10g")


def rows_to_csv(rows: Iterable[ReportRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([r.pair_id, r.quantity, _fmt(r.lhs), _fmt(r.rhs), _fmt(r.slack), r.verdict, r.method, _fmt(r.std_error)])
    return buf.getvalue()


def _row_record(r: ReportRow) -> dict:
    rec: dict = {}
    for c in COLUMNS:
        v = getattr(r, c)
        if c in _FLOATS and v is not None and not math.isfinite(v):
            rec[c] = None
            rec[f"{c}_nonfinite"] = _fmt(v)
        else:
            rec[c] = v
    return rec


def rows_to_json(rows: Iterable[ReportRow]) -> str:
    return json.dumps([_row_record(r) for r in rows], indent=1, sort_keys=True) + "\n"


def rows_from_json(text: str) -> list[ReportRow]:
    out = []
    for rec in json.loads(text):
        kw = {c: rec[c] for c in COLUMNS}
        for c in _FLOATS:
            flag = rec.get(f"{c}_nonfinite")
            if flag is not None:
                kw[c] = float(flag)
        out.append(ReportRow(**kw))
    return out


def rows_from_csv(text: str) -> list[ReportRow]:
    reader = csv.DictReader(io.StringIO(text))
    out = []
    for rec in reader:
        kw = dict(rec)
        for c in _FLOATS:
            kw[c] = None if kw[c] == "" else float(kw[c])
        out.append(ReportRow(**kw))
    return out


def emit(rows: Iterable[ReportRow], fmt: str = "csv", path: str | Path | None = None) -> str:
    """Render rows as CSV or JSON; write to ``path`` when given. Returns the text."""
    rows = list(rows)
    if fmt == "csv":
        text = rows_to_csv(rows)
    elif fmt == "json":
        text = rows_to_json(rows)
    else:
        raise ValueError(f"format must be csv or json, got {fmt!r}")
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write report to {path}: {exc}") from exc
    return text


def any_violated(rows: Iterable[ReportRow]) -> bool:
    return any(r.verdict == "violated" for r in rows)
