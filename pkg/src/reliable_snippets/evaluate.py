"""Reliability metrics over caption annotations.

Each record is one participant's label for one caption. Documents carry a
ground-truth viewpoint; captions are grouped by extraction method.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .corpus import LABELS, VIEWPOINTS, CorpusError, iter_jsonl, regroup
from .stats import DegenerateTableError, chi_square

NO_VIEWPOINT = "no_viewpoint"

LIKERT = {
    "ineffective": 1,
    "potentially_ineffective": 2,
    "inconclusive": 3,
    "potentially_effective": 4,
    "effective": 5,
}


@dataclass(frozen=True)
class AnnotationRecord:
    doc_id: str
    method: str
    annotator_id: str
    label: str
    doc_truth: str

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown label {self.label!r}")
        if self.doc_truth not in VIEWPOINTS:
            raise ValueError(f"doc_truth must be one of {VIEWPOINTS}, got {self.doc_truth!r}")

    def to_json(self) -> dict:
        return asdict(self)


def load_annotations(path: str | Path) -> list[AnnotationRecord]:
    records = []
    for lineno, obj in iter_jsonl(path):
        if not isinstance(obj, dict):
            raise CorpusError(f"{path}: line {lineno}: expected a JSON object")
        try:
            records.append(
                AnnotationRecord(
                    str(obj["doc_id"]),
                    str(obj["method"]),
                    str(obj["annotator_id"]),
                    obj["label"],
                    obj["doc_truth"],
                )
            )
        except KeyError as exc:
            raise CorpusError(f"{path}: line {lineno}: missing field {exc.args[0]!r}") from None
        except ValueError as exc:
            raise CorpusError(f"{path}: line {lineno}: {exc}") from None
    return records


def _for_method(records: Iterable[AnnotationRecord], method: str) -> list[AnnotationRecord]:
    out = [r for r in records if r.method == method]
    out.sort(key=lambda r: (r.doc_id, r.annotator_id))
    return out


def _percent(count: int, total: int) -> Optional[float]:
    return 100.0 * count / total if total else None


@dataclass
class NoViewpointTable:
    method: str
    counts: dict[str, int]
    totals: dict[str, int]
    total_count: int
    total: int

    @property
    def percents(self) -> dict[str, Optional[float]]:
        return {v: _percent(self.counts[v], self.totals[v]) for v in VIEWPOINTS}

    @property
    def total_percent(self) -> Optional[float]:
        return _percent(self.total_count, self.total)

    def to_json(self) -> dict:
        return {
            "counts": self.counts,
            "totals": self.totals,
            "percents": self.percents,
            "total_count": self.total_count,
            "total": self.total,
            "total_percent": self.total_percent,
        }


def no_viewpoint_table(records: Iterable[AnnotationRecord], method: str) -> NoViewpointTable:
    rs = _for_method(records, method)
    if not rs:
        raise ValueError(f"no annotation records for method {method!r}")
    counts = {v: 0 for v in VIEWPOINTS}
    totals = {v: 0 for v in VIEWPOINTS}
    for r in rs:
        totals[r.doc_truth] += 1
        if r.label == NO_VIEWPOINT:
            counts[r.doc_truth] += 1
    return NoViewpointTable(method, counts, totals, sum(counts.values()), len(rs))


@dataclass
class ConfusionMatrix:
    """Rows are document viewpoints, columns the annotated viewpoint."""

    method: str
    counts: list[list[int]]
    total: int  # includes no-viewpoint annotations

    @property
    def row_totals(self) -> list[int]:
        return [sum(r) for r in self.counts]

    @property
    def row_percents(self) -> list[Optional[list[float]]]:
        # None marks a row with no viewpoint-bearing annotations
        return [[100.0 * c / sum(r) for c in r] if sum(r) else None for r in self.counts]

    @property
    def accurate(self) -> int:
        return sum(self.counts[i][i] for i in range(len(VIEWPOINTS)))

    @property
    def viewpoint_total(self) -> int:
        return sum(self.row_totals)

    @property
    def accuracy_viewpoint(self) -> Optional[float]:
        return _percent(self.accurate, self.viewpoint_total)

    @property
    def accuracy_all(self) -> Optional[float]:
        return _percent(self.accurate, self.total)

    def row(self, truth: str) -> list[int]:
        return self.counts[VIEWPOINTS.index(truth)]

    def to_json(self) -> dict:
        return {
            "classes": list(VIEWPOINTS),
            "counts": self.counts,
            "row_totals": self.row_totals,
            "row_percents": self.row_percents,
            "accurate": self.accurate,
            "viewpoint_total": self.viewpoint_total,
            "total": self.total,
            "accuracy_viewpoint": self.accuracy_viewpoint,
            "accuracy_all": self.accuracy_all,
        }


def confusion(records: Iterable[AnnotationRecord], method: str) -> ConfusionMatrix:
    rs = _for_method(records, method)
    counts = [[0] * len(VIEWPOINTS) for _ in VIEWPOINTS]
    for r in rs:
        annotated = regroup(r.label)
        if annotated == NO_VIEWPOINT:
            continue
        counts[VIEWPOINTS.index(r.doc_truth)][VIEWPOINTS.index(annotated)] += 1
    return ConfusionMatrix(method, counts, len(rs))


@dataclass
class LikertSummary:
    method: str
    per_snippet: dict[str, float]
    flagged: list[str] = field(default_factory=list)

    @property
    def mean_std(self) -> Optional[float]:
        if not self.per_snippet:
            return None
        return math.fsum(self.per_snippet.values()) / len(self.per_snippet)

    def to_json(self) -> dict:
        return {"mean_std": self.mean_std, "per_snippet": self.per_snippet, "flagged": self.flagged}


def population_std(values: Sequence[float]) -> float:
    n = len(values)
    if n < 2:
        return 0.0
    mean = math.fsum(values) / n
    return math.sqrt(math.fsum((v - mean) ** 2 for v in values) / n)


def likert_std(records: Iterable[AnnotationRecord], method: str) -> LikertSummary:
    """Mean over snippets of the population std of their 1-5 annotations."""
    by_snippet: dict[str, list[int]] = defaultdict(list)
    for r in _for_method(records, method):
        by_snippet.setdefault(r.doc_id, [])
        if r.label != NO_VIEWPOINT:
            by_snippet[r.doc_id].append(LIKERT[r.label])
    per_snippet = {}
    flagged = []
    for doc_id in sorted(by_snippet):
        values = by_snippet[doc_id]
        if len(values) < 2:
            flagged.append(doc_id)
        per_snippet[doc_id] = population_std(values)
    return LikertSummary(method, per_snippet, flagged)


# --- method comparisons ---------------------------------------------------------


def _drop_empty_columns(table: list[list[int]]) -> list[list[int]]:
    keep = [j for j in range(len(table[0])) if any(row[j] for row in table)]
    return [[row[j] for j in keep] for row in table]


def comparison_tables(records: Sequence[AnnotationRecord], a: str, b: str) -> dict[str, list[list[int]]]:
    """Contingency tables contrasting two extraction methods.

    Per-viewpoint tables put the two methods' confusion rows side by side,
    with columns nobody chose removed.
    """
    ca, cb = confusion(records, a), confusion(records, b)
    na, nb = no_viewpoint_table(records, a), no_viewpoint_table(records, b)
    tables = {
        "no_viewpoint": [
            [na.total_count, na.total - na.total_count],
            [nb.total_count, nb.total - nb.total_count],
        ],
        "accuracy_viewpoint": [
            [ca.accurate, ca.viewpoint_total - ca.accurate],
            [cb.accurate, cb.viewpoint_total - cb.accurate],
        ],
        "accuracy_all": [
            [ca.accurate, ca.total - ca.accurate],
            [cb.accurate, cb.total - cb.accurate],
        ],
    }
    for truth in VIEWPOINTS:
        tables[f"row_{truth}"] = _drop_empty_columns([ca.row(truth), cb.row(truth)])
    return tables


def compare_methods(
    records: Sequence[AnnotationRecord], a: str, b: str, yates: bool = False
) -> dict[str, dict]:
    out = {}
    for name, table in comparison_tables(records, a, b).items():
        entry: dict = {"table": table}
        try:
            entry.update(chi_square(table, yates=yates).to_json())
        except (DegenerateTableError, ValueError) as exc:
            entry["error"] = str(exc)
        out[name] = entry
    return out


# --- report -------------------------------------------------------------------------


def build_report(
    records: Sequence[AnnotationRecord],
    methods: Sequence[str],
    comparisons: Sequence[tuple[str, str]] = (),
    yates: bool = False,
) -> dict:
    report: dict = {"methods": {}, "comparisons": {}, "yates": yates}
    for m in methods:
        report["methods"][m] = {
            "no_viewpoint": no_viewpoint_table(records, m).to_json(),
            "confusion": confusion(records, m).to_json(),
            "likert": likert_std(records, m).to_json(),
        }
    for a, b in comparisons:
        report["comparisons"][f"{a}:{b}"] = compare_methods(records, a, b, yates)
    return report


def _fmt_pct(x: Optional[float]) -> str:
    return "n/a" if x is None else f"{x:.2f}%"


def _table(rows: list[list[str]]) -> list[str]:
    widths = [max(len(r[j]) for r in rows) for j in range(len(rows[0]))]
    return ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]


def render_text(report: dict) -> str:
    lines: list[str] = []
    methods = list(report["methods"])
    if methods:
        lines.append("Captions annotated as not presenting a viewpoint")
        rows = [[""] + methods + ["# annotated"]]
        first = report["methods"][methods[0]]["no_viewpoint"]
        for v in VIEWPOINTS:
            row = [v.capitalize()]
            for m in methods:
                nv = report["methods"][m]["no_viewpoint"]
                row.append(f"{nv['counts'][v]} ({_fmt_pct(nv['percents'][v])})")
            row.append(str(first["totals"][v]))
            rows.append(row)
        row = ["Total"]
        for m in methods:
            nv = report["methods"][m]["no_viewpoint"]
            row.append(f"{nv['total_count']} ({_fmt_pct(nv['total_percent'])})")
        row.append(str(first["total"]))
        rows.append(row)
        lines += _table(rows)

    for m in methods:
        cm = report["methods"][m]["confusion"]
        lines += ["", f"Annotations by document viewpoint: {m}"]
        rows = [[""] + [f"Annotated {v}" for v in VIEWPOINTS]]
        for i, v in enumerate(VIEWPOINTS):
            pcts = cm["row_percents"][i]
            rows.append(
                [v.capitalize()]
                + [f"{c} ({_fmt_pct(pcts[j] if pcts else None)})" for j, c in enumerate(cm["counts"][i])]
            )
        lines += _table(rows)
        lines.append(
            f"accurate {cm['accurate']} of {cm['viewpoint_total']} with a viewpoint "
            f"({_fmt_pct(cm['accuracy_viewpoint'])}), of {cm['total']} total ({_fmt_pct(cm['accuracy_all'])})"
        )
        lk = report["methods"][m]["likert"]
        mean = "n/a" if lk["mean_std"] is None else f"{lk['mean_std']:.3f}"
        lines.append(f"mean per-snippet Likert std {mean} over {len(lk['per_snippet'])} snippets"
                     + (f"; {len(lk['flagged'])} flagged (<2 annotations)" if lk["flagged"] else ""))

    for pair, tests in report["comparisons"].items():
        lines += ["", f"Chi-square tests of independence: {pair}" + (" (Yates)" if report["yates"] else "")]
        rows = [["test", "statistic", "df", "p"]]
        for name, t in tests.items():
            if "error" in t:
                rows.append([name, "-", "-", t["error"]])
            else:
                rows.append([name, f"{t['statistic']:.4f}", str(t["df"]), f"{t['p_value']:.3g}"])
        lines += _table(rows)
    return "\n".join(lines) + "\n"
