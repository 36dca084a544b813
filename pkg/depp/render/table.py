from __future__ import annotations

import csv
import io
from typing import Any, Iterable, Sequence

from depp.protocols.compare import ProtocolComparison, SimonPanResult
from depp.protocols.depp import RunResult
from depp.protocols.recurrence import RecurrenceTrace
from depp.sampling.montecarlo import SampleReport

__all__ = [
    "SWEEP_HEADER",
    "COMPARISON_HEADER",
    "write_csv",
    "sweep_csv",
    "run_csv",
    "comparison_csv",
    "format_comparison_table",
]

SWEEP_HEADER = (
    "param",
    "value",
    "acceptance",
    "fidelity",
    "pattern_cd",
    "pattern_cf",
    "pattern_ed",
    "pattern_ef",
)
COMPARISON_HEADER = ("protocol", "final_fidelity", "success_probability", "expected_pairs")

UNREACHABLE = "unreachable"


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def sweep_csv(rows: Iterable[Sequence[Any]]) -> str:
    return write_csv(SWEEP_HEADER, rows)


def _pattern_rows(rr: RunResult, sample: SampleReport | None) -> str:
    header = ["pattern", "detectors", "probability", "corrected_fidelity"]
    if sample is not None:
        header += ["count", "frequency", "ci_low", "ci_high"]
    rows = []
    for rec in rr.records:
        row: list[Any] = [
            rec.pattern.key,
            "/".join(rec.detector_pair),
            rec.probability,
            rec.corrected_fidelity,
        ]
        if sample is not None:
            lo, hi = sample.interval(rec.pattern.key)
            row += [sample.counts[rec.pattern.key], sample.frequencies[rec.pattern.key], lo, hi]
        rows.append(row)
    return write_csv(header, rows)


def comparison_csv(cmp: ProtocolComparison) -> str:
    rows = []
    for r in cmp.rows():
        if r.protocol == "bennett" and not r.reachable:
            rows.append([r.protocol, UNREACHABLE, UNREACHABLE, UNREACHABLE])
        else:
            rows.append([r.protocol, r.final_fidelity, r.success_probability, r.expected_pairs])
    return write_csv(COMPARISON_HEADER, rows)


def run_csv(result: Any, sample: SampleReport | None = None) -> str:
    """CSV rendering of an analytic result (pattern rows get sampling columns)."""
    if isinstance(result, RunResult):
        return _pattern_rows(result, sample)
    if isinstance(result, ProtocolComparison):
        return comparison_csv(result)
    if isinstance(result, RecurrenceTrace):
        return write_csv(
            ("round", "fidelity", "success_probability"),
            ([i, f, p] for i, (f, p) in enumerate(zip(result.fidelities, result.success_probs))),
        )
    if isinstance(result, SimonPanResult):
        p = result.params
        return write_csv(
            ("protocol", "F", "F1", "F2", "F3", "efficiency"),
            [["simon_pan", p.F, p.F1, p.F2, p.F3, result.efficiency]],
        )
    raise TypeError(f"cannot render {type(result).__name__} as CSV")


def _fmt(v: float | None, unreachable: bool) -> str:
    if unreachable:
        return UNREACHABLE
    if v is None:
        return "-"
    return f"{v:.6f}"


def format_comparison_table(cmp: ProtocolComparison) -> str:
    """Aligned text table: protocol, final fidelity, success probability, expected pairs."""
    headers = ["protocol", "final fidelity", "success probability", "expected pairs", "rounds"]
    body = []
    for r in cmp.rows():
        unreachable = r.protocol == "bennett" and not r.reachable
        body.append(
            [
                r.protocol,
                _fmt(r.final_fidelity, unreachable),
                _fmt(r.success_probability, unreachable),
                _fmt(r.expected_pairs, unreachable),
                "-" if r.rounds is None else str(r.rounds),
            ]
        )
    widths = [max(len(h), *(len(row[i]) for row in body)) for i, h in enumerate(headers)]
    lines = [f"# target fidelity {cmp.target_fidelity!r}"]
    lines.append("  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip())
    lines.append("  ".join("-" * w for w in widths))
    for row in body:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"
