"""Text renderers: tables (plain, CSV, Markdown, JSON) and graphs (DOT, JSON).

Numbers are exact decimals rounded half-up to at most three places, with
trailing zeros trimmed and never in scientific notation.
"""

from __future__ import annotations

import csv
import io
import json
from decimal import Decimal
from typing import Any, Sequence

from demobpr.dsl import format_decimal
from demobpr.graph import OntologyGraph
from demobpr.sim import ComparisonReport, round_half_up

TABLE_FORMATS = ("table", "csv", "json", "markdown")

COMPARISON_COLUMNS = (
    "function",
    "asis_cost_eur",
    "asis_time_min",
    "tobe_cost_eur",
    "tobe_time_min",
)


def fmt_number(value: Decimal | int | None) -> str:
    if value is None:
        return ""
    value = round_half_up(Decimal(value), 3)
    if value == 0:
        return "0"
    return format_decimal(value)


def fmt_pct(value: Decimal | None) -> str:
    if value is None:
        return "n/a"
    value = round_half_up(value, 1)
    return "0.0" if value == 0 else format(value, "f")


def _json_number(value: Decimal | None) -> int | float | None:
    if value is None:
        return None
    text = fmt_number(value)
    return int(text) if "." not in text else float(text)


def to_json_value(value: Any) -> Any:
    """Decimals to rounded JSON numbers, recursively; everything else as is."""
    if isinstance(value, Decimal):
        return _json_number(value)
    if isinstance(value, dict):
        return {k: to_json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_json_value(v) for v in value]
    return value


def dump_json(payload: Any) -> str:
    return json.dumps(to_json_value(payload), indent=2, ensure_ascii=False) + "\n"


def render_rows(headers: Sequence[str], rows: Sequence[Sequence[Any]], fmt: str) -> str:
    """Render a rectangular table. Decimal cells go through :func:`fmt_number`."""

    def cell(v: Any) -> str:
        if isinstance(v, (Decimal, int)) and not isinstance(v, bool):
            return fmt_number(v)
        return "" if v is None else str(v)

    if fmt == "json":
        return dump_json([dict(zip(headers, row)) for row in rows])
    text_rows = [[cell(v) for v in row] for row in rows]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(headers)
        writer.writerows(text_rows)
        return buf.getvalue()
    if fmt == "markdown":
        esc = [[c.replace("|", "\\|") for c in r] for r in text_rows]
        lines = ["| " + " | ".join(headers) + " |", "|" + "---|" * len(headers)]
        lines += ["| " + " | ".join(r) + " |" for r in esc]
        return "\n".join(lines) + "\n"
    if fmt == "table":
        widths = [len(h) for h in headers]
        for r in text_rows:
            widths = [max(w, len(c)) for w, c in zip(widths, r)]
        def line(cells: Sequence[str]) -> str:
            return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
        out = [line(headers), line(["-" * w for w in widths])]
        out += [line(r) for r in text_rows]
        return "\n".join(out) + "\n"
    raise ValueError(f"unknown table format {fmt!r}")


def reduction_footer(report: ComparisonReport) -> str:
    return (
        f"cost_reduction_pct={fmt_pct(report.cost_reduction_pct)} "
        f"time_reduction_pct={fmt_pct(report.time_reduction_pct)}"
    )


def comparison_json(report: ComparisonReport) -> dict[str, Any]:
    return {
        "rows": [
            {
                "function": r.label,
                "asis_cost_eur": r.asis.cost if r.asis else None,
                "asis_time_min": r.asis.time if r.asis else None,
                "tobe_cost_eur": r.tobe.cost if r.tobe else None,
                "tobe_time_min": r.tobe.time if r.tobe else None,
            }
            for r in report.rows
        ],
        "sum": {
            "asis_cost_eur": report.asis_cost,
            "asis_time_min": report.asis_time,
            "tobe_cost_eur": report.tobe_cost,
            "tobe_time_min": report.tobe_time,
        },
        "cost_reduction_pct": report.cost_reduction_pct,
        "time_reduction_pct": report.time_reduction_pct,
    }


def render_comparison(report: ComparisonReport, fmt: str = "table") -> str:
    """AS-IS/TO-BE table with one row per function label, a final ``Sum`` row
    and, outside JSON, a reduction footer line.

    Columns: function, asis_cost_eur, asis_time_min, tobe_cost_eur,
    tobe_time_min. Labels present in only one scenario leave the other
    side's cells empty.
    """
    if fmt == "json":
        return dump_json(comparison_json(report))
    rows: list[list[Any]] = [
        [
            r.label,
            r.asis.cost if r.asis else None,
            r.asis.time if r.asis else None,
            r.tobe.cost if r.tobe else None,
            r.tobe.time if r.tobe else None,
        ]
        for r in report.rows
    ]
    rows.append(["Sum", report.asis_cost, report.asis_time, report.tobe_cost, report.tobe_time])
    body = render_rows(COMPARISON_COLUMNS, rows, fmt)
    sep = "\n" if fmt == "markdown" else ""
    return body + sep + reduction_footer(report) + "\n"


# -- graphs -------------------------------------------------------------------

# DOT shape legend: actor roles are boxes, transactions disks (circles) and
# information banks open (dashed) boxes.
_NODE_STYLE = {
    "actor": 'shape=box',
    "transaction": 'shape=circle',
    "bank": 'shape=box, style=dashed',
}
_EDGE_STYLE = {
    "initiates": "",
    "executes": ", style=bold",
    "access": ", style=dashed, arrowhead=none",
    "psd": ", style=dotted",
}


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def _node_name(key: tuple[str, str]) -> str:
    return f"{key[0]}:{key[1]}"


def render_graph(graph: OntologyGraph, fmt: str = "dot") -> str:
    if fmt == "dot":
        lines = ["digraph ontology {"]
        if graph.nodes:
            lines.append("  rankdir=LR;")
        for n in graph.nodes:
            label = f"{n.id}\n{n.label}"
            if n.annotation:
                label += "\n{" + ", ".join(n.annotation) + "}"
            lines.append(f"  {_dot_quote(_node_name(n.key))} [label={_dot_quote(label)}, {_NODE_STYLE[n.kind]}];")
        for e in graph.edges:
            label = e.kind + (f" {e.annotation}" if e.annotation else "")
            lines.append(
                f"  {_dot_quote(_node_name(e.source))} -> {_dot_quote(_node_name(e.target))}"
                f" [label={_dot_quote(label)}{_EDGE_STYLE[e.kind]}];"
            )
        lines.append("}")
        return "\n".join(lines) + "\n"
    if fmt == "json":
        return dump_json(graph_json(graph))
    raise ValueError(f"unknown graph format {fmt!r}")


def graph_json(graph: OntologyGraph) -> dict[str, Any]:
    return {
        "nodes": [
            {"kind": n.kind, "id": n.id, "label": n.label, "annotation": list(n.annotation)}
            for n in graph.nodes
        ],
        "edges": [
            {
                "kind": e.kind,
                "source": _node_name(e.source),
                "target": _node_name(e.target),
                "annotation": e.annotation,
            }
            for e in graph.edges
        ],
    }
