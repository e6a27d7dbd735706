from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Any, Mapping, Sequence

import faicons
from babel.numbers import format_decimal
from htmltools import HTML, TagList, css, tags
from typing_extensions import Literal, TypeAlias

from ._analysis import ComparisonRow, EstimateWithCI
from ._serialize import dumps, row_from_dict, to_jsonable
from ._utils import _match_arg

logger = logging.getLogger(__name__)

ReportFormat: TypeAlias = Literal["csv", "json", "html"]
REPORT_FORMATS: tuple[ReportFormat, ...] = ("csv", "json", "html")

CSV_COLUMNS = (
    "quantity",
    "params",
    "closed_form",
    "point",
    "stderr",
    "ci_low",
    "ci_high",
    "pass",
    "n_trials",
    "tolerance",
)


def emit_report(
    rows: Sequence[ComparisonRow],
    format: ReportFormat,
    path: str | Path,
    *,
    header: Mapping[str, Any] | None = None,
    locale: str = "en",
) -> Path:
    """
    Write comparison rows to `path`.

    Parameters
    ----------
    rows
        The rows to write. An empty sequence yields a report with only its header.
    format
        One of `"csv"`, `"json"` or `"html"`.
    path
        Destination file; parent directories must exist.
    header
        Effective configuration to echo at the top of the report.
    locale
        Locale used for number formatting in the HTML report.

    Returns
    -------
    Path
        The path written to.
    """

    _match_arg(format, REPORT_FORMATS, "format")
    path = Path(path)
    header = dict(header or {})

    if format == "csv":
        _write_csv(rows, path, header)
    elif format == "json":
        document = {"config": to_jsonable(header), "rows": to_jsonable(list(rows))}
        path.write_text(json.dumps(document, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    else:
        path.write_text(render_html(rows, header, locale=locale), encoding="utf-8")

    logger.info("wrote %d rows to %s (%s)", len(rows), path, format)
    return path


def _write_csv(rows: Sequence[ComparisonRow], path: Path, header: Mapping[str, Any]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        # configuration echo as comment lines
        for key, val in sorted(header.items()):
            f.write(f"# {key}: {dumps(val)}\n")

        writer = csv.writer(f)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            est = row.estimate
            writer.writerow(
                [
                    row.quantity,
                    dumps(row.params),
                    repr(row.closed_form),
                    repr(est.point),
                    repr(est.stderr),
                    repr(est.ci_low),
                    repr(est.ci_high),
                    "true" if row.within_tolerance else "false",
                    est.n_trials,
                    repr(row.tolerance),
                ]
            )


def read_report(path: str | Path) -> list[ComparisonRow]:
    """Read the rows back from a CSV or JSON report."""

    path = Path(path)
    text = path.read_text(encoding="utf-8")

    if path.suffix == ".json":
        return [row_from_dict(row) for row in json.loads(text)["rows"]]

    lines = [line for line in text.splitlines() if not line.startswith("#")]
    reader = csv.DictReader(lines)
    if reader.fieldnames is not None and tuple(reader.fieldnames) != CSV_COLUMNS:
        raise ValueError(f"Unexpected report columns: {reader.fieldnames}.")

    return [
        ComparisonRow(
            quantity=rec["quantity"],
            params=json.loads(rec["params"]),
            closed_form=float(rec["closed_form"]),
            estimate=EstimateWithCI(
                point=float(rec["point"]),
                stderr=float(rec["stderr"]),
                ci_low=float(rec["ci_low"]),
                ci_high=float(rec["ci_high"]),
                n_trials=int(rec["n_trials"]),
            ),
            within_tolerance=rec["pass"] == "true",
            tolerance=float(rec["tolerance"]),
        )
        for rec in reader
    ]


def _fmt(x: float, locale: str) -> str:
    return format_decimal(x, format="0.0000", locale=locale)


def _pass_icon(passed: bool) -> HTML:
    name, fill = ("circle-check", "#2E7D32") if passed else ("circle-xmark", "#C62828")
    return HTML(str(faicons.icon_svg(name, fill=fill, height="1em", margin_left="0", margin_right="0")))


def render_html(
    rows: Sequence[ComparisonRow], header: Mapping[str, Any] | None = None, locale: str = "en"
) -> str:
    """Render the rows as a standalone HTML page."""

    cell = css(padding="4px 8px", border_bottom="1px solid #D3D3D3", text_align="right")
    head_cell = css(padding="4px 8px", border_bottom="2px solid #A8A8A8", text_align="left")

    head = tags.tr(*[tags.th(col, style=head_cell) for col in CSV_COLUMNS])
    body = [
        tags.tr(
            tags.td(row.quantity, style=css(text_align="left", padding="4px 8px")),
            tags.td(tags.code(dumps(row.params)), style=cell),
            tags.td(_fmt(row.closed_form, locale), style=cell),
            tags.td(_fmt(row.estimate.point, locale), style=cell),
            tags.td(_fmt(row.estimate.stderr, locale), style=cell),
            tags.td(_fmt(row.estimate.ci_low, locale), style=cell),
            tags.td(_fmt(row.estimate.ci_high, locale), style=cell),
            tags.td(_pass_icon(row.within_tolerance), style=css(text_align="center")),
            tags.td(format_decimal(row.estimate.n_trials, locale=locale), style=cell),
            tags.td(_fmt(row.tolerance, locale), style=cell),
        )
        for row in rows
    ]

    config_items = [
        tags.li(tags.strong(f"{key}: "), tags.code(dumps(val)))
        for key, val in sorted((header or {}).items())
    ]

    n_pass = sum(row.within_tolerance for row in rows)
    page = tags.html(
        tags.head(tags.meta(charset="utf-8"), tags.title("Closed form vs. simulation")),
        tags.body(
            tags.h2("Closed form vs. simulation"),
            tags.p(f"{n_pass} of {len(rows)} rows within tolerance."),
            tags.ul(*config_items) if config_items else TagList(),
            tags.table(
                tags.thead(head),
                tags.tbody(*body),
                style=css(border_collapse="collapse", font_family="system-ui, sans-serif"),
            ),
        ),
    )

    return "<!DOCTYPE html>\n" + str(page)
