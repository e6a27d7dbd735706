from pathlib import Path

import pytest

from qsdc_lab._analysis import ComparisonRow, EstimateWithCI
from qsdc_lab._report import CSV_COLUMNS, emit_report, read_report, render_html


@pytest.fixture
def rows() -> list[ComparisonRow]:
    return [
        ComparisonRow.compare("mitm_detect", {"m": 4}, EstimateWithCI.from_counts(9380, 10_000)),
        ComparisonRow.compare(
            "dos_pass",
            {"w": (0.0, 1.0, 0.0, 0.0)},
            EstimateWithCI.from_counts(600, 1000),
        ),
    ]


@pytest.fixture
def header() -> dict:
    return {"subcommand": "suite", "seed": 7, "trials": 10_000}


def test_emit_csv(tmp_path: Path, rows: list[ComparisonRow], header: dict):
    path = emit_report(rows, "csv", tmp_path / "rows.csv", header=header)
    lines = path.read_text(encoding="utf-8").splitlines()

    assert lines[:3] == ["# seed: 7", "# subcommand: \"suite\"", "# trials: 10000"]
    assert lines[3] == ",".join(CSV_COLUMNS)
    assert lines[4].startswith('mitm_detect,"{""m"":4}",0.9375,0.938,')
    assert lines[4].endswith(",true,10000,0.01")
    assert ",false,1000," in lines[5]


def test_read_csv(tmp_path: Path, rows: list[ComparisonRow], header: dict):
    path = emit_report(rows, "csv", tmp_path / "rows.csv", header=header)

    back = read_report(path)

    assert back[0] == rows[0]
    assert back[1].params == {"w": [0.0, 1.0, 0.0, 0.0]}
    assert not back[1].within_tolerance


def test_read_json(tmp_path: Path, rows: list[ComparisonRow], header: dict):
    path = emit_report(rows, "json", tmp_path / "rows.json", header=header)

    assert read_report(path) == rows


def test_emit_empty_report(tmp_path: Path):
    path = emit_report([], "csv", tmp_path / "empty.csv")

    assert path.read_text(encoding="utf-8").strip() == ",".join(CSV_COLUMNS)
    assert read_report(path) == []


def test_read_csv_wrong_columns(tmp_path: Path):
    path = tmp_path / "other.csv"
    path.write_text("a,b\n1,2\n", encoding="utf-8")

    with pytest.raises(ValueError) as exc_info:
        read_report(path)

    assert exc_info.value.args[0].startswith("Unexpected report columns")


def test_emit_unknown_format(tmp_path: Path, rows: list[ComparisonRow]):
    with pytest.raises(ValueError) as exc_info:
        emit_report(rows, "xlsx", tmp_path / "rows.xlsx")  # type: ignore[arg-type]

    assert "`format`" in exc_info.value.args[0]


def test_render_html(rows: list[ComparisonRow], header: dict):
    html = render_html(rows, header)

    assert html.startswith("<!DOCTYPE html>")
    assert "1 of 2 rows within tolerance." in html
    assert "mitm_detect" in html
    assert "0.9375" in html
    assert "10,000" in html
    assert "<svg" in html


def test_render_html_locale(rows: list[ComparisonRow]):
    html = render_html(rows, locale="de")

    assert "0,9375" in html
    assert "10.000" in html


def test_emit_html(tmp_path: Path, rows: list[ComparisonRow]):
    path = emit_report(rows, "html", tmp_path / "rows.html")

    assert "Closed form vs. simulation" in path.read_text(encoding="utf-8")
