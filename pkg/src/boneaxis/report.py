"""Report emission: per-case CSV/JSON rows, summary statistics and figures.

Summary rows carry mean, std, median, bootstrap CI95 of the median,
max and n per numeric column. Figures (box plots per metric family) are
rendered to PNG files next to the delimited output.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from .geometry import project_onto_line, subdivide
from .metrics import summarize
from .pipeline import AXIS_KEYS, CaseResult

NUMERIC_COLUMNS = (
    "dice",
    "asd_mm",
    "hd_mm",
    "angulation_anterior_deg",
    "displacement_anterior_mm",
    "angulation_posterior_deg",
    "displacement_posterior_mm",
    "angulation_shaft_deg",
    "displacement_shaft_mm",
)

COLUMNS = ("case", "structure", "status", "stage") + NUMERIC_COLUMNS + ("warnings", "error")

_SUMMARY_ORDER = ("mean", "std", "median", "ci95_low", "ci95_high", "max", "n")


def result_row(result: CaseResult) -> dict:
    """Flatten one CaseResult into a report row (missing metrics are None)."""
    row = {column: None for column in COLUMNS}
    row["case"] = result.case
    row["structure"] = result.structure
    row["status"] = "ok" if result.ok else "error"
    row["stage"] = result.stage
    row["error"] = result.error
    if result.outcome is not None:
        row["warnings"] = ";".join(result.outcome.warnings) or None
    if result.seg is not None:
        row["dice"] = result.seg.dice
        row["asd_mm"] = result.seg.asd_mm
        row["hd_mm"] = result.seg.hd_mm
    for key in AXIS_KEYS:
        if key in result.axes:
            row[f"angulation_{key}_deg"] = result.axes[key].angulation_deg
            row[f"displacement_{key}_mm"] = result.axes[key].displacement_mm
    return row


def summarize_rows(rows, seed: int = 0) -> dict:
    """Per-column SummaryStats over the rows that carry a value."""
    summary = {}
    for column in NUMERIC_COLUMNS:
        values = [row[column] for row in rows if row[column] is not None]
        if values:
            summary[column] = summarize(values, seed=seed)
    return summary


def _format(value) -> str:
    if value is None:
        return ""
    return repr(value) if isinstance(value, float) else str(value)


def render_csv(rows, summary, seed: int = 0) -> str:
    """Delimited report: one row per (case, structure), then summary rows.

    Summary rows use case="summary" and carry the statistic name in the
    structure column; a trailing row labels how the CI95 bounds were
    computed.
    """
    buffer = io.StringIO(newline="")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([_format(row[column]) for column in COLUMNS])
    for stat in _SUMMARY_ORDER:
        record = {column: getattr(stats, stat) for column, stats in summary.items()}
        writer.writerow([
            "summary", stat, "", "",
            *[_format(record.get(column)) for column in NUMERIC_COLUMNS],
            "", "",
        ])
    writer.writerow([
        "summary", "ci95_method", f"bootstrap-percentile; resamples=10000; seed={seed}",
        "", *[""] * len(NUMERIC_COLUMNS), "", "",
    ])
    return buffer.getvalue()


def render_json(rows, summary, seed: int) -> str:
    doc = {
        "cases": rows,
        "summary": {
            column: {stat: getattr(stats, stat) for stat in _SUMMARY_ORDER}
            for column, stats in summary.items()
        },
        "ci95_method": {
            "kind": "bootstrap-percentile",
            "resamples": 10000,
            "seed": seed,
            "statistic": "median",
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def write_report(results, out_dir, fmt: str = "csv", seed: int = 0, figures: bool = True) -> list:
    """Write the report (and optional figures) for a batch; returns paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = [result_row(result) for result in results]
    summary = summarize_rows(rows, seed=seed)
    written = []
    if fmt == "csv":
        path = out_dir / "report.csv"
        path.write_text(render_csv(rows, summary, seed))
    elif fmt == "json":
        path = out_dir / "report.json"
        path.write_text(render_json(rows, summary, seed))
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    written.append(path)
    if figures:
        written.extend(render_figures(rows, out_dir / "figures"))
    return written


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------

_FIGURE_GROUPS = (
    ("angulation_deg.png", "Angulation error (deg)",
     [("anterior", "angulation_anterior_deg"),
      ("posterior", "angulation_posterior_deg"),
      ("shaft", "angulation_shaft_deg")]),
    ("displacement_mm.png", "Displacement error (mm)",
     [("anterior", "displacement_anterior_mm"),
      ("posterior", "displacement_posterior_mm"),
      ("shaft", "displacement_shaft_mm")]),
    ("segmentation.png", "Segmentation metrics",
     [("DICE", "dice"), ("ASD (mm)", "asd_mm"), ("HD (mm)", "hd_mm")]),
)


def render_figures(rows, fig_dir) -> list:
    """Box plots per metric family; only written when data is present."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig_dir = Path(fig_dir)
    written = []
    for filename, title, series in _FIGURE_GROUPS:
        data, labels = [], []
        for label, column in series:
            values = [row[column] for row in rows if row[column] is not None]
            if values:
                data.append(values)
                labels.append(f"{label} (n={len(values)})")
        if not data:
            continue
        fig_dir.mkdir(parents=True, exist_ok=True)
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.boxplot(data, tick_labels=labels)
        ax.set_title(title)
        ax.grid(True, axis="y", alpha=0.4)
        fig.tight_layout()
        path = fig_dir / filename
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written


def detection_json(result: CaseResult) -> str:
    """Machine-readable output of a single detection.

    Coordinates are image pixels (x right, y down); angles are degrees
    with 0 at +x, increasing towards +y (i.e. counterclockwise in the
    y-down raster frame).
    """
    doc = {
        "case": result.case,
        "structure": result.structure,
        "status": "ok" if result.ok else "error",
        "spacing_mm_per_px": result.spacing,
        "coordinates": "x right, y down; angle_deg: 0 = +x, increasing towards +y",
    }
    if not result.ok:
        doc["error"] = result.error
        doc["stage"] = result.stage
        return json.dumps(doc, indent=2, sort_keys=True)

    outcome = result.outcome
    axis_result = outcome.axis_result
    p_a, p_b = subdivide(axis_result.anterior, axis_result.d1, axis_result.d2)
    q_a = project_onto_line(p_a, axis_result.posterior.line)
    q_b = project_onto_line(p_b, axis_result.posterior.line)

    def point(p):
        return [float(p[0]), float(p[1])]

    def segment(seg):
        return {
            "start": point(seg.p_start),
            "end": point(seg.p_end),
            "angle_deg": seg.line.angle_deg(),
        }

    doc.update({
        "axis": {
            "m1": point(axis_result.m1),
            "m2": point(axis_result.m2),
            "direction": point(axis_result.axis.direction),
            "angle_deg": axis_result.axis.angle_deg(),
        },
        "auxiliary": {
            label: segment(seg) for label, seg in sorted(outcome.segments.items())
        },
        "intermediate_points": {
            "p_a": point(p_a), "p_b": point(p_b),
            "q_a": point(q_a), "q_b": point(q_b),
        },
        "d1_px": axis_result.d1,
        "d2_px": axis_result.d2,
        "support_counts": dict(sorted(outcome.support_counts.items())),
        "warnings": list(outcome.warnings),
    })
    if result.axes:
        doc["evaluation"] = {
            key: {
                "angulation_deg": report.angulation_deg,
                "displacement_mm": report.displacement_mm,
            }
            for key, report in sorted(result.axes.items())
        }
    if result.seg is not None:
        doc["segmentation"] = {
            "dice": result.seg.dice, "asd_mm": result.seg.asd_mm, "hd_mm": result.seg.hd_mm,
        }
    return json.dumps(doc, indent=2, sort_keys=True)
