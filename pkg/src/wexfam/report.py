"""CSV and SVG output for fits, studies and verification runs."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .mcstudy import StudyReport

__all__ = [
    "format_value",
    "parse_value",
    "write_csv",
    "read_csv",
    "dumps_csv",
    "STUDY_COLUMNS",
    "study_rows",
    "write_study_charts",
]


def format_value(v) -> str:
    """Shortest round-trip text for a CSV cell (``None`` becomes empty)."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def parse_value(text: str):
    """Inverse of :func:`format_value`."""
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def dumps_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.write_text(dumps_csv(header, rows), encoding="utf-8")
    return path


def read_csv(path) -> tuple[list[str], list[list]]:
    """Read a CSV written by :func:`write_csv`, converting cells back to values."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [[parse_value(c) for c in row] for row in reader]


STUDY_COLUMNS = (
    "family",
    "variant",
    "n",
    "point_index",
    "true_first",
    "true_second",
    "parameter",
    "true_value",
    "raw_rb",
    "corrected_rb",
    "raw_rmse",
    "corrected_rmse",
    "degenerate_count",
    "n_valid",
    "flagged",
    "seconds",
)


def study_rows(report: StudyReport) -> list[list]:
    cfg = report.config
    return [
        [
            cfg.family,
            cfg.variant,
            r.n,
            r.point_index,
            r.true_first,
            r.true_second,
            r.parameter,
            r.true_value,
            r.raw_rb,
            r.corrected_rb,
            r.raw_rmse,
            r.corrected_rmse,
            r.degenerate_count,
            r.n_valid,
            r.flagged,
            r.wall_clock_seconds,
        ]
        for r in report.rows
    ]


def _series(report: StudyReport, parameter: str, attr: str):
    """``{point_index: (sizes, values)}`` for one parameter and metric."""
    out = {}
    for r in report.rows:
        if r.parameter != parameter:
            continue
        v = getattr(r, attr)
        xs, ys = out.setdefault(r.point_index, ([], []))
        xs.append(r.n)
        ys.append(math.nan if v is None else v)
    return out


def _label(report: StudyReport, i: int) -> str:
    p = report.config.true_native[i]
    first, second = p.names
    return f"{first}={p.first:g}, {second}={p.second:g}"


def write_study_charts(report: StudyReport, out_dir) -> list[Path]:
    """Write ``rb.svg``, ``rmse.svg`` and ``time.svg`` (log-scaled sample size axis)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = report.config.true_native[0].names
    written = []
    plt.rcParams["svg.hashsalt"] = "wexfam"
    meta = {"Date": None}
    for metric, ylabel in (("rb", "relative bias"), ("rmse", "RMSE")):
        fig, axes = plt.subplots(1, len(names), figsize=(5 * len(names), 4), squeeze=False)
        for ax, name in zip(axes[0], names):
            cor = _series(report, name, f"corrected_{metric}")
            raw = _series(report, name, f"raw_{metric}")
            for i, (xs, ys) in sorted(cor.items()):
                line, = ax.plot(xs, ys, marker="o", label=_label(report, i))
                ax.plot(raw[i][0], raw[i][1], ls="--", lw=0.8, color=line.get_color())
            ax.set_xscale("log")
            ax.set_xlabel("n")
            ax.set_ylabel(f"{ylabel} of {name}")
            ax.set_title(f"{name} (solid: bias-reduced, dashed: raw)", fontsize=9)
            ax.legend(fontsize=7)
        fig.tight_layout()
        path = out_dir / f"{metric}.svg"
        fig.savefig(path, format="svg", metadata=meta)
        plt.close(fig)
        written.append(path)

    fig, ax = plt.subplots(figsize=(5, 4))
    for i, (xs, ys) in sorted(_series(report, names[0], "wall_clock_seconds").items()):
        ax.plot(xs, ys, marker="o", label=_label(report, i))
    ax.set_xscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("seconds per cell")
    ax.legend(fontsize=7)
    fig.tight_layout()
    path = out_dir / "time.svg"
    fig.savefig(path, format="svg", metadata=meta)
    plt.close(fig)
    written.append(path)
    return written
