"""Loading, aggregating, and plotting benchmark records.

Plots are written as hand-built SVG so that identical inputs produce
byte-identical files: no timestamps, no generated ids, fixed float
formatting.  The n axis is log-scaled; counter metrics simply omit
points for records without counter values (never zero-filled).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

from .bench import CSV_FIELDS, BenchRecord

__all__ = ["CsvSchemaError", "Series", "load_records", "aggregate", "render_svg", "emit_plot"]

METRICS = ("elapsed_us", "l2_misses", "l3_misses")

_AXIS_LABELS = {
    "elapsed_us": "mean time (us)",
    "l2_misses": "mean L2 misses",
    "l3_misses": "mean L3 misses",
}

_PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")


class CsvSchemaError(ValueError):
    pass


@dataclass(frozen=True)
class Series:
    method: str
    metric: str
    points: tuple[tuple[int, float], ...]  # (n, value), ascending in n


def load_records(path) -> list[BenchRecord]:
    """Read a benchmark CSV back into records, checking the schema."""
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(CSV_FIELDS):
            raise CsvSchemaError(f"{path}:1: header {header} != {list(CSV_FIELDS)}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(CSV_FIELDS):
                raise CsvSchemaError(
                    f"{path}:{lineno}: {len(row)} fields, want {len(CSV_FIELDS)}"
                )
            try:
                records.append(
                    BenchRecord(
                        method=row[0],
                        n=int(row[1]),
                        rep=int(row[2]),
                        seed=int(row[3]),
                        elapsed_us=float(row[4]),
                        l2_misses=int(row[5]) if row[5] else None,
                        l3_misses=int(row[6]) if row[6] else None,
                    )
                )
            except ValueError as exc:
                raise CsvSchemaError(f"{path}:{lineno}: {exc}") from None
    return records


def aggregate(records: list[BenchRecord], metric: str) -> list[Series]:
    """Per-method series of per-n means for one metric.

    Records lacking the metric contribute no point; an (n, method) cell
    whose records all lack it simply has no point at that n.
    """
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; choose from {METRICS}")
    methods = []
    for r in records:
        if r.method not in methods:
            methods.append(r.method)
    out = []
    for method in methods:
        by_n: dict[int, list[float]] = {}
        for r in records:
            if r.method != method:
                continue
            value = getattr(r, metric)
            if value is None:
                continue
            by_n.setdefault(r.n, []).append(float(value))
        points = tuple(
            (n, sum(vals) / len(vals)) for n, vals in sorted(by_n.items())
        )
        if points:
            out.append(Series(method=method, metric=metric, points=points))
    return out


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def render_svg(series_list: list[Series], metric: str) -> str:
    """Deterministic SVG line chart: log-n x axis, one polyline per series."""
    if not series_list or all(not s.points for s in series_list):
        raise ValueError("nothing to plot: no series with points")
    series_list = [s for s in series_list if s.points]

    width, height = 720.0, 480.0
    left, right, top, bottom = 80.0, width - 170.0, 30.0, height - 60.0

    ns = [n for s in series_list for n, _ in s.points]
    vals = [v for s in series_list for _, v in s.points]
    xlo = math.floor(math.log10(min(ns)))
    xhi = math.ceil(math.log10(max(ns)))
    if xhi == xlo:
        xhi = xlo + 1
    ylo = 0.0
    yhi = max(vals) * 1.05 if max(vals) > 0 else 1.0

    def x_of(n):
        return left + (math.log10(n) - xlo) / (xhi - xlo) * (right - left)

    def y_of(v):
        return bottom - (v - ylo) / (yhi - ylo) * (bottom - top)

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">',
        f'<rect width="{width:.0f}" height="{height:.0f}" fill="white"/>',
        f'<line x1="{left:.2f}" y1="{bottom:.2f}" x2="{right:.2f}" y2="{bottom:.2f}" stroke="black"/>',
        f'<line x1="{left:.2f}" y1="{bottom:.2f}" x2="{left:.2f}" y2="{top:.2f}" stroke="black"/>',
    ]
    for exp in range(xlo, xhi + 1):
        x = x_of(10**exp)
        parts.append(
            f'<line x1="{x:.2f}" y1="{bottom:.2f}" x2="{x:.2f}" y2="{bottom + 5:.2f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{bottom + 20:.2f}" font-size="12" '
            f'text-anchor="middle">1e{exp}</text>'
        )
    for tick in _ticks(ylo, yhi):
        y = y_of(tick)
        parts.append(
            f'<line x1="{left - 5:.2f}" y1="{y:.2f}" x2="{left:.2f}" y2="{y:.2f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{left - 9:.2f}" y="{y + 4:.2f}" font-size="12" '
            f'text-anchor="end">{tick:.4g}</text>'
        )
    parts.append(
        f'<text x="{(left + right) / 2:.2f}" y="{height - 12:.2f}" font-size="13" '
        f'text-anchor="middle">n (keys)</text>'
    )
    ylabel = _AXIS_LABELS.get(metric, metric)
    parts.append(
        f'<text x="18" y="{(top + bottom) / 2:.2f}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 18 {(top + bottom) / 2:.2f})">{escape(ylabel)}</text>'
    )

    for idx, s in enumerate(series_list):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = [(x_of(n), y_of(v)) for n, v in s.points]
        if len(pts) > 1:
            coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
            parts.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>'
            )
        for x, y in pts:
            parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{color}"/>')
        ly = top + 18 * idx
        parts.append(
            f'<rect x="{right + 12:.2f}" y="{ly - 9:.2f}" width="10" height="10" fill="{color}"/>'
        )
        parts.append(
            f'<text x="{right + 27:.2f}" y="{ly:.2f}" font-size="12">{escape(s.method)}</text>'
        )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_plot(series_list: list[Series], metric: str, path) -> None:
    with open(path, "w") as fh:
        fh.write(render_svg(series_list, metric))
