"""Deterministic SVG line plots for run CSVs.

Hand-rolled on purpose: the output must be byte-identical across reruns, so
there are no timestamps, hashed ids, or library version strings, just
polylines, ticks, and a legend computed from the data.
"""

from __future__ import annotations

import csv

from .errors import DataFormatError

SYNTH_COLUMNS = ["example_index", "learner", "K", "convention", "seed", "approx_error"]
MNIST_COLUMNS = ["examples_seen", "learner", "digit", "test_error", "approx_error", "ova_error"]

WIDTH, HEIGHT = 800, 500
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 72, 24, 40, 56

PALETTE = (
    "#1b6ca8", "#d1495b", "#66a182", "#edae49", "#775b96",
    "#2e4057", "#8c5e58", "#4f9da6", "#c97b84", "#7a9e29",
)


def _read_rows(csv_path):
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{csv_path}: empty CSV") from None
        rows = [row for row in reader if row]
    if not rows:
        raise DataFormatError(f"{csv_path}: CSV has no data rows")
    return header, rows


def _series_from_csv(csv_path, y_column=None):
    """Group a known run CSV into {label: [(x, y), ...]}, averaging duplicates.

    Synthetic runs average over seeds per series; digit-stream runs average
    over digits.  Unknown headers are an error naming both expected schemas.
    """
    header, rows = _read_rows(csv_path)
    if header == SYNTH_COLUMNS:
        x_col, key_cols = "example_index", ("learner", "K", "convention")
        y_col = y_column or "approx_error"
    elif header == MNIST_COLUMNS:
        x_col, key_cols = "examples_seen", ("learner",)
        y_col = y_column or "approx_error"
    else:
        raise DataFormatError(
            f"{csv_path}: unrecognized CSV header {header!r}; expected "
            f"{SYNTH_COLUMNS!r} or {MNIST_COLUMNS!r}"
        )
    if y_col not in header:
        raise DataFormatError(f"{csv_path}: no column {y_col!r} to plot")
    col = {name: i for i, name in enumerate(header)}
    accum: dict[str, dict[float, list[float]]] = {}
    for row in rows:
        parts = [row[col[k]] for k in key_cols if row[col[k]] != ""]
        label = " ".join(
            f"{k}={row[col[k]]}" if k != "learner" else row[col[k]]
            for k in key_cols if row[col[k]] != ""
        )
        if not parts:
            label = "run"
        try:
            x = float(row[col[x_col]])
            y = float(row[col[y_col]])
        except ValueError as exc:
            raise DataFormatError(f"{csv_path}: bad numeric field: {exc}") from exc
        accum.setdefault(label, {}).setdefault(x, []).append(y)
    series = {}
    for label in sorted(accum):
        points = sorted(
            (x, sum(ys) / len(ys)) for x, ys in accum[label].items()
        )
        series[label] = points
    return series, x_col, y_col


def _ticks(lo: float, hi: float, count: int = 5):
    if hi == lo:
        return [lo]
    step = (hi - lo) / (count - 1)
    return [lo + step * i for i in range(count)]


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def emit_plot(csv_path, out_path, y_column: str | None = None, title: str | None = None):
    """Render one run CSV to a standalone SVG file; returns the output path."""
    series, x_label, y_label = _series_from_csv(csv_path, y_column)
    xs = [x for pts in series.values() for x, _ in pts]
    ys = [y for pts in series.values() for _, y in pts]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def sx(x):
        return MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y):
        return HEIGHT - MARGIN_BOTTOM - (y - y_lo) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{title or y_label}</text>',
    ]
    axis = (
        f'<line x1="{MARGIN_LEFT}" y1="{HEIGHT - MARGIN_BOTTOM}" '
        f'x2="{WIDTH - MARGIN_RIGHT}" y2="{HEIGHT - MARGIN_BOTTOM}" stroke="black"/>'
        f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" '
        f'x2="{MARGIN_LEFT}" y2="{HEIGHT - MARGIN_BOTTOM}" stroke="black"/>'
    )
    parts.append(axis)
    for tx in _ticks(x_lo, x_hi):
        px = sx(tx)
        parts.append(
            f'<line x1="{px:.2f}" y1="{HEIGHT - MARGIN_BOTTOM}" '
            f'x2="{px:.2f}" y2="{HEIGHT - MARGIN_BOTTOM + 5}" stroke="black"/>'
            f'<text x="{px:.2f}" y="{HEIGHT - MARGIN_BOTTOM + 20}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{_fmt(tx)}</text>'
        )
    for ty in _ticks(y_lo, y_hi):
        py = sy(ty)
        parts.append(
            f'<line x1="{MARGIN_LEFT - 5}" y1="{py:.2f}" '
            f'x2="{MARGIN_LEFT}" y2="{py:.2f}" stroke="black"/>'
            f'<text x="{MARGIN_LEFT - 8}" y="{py + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{_fmt(ty)}</text>'
        )
    parts.append(
        f'<text x="{MARGIN_LEFT + plot_w / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{x_label}</text>'
    )
    parts.append(
        f'<text x="18" y="{MARGIN_TOP + plot_h / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 18 {MARGIN_TOP + plot_h / 2:.1f})">{y_label}</text>'
    )
    for i, (label, points) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in points)
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        ly = MARGIN_TOP + 14 + 16 * i
        lx = WIDTH - MARGIN_RIGHT - 180
        parts.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="1.5"/>'
            f'<text x="{lx + 28}" y="{ly}" font-family="sans-serif" font-size="12">{label}</text>'
        )
    parts.append("</svg>")
    with open(out_path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
    return out_path
