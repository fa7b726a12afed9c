"""Dependency-free SVG rendering: scatter, line, heatmap, dendrogram.

Plots are presentation sugar over the canonical CSV/JSON artifacts, so
the goal is legibility and byte-stable output, not a charting library.
All coordinates are formatted to fixed precision and every element is
emitted in a deterministic order.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .distance import Dendrogram
from .projection import ProjectedPoints

__all__ = [
    "PALETTE",
    "svg_scatter",
    "svg_line",
    "svg_heatmap",
    "svg_dendrogram",
]

PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)

_W, _H = 720, 520
_MARGIN = 60


def _f(v: float) -> str:
    return f"{v:.2f}"


def _header(title: str, width: int = _W, height: int = _H) -> list[str]:
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        lines.append(
            f'<text x="{width // 2}" y="24" text-anchor="middle" '
            f'font-family="sans-serif" font-size="16">{_escape(title)}</text>'
        )
    return lines


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _scale(lo: float, hi: float, a: float, b: float):
    span = hi - lo
    if span == 0.0:
        span = 1.0
    return lambda v: a + (v - lo) / span * (b - a)


def _axis_labels(lines: list[str], x_lo, x_hi, y_lo, y_hi) -> None:
    lines.append(
        f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{_W - 2 * _MARGIN}" '
        f'height="{_H - 2 * _MARGIN}" fill="none" stroke="#888"/>'
    )
    for txt, x, y, anchor in (
        (f"{x_lo:.3g}", _MARGIN, _H - _MARGIN + 16, "middle"),
        (f"{x_hi:.3g}", _W - _MARGIN, _H - _MARGIN + 16, "middle"),
        (f"{y_lo:.3g}", _MARGIN - 6, _H - _MARGIN, "end"),
        (f"{y_hi:.3g}", _MARGIN - 6, _MARGIN + 10, "end"),
    ):
        lines.append(
            f'<text x="{x}" y="{y}" text-anchor="{anchor}" '
            f'font-family="sans-serif" font-size="11">{txt}</text>'
        )


def svg_scatter(
    points: ProjectedPoints,
    path: str,
    title: str = "",
    highlight: Sequence[str] = (),
) -> None:
    """2-D scatter of the first two coordinates, colored by label.

    Labels in ``highlight`` draw larger, on top, in the second palette
    color, for marking query samples against the field.
    """
    coords = points.coordinates
    if coords.shape[1] < 2:
        raise ValueError("scatter needs at least two coordinates per point")
    xs, ys = coords[:, 0], coords[:, 1]
    labels = points.labels if points.labels else [""] * len(points.sample_ids)
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = float(ys.min()), float(ys.max())
    sx = _scale(x_lo, x_hi, _MARGIN, _W - _MARGIN)
    sy = _scale(y_lo, y_hi, _H - _MARGIN, _MARGIN)
    uniq = sorted(set(labels))
    color = {lab: PALETTE[i % len(PALETTE)] for i, lab in enumerate(uniq)}
    hi_set = set(highlight)
    lines = _header(title)
    _axis_labels(lines, x_lo, x_hi, y_lo, y_hi)
    deferred: list[str] = []
    for x, y, lab in zip(xs, ys, labels):
        if lab in hi_set:
            deferred.append(
                f'<circle cx="{_f(sx(x))}" cy="{_f(sy(y))}" r="5" '
                f'fill="{PALETTE[1]}" stroke="black"/>'
            )
        else:
            lines.append(
                f'<circle cx="{_f(sx(x))}" cy="{_f(sy(y))}" r="3" '
                f'fill="{color[lab]}" fill-opacity="0.7"/>'
            )
    lines.extend(deferred)
    for i, lab in enumerate(uniq):
        y = _MARGIN + 14 * i
        lines.append(
            f'<rect x="{_W - _MARGIN + 8}" y="{y}" width="10" height="10" '
            f'fill="{color[lab]}"/>'
        )
        lines.append(
            f'<text x="{_W - _MARGIN + 22}" y="{y + 9}" '
            f'font-family="sans-serif" font-size="10">{_escape(lab or "?")}</text>'
        )
    lines.append("</svg>")
    _write(path, lines)


def svg_line(
    series: Sequence[tuple[str, Sequence[float]]],
    path: str,
    title: str = "",
    y_range: tuple[float, float] | None = None,
) -> None:
    """One polyline per named series over integer x steps."""
    if not series:
        raise ValueError("no series to plot")
    all_y = [v for _, ys in series for v in ys]
    y_lo, y_hi = y_range if y_range else (min(all_y), max(all_y))
    x_hi = max(len(ys) - 1 for _, ys in series)
    sx = _scale(0, max(x_hi, 1), _MARGIN, _W - _MARGIN)
    sy = _scale(y_lo, y_hi, _H - _MARGIN, _MARGIN)
    lines = _header(title)
    _axis_labels(lines, 0, x_hi, y_lo, y_hi)
    for i, (name, ys) in enumerate(series):
        pts = " ".join(f"{_f(sx(x))},{_f(sy(v))}" for x, v in enumerate(ys))
        c = PALETTE[i % len(PALETTE)]
        lines.append(
            f'<polyline points="{pts}" fill="none" stroke="{c}" stroke-width="1.5"/>'
        )
        y = _MARGIN + 14 * i
        lines.append(
            f'<rect x="{_W - _MARGIN + 8}" y="{y}" width="10" height="4" fill="{c}"/>'
        )
        lines.append(
            f'<text x="{_W - _MARGIN + 22}" y="{y + 7}" '
            f'font-family="sans-serif" font-size="10">{_escape(name)}</text>'
        )
    lines.append("</svg>")
    _write(path, lines)


def svg_heatmap(
    ids: Sequence[str],
    values: np.ndarray,
    path: str,
    title: str = "",
) -> None:
    """Square matrix heatmap; darker cells mean smaller values (closer)."""
    values = np.asarray(values, dtype=np.float64)
    n = len(ids)
    if values.shape != (n, n):
        raise ValueError(f"matrix shape {values.shape} for {n} ids")
    v_lo, v_hi = float(values.min()), float(values.max())
    span = (v_hi - v_lo) or 1.0
    side = min(_W, _H) - 2 * _MARGIN
    cell = side / n
    lines = _header(title)
    for i in range(n):
        for j in range(n):
            shade = int(round(255 * (values[i, j] - v_lo) / span))
            x = _MARGIN + j * cell
            y = _MARGIN + i * cell
            lines.append(
                f'<rect x="{_f(x)}" y="{_f(y)}" width="{_f(cell)}" '
                f'height="{_f(cell)}" fill="rgb({shade},{shade},{shade})"/>'
            )
    for i, sid in enumerate(ids):
        y = _MARGIN + (i + 0.5) * cell + 3
        lines.append(
            f'<text x="{_MARGIN - 4}" y="{_f(y)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="9">{_escape(sid)}</text>'
        )
        x = _MARGIN + (i + 0.5) * cell
        lines.append(
            f'<text x="{_f(x)}" y="{_MARGIN + side + 12}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="9">{_escape(sid)}</text>'
        )
    lines.append("</svg>")
    _write(path, lines)


def svg_dendrogram(dend: Dendrogram, path: str, title: str = "") -> None:
    """Left-to-right dendrogram: leaves on the left, merge height on x."""
    n = len(dend.leaf_ids)
    children = {m: (a, b) for a, b, _, m in dend.merges}
    heights = {m: h for _, _, h, m in dend.merges}
    root = dend.merges[-1][3]

    display: list[int] = []

    def _order(node: int) -> None:
        if node < n:
            display.append(node)
        else:
            a, b = children[node]
            _order(a)
            _order(b)

    _order(root)
    y_of: dict[int, float] = {}
    step = (_H - 2 * _MARGIN) / max(n - 1, 1)
    for pos, leaf in enumerate(display):
        y_of[leaf] = _MARGIN + pos * step
    max_h = max(heights.values()) or 1.0
    sx = _scale(0.0, max_h, _MARGIN + 120, _W - _MARGIN)
    x_of = {i: sx(0.0) for i in range(n)}
    lines = _header(title)
    for i, leaf in enumerate(display):
        lines.append(
            f'<text x="{_f(sx(0.0) - 6)}" y="{_f(y_of[leaf] + 3)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{_escape(dend.leaf_ids[leaf])}</text>'
        )
    for a, b, h, m in dend.merges:
        x = sx(h)
        ya, yb = y_of[a], y_of[b]
        lines.append(
            f'<line x1="{_f(x_of[a])}" y1="{_f(ya)}" x2="{_f(x)}" y2="{_f(ya)}" '
            f'stroke="black"/>'
        )
        lines.append(
            f'<line x1="{_f(x_of[b])}" y1="{_f(yb)}" x2="{_f(x)}" y2="{_f(yb)}" '
            f'stroke="black"/>'
        )
        lines.append(
            f'<line x1="{_f(x)}" y1="{_f(ya)}" x2="{_f(x)}" y2="{_f(yb)}" '
            f'stroke="black"/>'
        )
        y_of[m] = (ya + yb) / 2.0
        x_of[m] = x
    lines.append("</svg>")
    _write(path, lines)


def _write(path: str, lines: list[str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")
