"""Dependency-free deterministic SVG scatter plots."""

from __future__ import annotations

from typing import Sequence

from .errors import EmptyInputError

PALETTE = (
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#d62728",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
)

_MARGIN_LEFT = 60.0
_MARGIN_RIGHT = 20.0
_MARGIN_TOP = 20.0
_MARGIN_BOTTOM = 45.0


def _axis_range(values: Sequence[float]) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    if lo == hi:
        lo -= 0.5
        hi += 0.5
    span = hi - lo
    return lo - 0.05 * span, hi + 0.05 * span


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def scatter_svg(
    points: Sequence[tuple[float, float, str]],
    axis_labels: tuple[str, str],
    width: int = 640,
    height: int = 480,
) -> str:
    """Self-contained scatter plot; byte-identical output for identical input.

    Points are (x, y, group_label); each group gets its own palette color and
    a legend entry in first-appearance order.  Axes are linear, auto-scaled
    to the data extent with 5% margins.
    """
    if not points:
        raise EmptyInputError("scatter plot needs at least one point")
    xs = [float(p[0]) for p in points]
    ys = [float(p[1]) for p in points]
    groups: list[str] = []
    for _, _, label in points:
        if label not in groups:
            groups.append(label)
    colors = {g: PALETTE[i % len(PALETTE)] for i, g in enumerate(groups)}

    x_min, x_max = _axis_range(xs)
    y_min, y_max = _axis_range(ys)
    plot_w = width - _MARGIN_LEFT - _MARGIN_RIGHT
    plot_h = height - _MARGIN_TOP - _MARGIN_BOTTOM

    def px(x: float) -> float:
        return _MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w

    def py(y: float) -> float:
        return _MARGIN_TOP + (y_max - y) / (y_max - y_min) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{_fmt(_MARGIN_LEFT)}" y="{_fmt(_MARGIN_TOP)}" width="{_fmt(plot_w)}" '
        f'height="{_fmt(plot_h)}" fill="none" stroke="#333333" stroke-width="1"/>',
    ]

    for i in range(5):
        t = i / 4.0
        x_val = x_min + t * (x_max - x_min)
        y_val = y_min + t * (y_max - y_min)
        x_pix = px(x_val)
        y_pix = py(y_val)
        parts.append(
            f'<line x1="{_fmt(x_pix)}" y1="{_fmt(_MARGIN_TOP + plot_h)}" x2="{_fmt(x_pix)}" '
            f'y2="{_fmt(_MARGIN_TOP + plot_h + 5)}" stroke="#333333" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_fmt(x_pix)}" y="{_fmt(_MARGIN_TOP + plot_h + 18)}" font-size="11" '
            f'text-anchor="middle" font-family="sans-serif">{x_val:.4g}</text>'
        )
        parts.append(
            f'<line x1="{_fmt(_MARGIN_LEFT - 5)}" y1="{_fmt(y_pix)}" x2="{_fmt(_MARGIN_LEFT)}" '
            f'y2="{_fmt(y_pix)}" stroke="#333333" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_fmt(_MARGIN_LEFT - 8)}" y="{_fmt(y_pix + 4)}" font-size="11" '
            f'text-anchor="end" font-family="sans-serif">{y_val:.4g}</text>'
        )

    x_label, y_label = axis_labels
    parts.append(
        f'<text x="{_fmt(_MARGIN_LEFT + plot_w / 2)}" y="{_fmt(height - 8)}" font-size="13" '
        f'text-anchor="middle" font-family="sans-serif">{_escape(x_label)}</text>'
    )
    parts.append(
        f'<text x="14" y="{_fmt(_MARGIN_TOP + plot_h / 2)}" font-size="13" text-anchor="middle" '
        f'font-family="sans-serif" transform="rotate(-90 14 {_fmt(_MARGIN_TOP + plot_h / 2)})">'
        f"{_escape(y_label)}</text>"
    )

    for x, y, label in points:
        parts.append(
            f'<circle cx="{_fmt(px(float(x)))}" cy="{_fmt(py(float(y)))}" r="3.5" '
            f'fill="{colors[label]}" fill-opacity="0.8"/>'
        )

    for i, group in enumerate(groups):
        gy = _MARGIN_TOP + 14 + 16 * i
        gx = _MARGIN_LEFT + plot_w - 10
        parts.append(f'<circle cx="{_fmt(gx)}" cy="{_fmt(gy - 4)}" r="4" fill="{colors[group]}"/>')
        parts.append(
            f'<text x="{_fmt(gx - 8)}" y="{_fmt(gy)}" font-size="11" text-anchor="end" '
            f'font-family="sans-serif">{_escape(group)}</text>'
        )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")
    )
