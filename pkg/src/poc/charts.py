"""Minimal deterministic SVG charts.

Hand-rolled on purpose: identical inputs must produce byte-identical files,
so no timestamps, random ids, or library version drift are allowed in the
output.  Panels are laid out on a fixed grid; each panel draws line or
scatter series with axes, ticks, and a legend.  Non-finite data points are
dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")

PANEL_W = 360
PANEL_H = 280
MARGIN = {"left": 58, "right": 14, "top": 30, "bottom": 42}


@dataclass(frozen=True)
class Series:
    label: str
    xs: tuple
    ys: tuple
    kind: str = "line"  # or "scatter"

    def finite_points(self):
        return [
            (float(x), float(y))
            for x, y in zip(self.xs, self.ys)
            if math.isfinite(float(x)) and math.isfinite(float(y))
        ]


@dataclass(frozen=True)
class Panel:
    title: str
    xlabel: str
    ylabel: str
    series: tuple


def _fmt(v):
    """Fixed short decimal for coordinates: deterministic and compact."""
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _fmt_tick(v):
    return f"{v:.6g}"


def _nice_ticks(lo, hi, target=5):
    """Round tick positions covering [lo, hi] (deterministic)."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return [0.0, 1.0]
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    span = hi - lo
    step = 10.0 ** math.floor(math.log10(span / target))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if span / (step * mult) <= target:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * span:
        ticks.append(round(t / step) * step)
        t += step
    return ticks or [lo, hi]


def _panel_svg(panel: Panel, ox, oy):
    points = [p for s in panel.series for p in s.finite_points()]
    if not points:
        raise DomainError(f"panel {panel.title!r} has no finite data points")
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_lo == x_hi:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_lo == y_hi:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad_x = 0.04 * (x_hi - x_lo)
    pad_y = 0.06 * (y_hi - y_lo)
    x_lo, x_hi = x_lo - pad_x, x_hi + pad_x
    y_lo, y_hi = y_lo - pad_y, y_hi + pad_y

    plot_x = ox + MARGIN["left"]
    plot_y = oy + MARGIN["top"]
    plot_w = PANEL_W - MARGIN["left"] - MARGIN["right"]
    plot_h = PANEL_H - MARGIN["top"] - MARGIN["bottom"]

    def sx(v):
        return plot_x + (v - x_lo) / (x_hi - x_lo) * plot_w

    def sy(v):
        return plot_y + plot_h - (v - y_lo) / (y_hi - y_lo) * plot_h

    out = []
    out.append(
        f'<rect x="{_fmt(plot_x)}" y="{_fmt(plot_y)}" width="{_fmt(plot_w)}" '
        f'height="{_fmt(plot_h)}" fill="none" stroke="#333333" stroke-width="1"/>'
    )
    out.append(
        f'<text x="{_fmt(ox + PANEL_W / 2)}" y="{_fmt(oy + 18)}" text-anchor="middle" '
        f'font-size="13" font-family="sans-serif">{_escape(panel.title)}</text>'
    )
    for t in _nice_ticks(x_lo, x_hi):
        if t < x_lo or t > x_hi:
            continue
        px = sx(t)
        out.append(
            f'<line x1="{_fmt(px)}" y1="{_fmt(plot_y + plot_h)}" x2="{_fmt(px)}" '
            f'y2="{_fmt(plot_y + plot_h + 4)}" stroke="#333333" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_fmt(px)}" y="{_fmt(plot_y + plot_h + 16)}" text-anchor="middle" '
            f'font-size="10" font-family="sans-serif">{_fmt_tick(t)}</text>'
        )
    for t in _nice_ticks(y_lo, y_hi):
        if t < y_lo or t > y_hi:
            continue
        py = sy(t)
        out.append(
            f'<line x1="{_fmt(plot_x - 4)}" y1="{_fmt(py)}" x2="{_fmt(plot_x)}" '
            f'y2="{_fmt(py)}" stroke="#333333" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_fmt(plot_x - 6)}" y="{_fmt(py + 3)}" text-anchor="end" '
            f'font-size="10" font-family="sans-serif">{_fmt_tick(t)}</text>'
        )
    out.append(
        f'<text x="{_fmt(plot_x + plot_w / 2)}" y="{_fmt(oy + PANEL_H - 8)}" '
        f'text-anchor="middle" font-size="11" font-family="sans-serif">'
        f"{_escape(panel.xlabel)}</text>"
    )
    out.append(
        f'<text x="{_fmt(ox + 14)}" y="{_fmt(plot_y + plot_h / 2)}" text-anchor="middle" '
        f'font-size="11" font-family="sans-serif" '
        f'transform="rotate(-90 {_fmt(ox + 14)} {_fmt(plot_y + plot_h / 2)})">'
        f"{_escape(panel.ylabel)}</text>"
    )
    for i, s in enumerate(panel.series):
        color = PALETTE[i % len(PALETTE)]
        pts = s.finite_points()
        if not pts:
            continue
        if s.kind == "line":
            path = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in pts)
            out.append(
                f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>'
            )
        else:
            for x, y in pts:
                out.append(
                    f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="3" fill="{color}"/>'
                )
        ly = plot_y + 12 + 13 * i
        out.append(
            f'<line x1="{_fmt(plot_x + plot_w - 52)}" y1="{_fmt(ly - 3)}" '
            f'x2="{_fmt(plot_x + plot_w - 40)}" y2="{_fmt(ly - 3)}" stroke="{color}" '
            f'stroke-width="2"/>'
        )
        out.append(
            f'<text x="{_fmt(plot_x + plot_w - 36)}" y="{_fmt(ly)}" font-size="9" '
            f'font-family="sans-serif">{_escape(s.label)}</text>'
        )
    return out


def _escape(text):
    return (
        str(text)
        .replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def render_figure(panels: Sequence[Panel], columns: int = 2) -> str:
    """Self-contained SVG document laying panels out on a fixed grid."""
    if not panels:
        raise DomainError("a figure needs at least one panel")
    columns = max(1, min(columns, len(panels)))
    rows = (len(panels) + columns - 1) // columns
    width = columns * PANEL_W
    height = rows * PANEL_H
    body = []
    for i, panel in enumerate(panels):
        ox = (i % columns) * PANEL_W
        oy = (i // columns) * PANEL_H
        body.extend(_panel_svg(panel, ox, oy))
    content = "\n".join(body)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>\n'
        f"{content}\n</svg>\n"
    )
