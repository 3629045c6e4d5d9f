"""Deterministic SVG scatter/curve charts for scan output.

Pure string assembly on a fixed 900x600 canvas; byte-identical output for
identical input, no plotting dependencies.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

WIDTH, HEIGHT = 900, 600
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70, 160, 40, 50

CLASS_COLORS = {
    "StronglyLinearlyStable": "#1a9850",
    "LinearlyStable": "#91cf60",
    "SpectrallyStableNotLinear": "#fee08b",
    "Hyperbolic": "#d73027",
    "Unstable": "#fc8d59",
    "Error": "#999999",
}
CURVE_COLORS = ["#000000", "#404040", "#808080"]


@dataclass(frozen=True)
class PlotStyle:
    title: str = ""
    xlabel: str = "x"
    ylabel: str = "y"
    xlim: tuple[float, float] | None = None
    ylim: tuple[float, float] | None = None


def _fnum(x: float) -> str:
    return f"{x:.2f}"


def _tick(x: float) -> str:
    return f"{x:.4g}"


def emit_svg(
    points: Iterable[tuple[float, float, str]],
    curves: Iterable[tuple[str, Sequence[tuple[float, float]]]] = (),
    style: PlotStyle = PlotStyle(),
) -> str:
    """Render class-colored points plus labeled polyline curves.

    ``points`` yields (x, y, class_name); unknown class names fall back to
    the Error color.  An empty point and curve set still produces a valid
    chart with axes and a warning annotation.
    """
    points = list(points)
    curves = [(name, list(path)) for name, path in curves]

    xs = [p[0] for p in points] + [q[0] for _, path in curves for q in path]
    ys = [p[1] for p in points] + [q[1] for _, path in curves for q in path]
    xlim = style.xlim or ((min(xs), max(xs)) if xs else (0.0, 1.0))
    ylim = style.ylim or ((min(ys), max(ys)) if ys else (0.0, 1.0))
    if xlim[0] == xlim[1]:
        xlim = (xlim[0] - 0.5, xlim[1] + 0.5)
    if ylim[0] == ylim[1]:
        ylim = (ylim[0] - 0.5, ylim[1] + 0.5)

    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def px(x: float) -> float:
        return MARGIN_LEFT + (x - xlim[0]) / (xlim[1] - xlim[0]) * plot_w

    def py(y: float) -> float:
        return HEIGHT - MARGIN_BOTTOM - (y - ylim[0]) / (ylim[1] - ylim[0]) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#000000" stroke-width="1"/>',
    ]
    if style.title:
        out.append(
            f'<text x="{WIDTH // 2}" y="24" text-anchor="middle" '
            f'font-family="sans-serif" font-size="16">{style.title}</text>'
        )
    out.append(
        f'<text x="{MARGIN_LEFT + plot_w / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{style.xlabel}</text>'
    )
    out.append(
        f'<text x="18" y="{MARGIN_TOP + plot_h / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 18 {MARGIN_TOP + plot_h / 2:.1f})">{style.ylabel}</text>'
    )
    for i in range(6):
        fx = xlim[0] + i * (xlim[1] - xlim[0]) / 5
        fy = ylim[0] + i * (ylim[1] - ylim[0]) / 5
        out.append(
            f'<line x1="{_fnum(px(fx))}" y1="{HEIGHT - MARGIN_BOTTOM}" '
            f'x2="{_fnum(px(fx))}" y2="{HEIGHT - MARGIN_BOTTOM + 5}" stroke="#000000"/>'
        )
        out.append(
            f'<text x="{_fnum(px(fx))}" y="{HEIGHT - MARGIN_BOTTOM + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{_tick(fx)}</text>'
        )
        out.append(
            f'<line x1="{MARGIN_LEFT - 5}" y1="{_fnum(py(fy))}" '
            f'x2="{MARGIN_LEFT}" y2="{_fnum(py(fy))}" stroke="#000000"/>'
        )
        out.append(
            f'<text x="{MARGIN_LEFT - 8}" y="{_fnum(py(fy) + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{_tick(fy)}</text>'
        )

    if not points and not curves:
        out.append(
            f'<text x="{MARGIN_LEFT + plot_w / 2:.1f}" y="{MARGIN_TOP + plot_h / 2:.1f}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="14" '
            f'fill="#b00000">warning: no data</text>'
        )

    for x, y, cls in points:
        color = CLASS_COLORS.get(cls, CLASS_COLORS["Error"])
        out.append(
            f'<rect x="{_fnum(px(x) - 2)}" y="{_fnum(py(y) - 2)}" width="4" height="4" '
            f'fill="{color}" class="{cls}"/>'
        )

    for i, (name, path) in enumerate(curves):
        if not path:
            continue
        color = CURVE_COLORS[i % len(CURVE_COLORS)]
        coords = " ".join(f"{_fnum(px(x))},{_fnum(py(y))}" for x, y in path)
        out.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="2" class="{name}"/>'
        )
        lx, ly = path[-1]
        out.append(
            f'<text x="{_fnum(px(lx) + 4)}" y="{_fnum(py(ly))}" font-family="sans-serif" '
            f'font-size="12" fill="{color}">{name}</text>'
        )

    seen = sorted({cls for _, _, cls in points})
    legend_x = WIDTH - MARGIN_RIGHT + 14
    for i, cls in enumerate(seen):
        y0 = MARGIN_TOP + 10 + 20 * i
        out.append(
            f'<rect x="{legend_x}" y="{y0}" width="10" height="10" '
            f'fill="{CLASS_COLORS.get(cls, CLASS_COLORS["Error"])}"/>'
        )
        out.append(
            f'<text x="{legend_x + 16}" y="{y0 + 9}" font-family="sans-serif" '
            f'font-size="11">{cls}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
