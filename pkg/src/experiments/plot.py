"""log-log 선 그래프 SVG 직접 생성"""

import math
from xml.sax.saxutils import escape

from src.experiments.schemas import PlotSeries

WIDTH, HEIGHT = 640, 420
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70, 150, 30, 50
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _positive_points(series: PlotSeries) -> list[tuple[float, float]]:
    return [(x, y) for x, y in zip(series.xs, series.ys) if x > 0 and y > 0 and math.isfinite(y)]


def _decades(lo: float, hi: float) -> list[int]:
    return list(range(math.floor(lo), math.ceil(hi) + 1))


def render_loglog(series: list[PlotSeries], x_label: str, y_label: str, title: str = "") -> str:
    """0 이하 값은 log 축에 놓을 수 없어 건너뛴다"""
    points = [p for s in series for p in _positive_points(s)]
    if not points:
        points = [(1.0, 1.0)]
    lx = [math.log10(x) for x, _ in points]
    ly = [math.log10(y) for _, y in points]
    x_lo, x_hi = min(lx), max(lx)
    y_lo, y_hi = math.floor(min(ly)), math.ceil(max(ly))
    if x_hi - x_lo < 1e-12:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 1, y_hi + 1

    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def sx(v: float) -> float:
        return MARGIN_LEFT + (math.log10(v) - x_lo) / (x_hi - x_lo) * plot_w

    def sy(v: float) -> float:
        return MARGIN_TOP + (y_hi - math.log10(v)) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#333"/>',
    ]
    if title:
        parts.append(f'<text x="{MARGIN_LEFT}" y="{MARGIN_TOP - 10}">{escape(title)}</text>')

    for d in _decades(y_lo, y_hi):
        if y_lo <= d <= y_hi:
            y = sy(10.0**d)
            parts.append(f'<line x1="{MARGIN_LEFT}" y1="{y:.2f}" x2="{MARGIN_LEFT + plot_w}" y2="{y:.2f}" stroke="#ddd"/>')
            parts.append(f'<text x="{MARGIN_LEFT - 8}" y="{y + 4:.2f}" text-anchor="end">1e{d}</text>')
    for d in _decades(x_lo, x_hi):
        if x_lo <= d <= x_hi:
            x = sx(10.0**d)
            parts.append(f'<line x1="{x:.2f}" y1="{MARGIN_TOP}" x2="{x:.2f}" y2="{MARGIN_TOP + plot_h}" stroke="#ddd"/>')
            parts.append(f'<text x="{x:.2f}" y="{MARGIN_TOP + plot_h + 16}" text-anchor="middle">1e{d}</text>')

    parts.append(
        f'<text x="{MARGIN_LEFT + plot_w / 2:.2f}" y="{HEIGHT - 10}" text-anchor="middle">{escape(x_label)}</text>'
    )
    parts.append(
        f'<text x="16" y="{MARGIN_TOP + plot_h / 2:.2f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {MARGIN_TOP + plot_h / 2:.2f})">{escape(y_label)}</text>'
    )

    for index, s in enumerate(series):
        color = COLORS[index % len(COLORS)]
        pts = sorted(_positive_points(s))
        if pts:
            path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
            parts.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
            parts.extend(
                f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="{color}"/>' for x, y in pts
            )
        legend_y = MARGIN_TOP + 16 * (index + 1)
        parts.append(
            f'<line x1="{WIDTH - MARGIN_RIGHT + 12}" y1="{legend_y - 4}" x2="{WIDTH - MARGIN_RIGHT + 32}" '
            f'y2="{legend_y - 4}" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(f'<text x="{WIDTH - MARGIN_RIGHT + 38}" y="{legend_y}">{escape(s.label)}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
