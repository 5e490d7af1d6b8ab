"""SVG rendering of the accuracy comparison and the correlation heat-map."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

import numpy as np


@dataclass
class ChartPalette:
    """Colors and fonts used by every chart."""

    background: str = "#FFFFFF"
    foreground: str = "#000000"
    grid_color: str = "#DDDDDD"
    axis_color: str = "#666666"
    negative_color: str = "#0066CC"
    neutral_color: str = "#FFFFFF"
    positive_color: str = "#CC0000"
    font_family: str = "sans-serif"
    font_size: int = 12
    series_colors: List[str] = field(
        default_factory=lambda: ["#0066CC", "#009900", "#CC6600", "#CC0000", "#666666", "#7A3DB8"]
    )

    def series_color(self, index: int) -> str:
        """Bar color of series ``index`` (cycles through the list)."""
        return self.series_colors[index % len(self.series_colors)]


DEFAULT_PALETTE = ChartPalette()


def _hex_to_rgb(color: str) -> Tuple[int, int, int]:
    color = color.lstrip("#")
    return tuple(int(color[i : i + 2], 16) for i in (0, 2, 4))


def _mix(a: str, b: str, t: float) -> str:
    """Linear blend from color a (t=0) to color b (t=1)."""
    ra, ga, ba = _hex_to_rgb(a)
    rb, gb, bb = _hex_to_rgb(b)
    mixed = (round(ca + (cb - ca) * t) for ca, cb in ((ra, rb), (ga, gb), (ba, bb)))
    return "#" + "".join(f"{c:02X}" for c in mixed)


def _open_svg(width: int, height: int, palette: ChartPalette) -> List[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="{escape(palette.font_family)}" '
        f'font-size="{palette.font_size}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="{palette.background}"/>',
    ]


def _text(x: float, y: float, content: str, palette: ChartPalette, anchor: str = "middle", extra: str = "") -> str:
    return (
        f'<text x="{x:.1f}" y="{y:.1f}" text-anchor="{anchor}" fill="{palette.foreground}"{extra}>'
        f"{escape(content)}</text>"
    )


def grouped_bar_chart(
    groups: Sequence[str],
    series: Sequence[str],
    values: Dict[Tuple[str, str], float],
    title: str,
    palette: Optional[ChartPalette] = None,
    y_label: str = "Accuracy",
) -> str:
    """Bars grouped by model, one bar per data source.

    Args:
        groups: Group labels along the x axis (model families)
        series: Bar labels within each group (sensors and fusion methods)
        values: Value in [0, 1] per (group, series); missing pairs leave a gap
        title: Chart title
        palette: Colors and fonts
        y_label: Y-axis caption

    Returns:
        SVG document text
    """
    palette = palette or DEFAULT_PALETTE
    bar_width, bar_gap, group_gap = 18, 4, 36
    left, right, top, bottom = 70, 180, 50, 60
    plot_height = 300
    group_width = len(series) * (bar_width + bar_gap) - bar_gap
    width = left + right + len(groups) * group_width + max(len(groups) - 1, 0) * group_gap
    height = top + plot_height + bottom

    lines = _open_svg(width, height, palette)
    lines.append(_text(width / 2, 25, title, palette, extra=' font-weight="bold"'))

    for tick in np.linspace(0.0, 1.0, 6):
        y = top + plot_height * (1.0 - tick)
        lines.append(
            f'<line x1="{left}" y1="{y:.1f}" x2="{width - right}" y2="{y:.1f}" stroke="{palette.grid_color}"/>'
        )
        lines.append(_text(left - 8, y + 4, f"{tick:.1f}", palette, anchor="end"))
    lines.append(
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_height}" stroke="{palette.axis_color}"/>'
    )
    lines.append(
        f'<line x1="{left}" y1="{top + plot_height}" x2="{width - right}" y2="{top + plot_height}" '
        f'stroke="{palette.axis_color}"/>'
    )
    lines.append(
        _text(18, top + plot_height / 2, y_label, palette, extra=f' transform="rotate(-90 18 {top + plot_height / 2:.1f})"')
    )

    for g, group in enumerate(groups):
        x0 = left + g * (group_width + group_gap)
        for s, name in enumerate(series):
            value = values.get((group, name))
            if value is None:
                continue
            bar_height = plot_height * min(max(float(value), 0.0), 1.0)
            x = x0 + s * (bar_width + bar_gap)
            y = top + plot_height - bar_height
            lines.append(
                f'<rect x="{x}" y="{y:.1f}" width="{bar_width}" height="{bar_height:.1f}" '
                f'fill="{palette.series_color(s)}"><title>{escape(f"{group} / {name}: {value:.4f}")}</title></rect>'
            )
        lines.append(_text(x0 + group_width / 2, top + plot_height + 20, group, palette))

    legend_x = width - right + 20
    for s, name in enumerate(series):
        y = top + s * 20
        lines.append(f'<rect x="{legend_x}" y="{y}" width="12" height="12" fill="{palette.series_color(s)}"/>')
        lines.append(_text(legend_x + 18, y + 10, name, palette, anchor="start"))

    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def heatmap(
    matrix: np.ndarray,
    labels: Sequence[str],
    title: str,
    palette: Optional[ChartPalette] = None,
) -> str:
    """Cell-colored square matrix with values in [-1, 1] printed in each cell.

    Args:
        matrix: d x d matrix
        labels: Row/column labels
        title: Chart title
        palette: Colors and fonts

    Returns:
        SVG document text
    """
    palette = palette or DEFAULT_PALETTE
    M = np.asarray(matrix, dtype=np.float64)
    d = M.shape[0]
    if M.shape != (d, d) or len(labels) != d:
        raise ValueError("heatmap needs a square matrix with one label per row")

    cell, left, top = 56, 190, 60
    width = left + d * cell + 20
    height = top + d * cell + 190

    lines = _open_svg(width, height, palette)
    lines.append(_text(width / 2, 25, title, palette, extra=' font-weight="bold"'))
    for i in range(d):
        lines.append(_text(left - 8, top + i * cell + cell / 2 + 4, labels[i], palette, anchor="end"))
        x = left + i * cell + cell / 2
        y = top + d * cell + 10
        lines.append(
            _text(x, y, labels[i], palette, anchor="end", extra=f' transform="rotate(-60 {x:.1f} {y:.1f})"')
        )
        for j in range(d):
            value = float(M[i, j])
            if value >= 0:
                fill = _mix(palette.neutral_color, palette.positive_color, min(value, 1.0))
            else:
                fill = _mix(palette.neutral_color, palette.negative_color, min(-value, 1.0))
            lines.append(
                f'<rect x="{left + j * cell}" y="{top + i * cell}" width="{cell}" height="{cell}" '
                f'fill="{fill}" stroke="{palette.background}"/>'
            )
            lines.append(_text(left + j * cell + cell / 2, top + i * cell + cell / 2 + 4, f"{value:.2f}", palette))

    lines.append("</svg>")
    return "\n".join(lines) + "\n"
