# engine/report.py
"""
Static SVG panels, one per task (row of U).

Layouts:
    bar          bars over all input dims, a gap, then bars over output dims
    grid:WxH     input block as an H-row, W-column heatmap (image data)
    series:S:W   input block as S series x W lags heatmap (windowed series)

In grid and series layouts the output block is drawn as labeled bars. Cell
and bar colors run linearly from white at 0 to the task color at the block
maximum of that task.
"""
import html
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import regex

from config import Config
from utils.helpers import HelperFunctions
from utils.validators import ValidationError

LAYOUT_PATTERN = regex.compile(r"^(?:(?P<bar>bar)|grid:(?P<w>\d+)x(?P<h>\d+)|series:(?P<s>\d+):(?P<lags>\d+))$")


class LayoutError(ValidationError):
    """Layout does not fit the decomposition's dimensions"""


@dataclass(frozen=True)
class Layout:
    kind: str
    rows: int = 0
    cols: int = 0

    @classmethod
    def parse(cls, text: str, i0: int) -> "Layout":
        match = LAYOUT_PATTERN.match(text.strip())
        if not match:
            raise LayoutError(f"unknown layout {text!r}; use bar, grid:WxH or series:S:W")
        if match.group("bar"):
            return cls("bar")
        if match.group("w"):
            width, height = int(match.group("w")), int(match.group("h"))
            layout = cls("grid", rows=height, cols=width)
        else:
            layout = cls("series", rows=int(match.group("s")), cols=int(match.group("lags")))
        if layout.rows * layout.cols != i0:
            raise LayoutError(f"layout {text} covers {layout.rows * layout.cols} inputs but there are {i0}")
        return layout


class SvgBuilder:
    """Accumulates SVG 1.1 elements"""

    def __init__(self, width: int, height: int, title: str):
        self.width = width
        self.height = height
        self.parts: List[str] = [
            '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
            f'<svg version="1.1" xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">',
            f"<title>{html.escape(title)}</title>",
            f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
        ]

    def rect(self, x: float, y: float, w: float, h: float, fill: str, stroke: Optional[str] = None):
        extra = f' stroke="{stroke}" stroke-width="0.5"' if stroke else ""
        self.parts.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" height="{h:.2f}" fill="{fill}"{extra}/>')

    def line(self, x1: float, y1: float, x2: float, y2: float, stroke: str = "#999999"):
        self.parts.append(f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" stroke="{stroke}" stroke-width="1"/>')

    def text(self, x: float, y: float, content: str, size: int = 10, fill: str = "#333333",
             anchor: str = "start", rotate: bool = False):
        transform = f' transform="rotate(-60 {x:.2f} {y:.2f})"' if rotate else ""
        self.parts.append(
            f'<text x="{x:.2f}" y="{y:.2f}" font-family="sans-serif" font-size="{size}" fill="{fill}" '
            f'text-anchor="{anchor}"{transform}>{html.escape(content)}</text>'
        )

    def group(self, ident: str):
        self.parts.append(f'<g id="{html.escape(ident)}">')

    def end_group(self):
        self.parts.append("</g>")

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def task_color(c: int) -> str:
    palette = Config.COMMUNITY_COLORS
    return palette[c % len(palette)]


def _fraction(values: np.ndarray) -> np.ndarray:
    top = float(values.max()) if values.size else 0.0
    if top <= 0:
        return np.zeros_like(values)
    return values / top


def _bars(svg: SvgBuilder, values: np.ndarray, x: float, y: float, w: float, h: float, color: str,
          labels: Optional[Sequence[str]] = None):
    n = len(values)
    if n == 0:
        return
    fractions = _fraction(values)
    step = w / n
    svg.line(x, y + h, x + w, y + h)
    for i, f in enumerate(fractions):
        bar_h = h * float(f)
        svg.rect(x + i * step + 0.1 * step, y + h - bar_h, 0.8 * step, bar_h,
                 HelperFunctions.blend_hex(color, float(f)))
        if labels is not None and n <= 40:
            svg.text(x + (i + 0.5) * step, y + h + 10, str(labels[i]), size=8, anchor="end", rotate=True)


def _heatmap(svg: SvgBuilder, values: np.ndarray, rows: int, cols: int, x: float, y: float, size: float, color: str):
    grid = _fraction(values).reshape(rows, cols)
    cell = size / max(rows, cols)
    for r in range(rows):
        for c in range(cols):
            svg.rect(x + c * cell, y + r * cell, cell, cell,
                     HelperFunctions.blend_hex(color, float(grid[r, c])), stroke="#eeeeee")


def render_report(U: np.ndarray, i0: int, layout_text: str = "bar",
                  importances: Optional[List[Dict[str, Any]]] = None,
                  input_names: Optional[Sequence[str]] = None,
                  output_names: Optional[Sequence[str]] = None,
                  title: str = "Decomposed tasks") -> Dict[str, Any]:
    """Return {"svg": str, "summary": dict} for the task rows of U"""
    U = np.asarray(U, dtype=np.float64)
    c0, m = U.shape
    j0 = m - i0
    if j0 < 1 or i0 < 1:
        raise LayoutError(f"input block width {i0} does not fit U with {m} columns")
    layout = Layout.parse(layout_text, i0)
    output_names = list(output_names) if output_names else [f"out_{j}" for j in range(j0)]
    if len(output_names) != j0:
        raise LayoutError(f"{len(output_names)} output names for {j0} outputs")
    importance_of = {entry["task"]: entry["importance"] for entry in (importances or [])}

    width = Config.REPORT_PANEL_WIDTH
    panel_h = Config.REPORT_PANEL_HEIGHT
    margin = 40
    svg = SvgBuilder(width, margin + c0 * panel_h, title)
    svg.text(width / 2, 24, title, size=14, anchor="middle")

    panels = []
    for c in range(c0):
        color = task_color(c)
        top = margin + c * panel_h
        inputs, outputs = U[c, :i0], U[c, i0:]
        svg.group(f"task-{c}")
        label = f"Task {c}"
        if c in importance_of:
            label += f"  (importance {importance_of[c]:.4g})"
        svg.text(12, top + 14, label, size=12, fill=color)
        body_y, body_h = top + 24, panel_h - 70
        if layout.kind == "bar":
            in_w = (width - 60) * i0 / (i0 + j0)
            _bars(svg, inputs, 20, body_y, in_w, body_h, color, input_names)
            gap_x = 20 + in_w + 10
            svg.line(gap_x, body_y, gap_x, body_y + body_h, stroke="#666666")
            _bars(svg, outputs, gap_x + 10, body_y, width - gap_x - 30, body_h, color, output_names)
        else:
            size = body_h
            _heatmap(svg, inputs, layout.rows, layout.cols, 20, body_y, size, color)
            _bars(svg, outputs, 40 + size, body_y, width - size - 70, body_h, color, output_names)
        svg.end_group()
        panels.append({
            "task": c,
            "color": color,
            "input_max": float(inputs.max()),
            "output_max": float(outputs.max()),
            "top_inputs": [int(i) for i in np.argsort(-inputs, kind="stable")[:5]],
            "top_outputs": [int(j) for j in np.argsort(-outputs, kind="stable")[:5]],
            "importance": importance_of.get(c),
        })

    summary = {"layout": layout_text, "i0": i0, "j0": j0, "c0": c0, "panels": panels}
    return {"svg": svg.render(), "summary": summary}
