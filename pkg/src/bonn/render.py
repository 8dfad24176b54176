"""Static SVG rendering of grid-world trajectories.

Walls draw as dark cells, the visited path as line segments between
cell centers, and every step that acquired the rich observation as a
filled circle at the position where the decision was taken.  With
discrete options each segment is colored by the option index active
at that step (fixed 9-color palette); the continuous variant uses a
single path color.
"""

from __future__ import annotations

from xml.sax.saxutils import quoteattr

import numpy as np

CELL = 24
MARGIN = 12

PALETTE = ("#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4",
           "#46f0f0", "#f032e6", "#bcf60c", "#008080")

PATH_COLOR = "#1f77b4"
ACQ_COLOR = "#d62728"
WALL_COLOR = "#333333"
GOAL_COLOR = "#2ca02c"


class UnsupportedEnvError(ValueError):
    """Trajectory rendering needs grid positions; some envs have none."""


def _center(pos):
    r, c = pos
    return (MARGIN + c * CELL + CELL / 2.0, MARGIN + r * CELL + CELL / 2.0)


def render_trajectory_svg(episode: dict, walls: np.ndarray, goal=None) -> str:
    """Build a standalone SVG document from one traces.jsonl episode record."""
    if walls is None:
        raise UnsupportedEnvError("no grid geometry: this env cannot be drawn")
    steps = episode.get("steps", [])
    if any("pos" not in s for s in steps):
        raise UnsupportedEnvError("trace has steps without grid positions")

    h, w = walls.shape
    width = 2 * MARGIN + w * CELL
    height = 2 * MARGIN + h * CELL
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    for r in range(h):
        for c in range(w):
            if walls[r, c]:
                parts.append(
                    f'<rect class="wall" x="{MARGIN + c * CELL}" y="{MARGIN + r * CELL}" '
                    f'width="{CELL}" height="{CELL}" fill="{WALL_COLOR}"/>')
    if goal is not None:
        gx, gy = _center(goal)
        parts.append(f'<rect x="{gx - CELL * 0.3:.1f}" y="{gy - CELL * 0.3:.1f}" '
                     f'width="{CELL * 0.6:.1f}" height="{CELL * 0.6:.1f}" '
                     f'fill="{GOAL_COLOR}"/>')

    discrete = any("opt" in s for s in steps)
    current_opt = None
    for i in range(len(steps) - 1):
        x1, y1 = _center(steps[i]["pos"])
        x2, y2 = _center(steps[i + 1]["pos"])
        if discrete:
            current_opt = steps[i].get("opt", current_opt)
            color = PALETTE[current_opt % len(PALETTE)] if current_opt is not None else PATH_COLOR
        else:
            color = PATH_COLOR
        parts.append(f'<line x1="{x1:.1f}" y1="{y1:.1f}" x2="{x2:.1f}" y2="{y2:.1f}" '
                     f'stroke={quoteattr(color)} stroke-width="2.5"/>')

    for s in steps:
        if s.get("sigma") == 1:
            cx, cy = _center(s["pos"])
            parts.append(f'<circle cx="{cx:.1f}" cy="{cy:.1f}" r="{CELL * 0.22:.1f}" '
                         f'fill="{ACQ_COLOR}"/>')
    parts.append("</svg>")
    return "\n".join(parts)
