"""Per-layer accuracy curves as standalone SVG files, built from the results CSV alone."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

from .labeling import TASKS

TASK_TITLES = {
    "POS": "part-of-speech",
    "Relation": "presence of a relation with the aspect",
    "Sentiment": "sentiment value",
    "AspectSentiment": "aspect-related sentiment value",
}
CLASS_COLOURS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"]
OVERALL_TEST = "#808080"
OVERALL_TRAIN = "#000000"


@dataclass
class Series:
    label: str
    colour: str
    mean: list[float | None]
    std: list[float | None]


@dataclass
class FigureSeries:
    task: str
    partition: str
    layers: list[str]
    series: list[Series]


def _layer_key(name: str) -> tuple[int, int]:
    if name == "e":
        return (0, 0)
    if name == "h":
        return (1, 0)
    m = re.fullmatch(r"r_(\d+)", name)
    return (2, int(m.group(1))) if m else (3, 0)


def figure_series(rows: Sequence[dict], task: str, partition: str) -> FigureSeries:
    """Class curves plus overall test (grey) and overall train (black) for one partition."""
    layers = sorted({r["layer"] for r in rows if r["task"] == task}, key=_layer_key)
    index = {(r["layer"], r["partition"], r["class"]): r for r in rows if r["task"] == task}

    def pick(part, cls):
        means, stds = [], []
        for layer in layers:
            row = index.get((layer, part, cls))
            means.append(row["mean_acc"] if row else None)
            stds.append(row["std_acc"] if row else None)
        return means, stds

    series = []
    for k, cls in enumerate(TASKS[task]):
        series.append(Series(cls, CLASS_COLOURS[k % len(CLASS_COLOURS)], *pick(partition, cls)))
    series.append(Series("overall (test)", OVERALL_TEST, *pick(partition, "overall")))
    series.append(Series("overall (train)", OVERALL_TRAIN, *pick("train_subset", "overall")))
    return FigureSeries(task, partition, layers, series)


def render_svg(fig: FigureSeries, width: int = 640, height: int = 400) -> str:
    left, right, top, bottom = 60, 170, 40, 50
    pw, ph = width - left - right, height - top - bottom
    n = len(fig.layers)

    def x(i):
        return left + (pw * (i + 0.5) / n if n else 0)

    def y(v):
        return top + ph * (1.0 - v)

    title = f"Accuracy of predicting the {TASK_TITLES.get(fig.task, fig.task)} ({fig.partition}ly predicted test opinions)"
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" font-family="sans-serif" font-size="13" text-anchor="middle">{escape(title)}</text>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for k in range(6):
        v = k / 5
        out.append(f'<line x1="{left - 4}" y1="{y(v):.2f}" x2="{left}" y2="{y(v):.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 7}" y="{y(v) + 4:.2f}" font-family="sans-serif" font-size="11" text-anchor="end">{v:.1f}</text>')
    for i, name in enumerate(fig.layers):
        out.append(f'<line class="xtick" x1="{x(i):.2f}" y1="{top + ph}" x2="{x(i):.2f}" y2="{top + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{x(i):.2f}" y="{top + ph + 17}" font-family="sans-serif" font-size="11" text-anchor="middle">{escape(name)}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 10}" font-family="sans-serif" font-size="12" text-anchor="middle">layer</text>')

    for s_i, s in enumerate(fig.series):
        pts = [(x(i), y(m)) for i, m in enumerate(s.mean) if m is not None]
        out.append(f'<g class="series" data-label="{escape(s.label)}">')
        if len(pts) > 1:
            path = " ".join(f"{px:.2f},{py:.2f}" for px, py in pts)
            out.append(f'<polyline points="{path}" fill="none" stroke="{s.colour}" stroke-width="1.5"/>')
        for i, (m, sd) in enumerate(zip(s.mean, s.std)):
            if m is None:
                continue
            sd = sd or 0.0
            out.append(
                f'<line class="errorbar" data-layer="{escape(fig.layers[i])}" data-mean="{m!r}" data-std="{sd!r}" '
                f'x1="{x(i):.2f}" y1="{y(min(1.0, m + sd)):.2f}" x2="{x(i):.2f}" y2="{y(max(0.0, m - sd)):.2f}" stroke="{s.colour}"/>'
            )
            out.append(f'<circle cx="{x(i):.2f}" cy="{y(m):.2f}" r="2.5" fill="{s.colour}"/>')
        out.append("</g>")
        ly = top + 14 + 18 * s_i
        out.append(f'<line x1="{left + pw + 15}" y1="{ly - 4}" x2="{left + pw + 35}" y2="{ly - 4}" stroke="{s.colour}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 40}" y="{ly}" font-family="sans-serif" font-size="11">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_figures(rows: Sequence[dict], out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    tasks = [t for t in TASKS if any(r["task"] == t for r in rows)]
    for task in tasks:
        for part in ("correct", "incorrect"):
            path = out_dir / f"figure_{task}_{part}.svg"
            path.write_text(render_svg(figure_series(rows, task, part)), encoding="utf-8")
            written.append(path)
    return written
