"""Minimal SVG plots of families and envelopes (no external renderer)."""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

WIDTH = 640
MARGIN = 0.05


class Figure:
    def __init__(self, title: str = ""):
        self.title = title
        self.polylines: list[tuple[np.ndarray, str, float, float]] = []
        self.segments: list[tuple[np.ndarray, np.ndarray]] = []
        self.points: list[np.ndarray] = []

    def polyline(self, xy: np.ndarray, color: str = "#1f4e9e", width: float = 2.0, opacity: float = 1.0) -> None:
        xy = np.asarray(xy, dtype=float)
        self.polylines.append((xy, color, width, opacity))

    def lines(self, foot: np.ndarray, direction: np.ndarray) -> None:
        """Family members: lines through ``foot`` along ``direction``."""
        self.segments.append((np.asarray(foot, dtype=float), np.asarray(direction, dtype=float)))

    def _bounds(self):
        pts = [p for p, *_ in self.polylines] + self.points
        data = np.concatenate([p[np.all(np.isfinite(p), axis=-1)] for p in pts]) if pts else np.zeros((1, 2))
        if data.size == 0:
            data = np.zeros((1, 2))
        lo, hi = data.min(axis=0), data.max(axis=0)
        span = np.maximum(hi - lo, 1e-9)
        return lo - MARGIN * span, hi + MARGIN * span

    def render(self) -> str:
        lo, hi = self._bounds()
        span = hi - lo
        height = max(1, int(round(WIDTH * span[1] / span[0])))
        height = min(height, 4 * WIDTH)
        sx, sy = WIDTH / span[0], height / span[1]

        def tx(p):
            return (p[..., 0] - lo[0]) * sx, (hi[1] - p[..., 1]) * sy

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {height}" width="{WIDTH}" height="{height}">',
            f"<title>{escape(self.title)}</title>",
            f'<rect width="{WIDTH}" height="{height}" fill="white"/>',
        ]
        diag = float(np.hypot(*span))
        for foot, direction in self.segments:
            a = foot - diag * direction
            b = foot + diag * direction
            (x1, y1), (x2, y2) = tx(a), tx(b)
            for i in range(foot.shape[0]):
                if np.all(np.isfinite([x1[i], y1[i], x2[i], y2[i]])):
                    out.append(f'<line x1="{x1[i]:.2f}" y1="{y1[i]:.2f}" x2="{x2[i]:.2f}" y2="{y2[i]:.2f}" stroke="#888888" stroke-opacity="0.25" stroke-width="1"/>')
        for xy, color, width, opacity in self.polylines:
            for run in _finite_runs(xy):
                x, y = tx(run)
                pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(x, y))
                out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}" stroke-opacity="{opacity}"/>')
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.render())


def _finite_runs(xy: np.ndarray) -> list[np.ndarray]:
    ok = np.all(np.isfinite(xy), axis=-1)
    runs, start = [], None
    for i, good in enumerate(ok):
        if good and start is None:
            start = i
        if not good and start is not None:
            runs.append(xy[start:i])
            start = None
    if start is not None:
        runs.append(xy[start:])
    return [r for r in runs if len(r) >= 2]


def family_figure(phi: np.ndarray, nu: np.ndarray, curves: Sequence[np.ndarray], title: str = "", every: int = 10) -> Figure:
    """Line family (n = 1) drawn faintly with the envelope curves on top."""
    fig = Figure(title)
    tau = np.stack([-nu[:, 1], nu[:, 0]], axis=-1)
    fig.lines(phi[::every], tau[::every])
    for c in curves:
        fig.polyline(c)
    return fig


def surface_figure(f: np.ndarray, title: str = "", every: int = 5) -> Figure:
    """Projection of an envelope surface sampled on a grid onto the first two axes."""
    fig = Figure(title)
    for i in range(0, f.shape[0], every):
        fig.polyline(f[i, :, :2], width=0.8, opacity=0.6)
    for j in range(0, f.shape[1], every):
        fig.polyline(f[:, j, :2], color="#9e1f4e", width=0.8, opacity=0.6)
    return fig
