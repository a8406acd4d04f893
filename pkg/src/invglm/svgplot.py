"""Tiny self-contained SVG emitter: line plots, histograms and vertical markers."""
from __future__ import annotations

from html import escape
from pathlib import Path

import numpy as np

PALETTE = ("#c0392b", "#2471a3", "#1e8449", "#7d3c98", "#b9770e", "#555555")


class Figure:
    def __init__(self, title: str = "", xlabel: str = "", ylabel: str = "",
                 width: int = 640, height: int = 420):
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self.w, self.h = width, height
        self.margin = (60, 20, 40, 50)  # left, right, top, bottom
        self._series = []
        self._bars = []
        self._vlines = []

    def line(self, x, y, label: str = "", color=None):
        self._series.append((np.asarray(x, float), np.asarray(y, float), label, color))
        return self

    def hist(self, counts, edges, color="#999999"):
        self._bars.append((np.asarray(counts, float), np.asarray(edges, float), color))
        return self

    def vline(self, x, label: str = "", color="#c0392b"):
        self._vlines.append((float(x), label, color))
        return self

    def _limits(self):
        xs, ys = [], []
        for x, y, *_ in self._series:
            ok = np.isfinite(x) & np.isfinite(y)
            xs.append(x[ok])
            ys.append(y[ok])
        for counts, edges, _ in self._bars:
            xs.append(edges)
            ys.append(np.append(counts, 0.0))
        xs.append(np.array([v[0] for v in self._vlines]))
        x = np.concatenate(xs) if xs else np.array([0.0, 1.0])
        y = np.concatenate(ys) if ys else np.array([0.0, 1.0])
        x = x[np.isfinite(x)]
        y = y[np.isfinite(y)]
        if x.size == 0:
            x = np.array([0.0, 1.0])
        if y.size == 0:
            y = np.array([0.0, 1.0])
        x0, x1 = float(x.min()), float(x.max())
        y0, y1 = float(min(y.min(), 0.0)), float(y.max())
        if x1 == x0:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 == y0:
            y1 = y0 + 1.0
        return x0, x1, y0, y1 + 0.05 * (y1 - y0)

    def render(self) -> str:
        l, r, t, b = self.margin
        pw, ph = self.w - l - r, self.h - t - b
        x0, x1, y0, y1 = self._limits()

        def px(v):
            return l + (v - x0) / (x1 - x0) * pw

        def py(v):
            return t + ph - (v - y0) / (y1 - y0) * ph

        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w}" height="{self.h}" '
               f'viewBox="0 0 {self.w} {self.h}" font-family="sans-serif" font-size="11">',
               f'<rect width="{self.w}" height="{self.h}" fill="white"/>']
        for counts, edges, color in self._bars:
            for c, e0, e1 in zip(counts, edges[:-1], edges[1:]):
                if c > 0:
                    out.append(f'<rect x="{px(e0):.2f}" y="{py(c):.2f}" width="{max(px(e1) - px(e0), 0.5):.2f}" '
                               f'height="{py(0) - py(c):.2f}" fill="{color}"/>')
        for i, (x, y, label, color) in enumerate(self._series):
            color = color or PALETTE[i % len(PALETTE)]
            ok = np.isfinite(x) & np.isfinite(y)
            pts = " ".join(f"{px(a):.2f},{py(c):.2f}" for a, c in zip(x[ok], y[ok]))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.6"/>')
            if label:
                ly = t + 14 * (i + 1)
                out.append(f'<line x1="{l + pw - 120}" y1="{ly - 4}" x2="{l + pw - 100}" y2="{ly - 4}" '
                           f'stroke="{color}" stroke-width="2"/>')
                out.append(f'<text x="{l + pw - 96}" y="{ly}">{escape(label)}</text>')
        for x, label, color in self._vlines:
            out.append(f'<line x1="{px(x):.2f}" y1="{t}" x2="{px(x):.2f}" y2="{t + ph}" '
                       f'stroke="{color}" stroke-dasharray="4 3"/>')
            if label:
                out.append(f'<text x="{px(x) + 3:.2f}" y="{t + 12}" fill="{color}">{escape(label)}</text>')
        out.append(f'<rect x="{l}" y="{t}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
        for v in np.linspace(x0, x1, 5):
            out.append(f'<text x="{px(v):.2f}" y="{t + ph + 14}" text-anchor="middle">{v:.3g}</text>')
        for v in np.linspace(y0, y1, 5):
            out.append(f'<text x="{l - 4}" y="{py(v) + 4:.2f}" text-anchor="end">{v:.3g}</text>')
        out.append(f'<text x="{l + pw / 2}" y="{self.h - 8}" text-anchor="middle">{escape(self.xlabel)}</text>')
        out.append(f'<text x="14" y="{t + ph / 2}" text-anchor="middle" '
                   f'transform="rotate(-90 14 {t + ph / 2})">{escape(self.ylabel)}</text>')
        out.append(f'<text x="{l + pw / 2}" y="{t - 10}" text-anchor="middle" font-size="13">'
                   f'{escape(self.title)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.render())
