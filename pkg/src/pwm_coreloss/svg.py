"""Tiny deterministic SVG emitter: axes, polylines and bars.

Output depends only on the data, so identical runs give identical bytes.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 400
MARGIN = 60
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def _f(x: float) -> str:
    return f"{x:.2f}"


class _Frame:
    def __init__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        self.x0, self.x1 = float(np.min(x)), float(np.max(x))
        self.y0, self.y1 = float(min(np.min(y), 0.0)), float(np.max(y))
        if self.x1 == self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 == self.y0:
            self.y1 = self.y0 + 1.0

    def px(self, x):
        return MARGIN + (np.asarray(x) - self.x0) / (self.x1 - self.x0) * (WIDTH - 2 * MARGIN)

    def py(self, y):
        return HEIGHT - MARGIN - (np.asarray(y) - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2 * MARGIN)


def _axes(fr: _Frame, title: str, xlabel: str, ylabel: str) -> list[str]:
    x_axis_y = _f(float(fr.py(max(fr.y0, 0.0))))
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{MARGIN}" y1="{x_axis_y}" x2="{WIDTH - MARGIN}" y2="{x_axis_y}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-size="16">{escape(title)}</text>',
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 16}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
        f'<text x="16" y="{HEIGHT / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {HEIGHT / 2})">{escape(ylabel)}</text>',
        f'<text x="{MARGIN}" y="{HEIGHT - MARGIN + 16}" font-size="10">{fr.x0:.4g}</text>',
        f'<text x="{WIDTH - MARGIN}" y="{HEIGHT - MARGIN + 16}" text-anchor="end" font-size="10">{fr.x1:.4g}</text>',
        f'<text x="{MARGIN - 4}" y="{HEIGHT - MARGIN}" text-anchor="end" font-size="10">{fr.y0:.4g}</text>',
        f'<text x="{MARGIN - 4}" y="{MARGIN}" text-anchor="end" font-size="10">{fr.y1:.4g}</text>',
    ]
    return out


def _decimate(x: np.ndarray, y: np.ndarray, limit: int = 4000):
    if x.size <= limit:
        return x, y
    step = int(np.ceil(x.size / limit))
    return x[::step], y[::step]


def line_plot(path, curves, title: str = "", xlabel: str = "", ylabel: str = "") -> None:
    """``curves`` is a sequence of ``(x, y, label)``."""
    xs = np.concatenate([np.asarray(c[0], dtype=float) for c in curves])
    ys = np.concatenate([np.asarray(c[1], dtype=float) for c in curves])
    fr = _Frame(xs, ys)
    out = _axes(fr, title, xlabel, ylabel)
    for k, (x, y, label) in enumerate(curves):
        x, y = _decimate(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        pts = " ".join(f"{_f(a)},{_f(b)}" for a, b in zip(fr.px(x), fr.py(y)))
        color = COLORS[k % len(COLORS)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>')
        out.append(f'<text x="{WIDTH - MARGIN}" y="{MARGIN + 14 * k}" text-anchor="end" font-size="11" '
                   f'fill="{color}">{escape(label)}</text>')
    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")


def stacked_bars(path, labels, series, names, title: str = "", xlabel: str = "", ylabel: str = "") -> None:
    """Stacked bar chart; ``series`` is a list of equal-length value lists."""
    data = np.asarray(series, dtype=float)
    n = data.shape[1]
    totals = data.sum(axis=0)
    fr = _Frame([0, n], np.concatenate([totals, [0.0]]))
    out = _axes(fr, title, xlabel, ylabel)
    width = (WIDTH - 2 * MARGIN) / n * 0.8
    base = np.zeros(n)
    for k, row in enumerate(data):
        color = COLORS[k % len(COLORS)]
        for j in range(n):
            x = float(fr.px(j + 0.1))
            top = float(fr.py(base[j] + row[j]))
            bottom = float(fr.py(base[j]))
            out.append(f'<rect x="{_f(x)}" y="{_f(top)}" width="{_f(width)}" height="{_f(bottom - top)}" fill="{color}"/>')
        base += row
        out.append(f'<text x="{WIDTH - MARGIN}" y="{MARGIN + 14 * k}" text-anchor="end" font-size="11" '
                   f'fill="{color}">{escape(names[k])}</text>')
    for j, lab in enumerate(labels):
        out.append(f'<text x="{_f(float(fr.px(j + 0.5)))}" y="{HEIGHT - MARGIN + 28}" text-anchor="middle" '
                   f'font-size="9">{escape(str(lab))}</text>')
    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")
