"""Minimal native SVG charts: bars, histograms and line plots with error bars.

No plotting dependency; output is deterministic (no timestamps), so repeated
runs with identical inputs produce identical files.
"""

from __future__ import annotations

import html


class SvgCanvas:
    def __init__(self, width=720, height=420, margin=(60, 20, 30, 50)):
        self.width = width
        self.height = height
        self.m_left, self.m_right, self.m_top, self.m_bottom = margin
        self.parts = []

    @property
    def plot_w(self):
        return self.width - self.m_left - self.m_right

    @property
    def plot_h(self):
        return self.height - self.m_top - self.m_bottom

    def add(self, tag):
        self.parts.append(tag)

    def to_string(self):
        body = "\n".join(self.parts)
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
            f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">\n'
            f'<rect width="{self.width}" height="{self.height}" fill="white"/>\n'
            f"{body}\n</svg>\n"
        )

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_string())


def _fmt(x):
    return f"{x:.6g}"


def _axes(c, x0, x1, y0, y1, xlabel="", ylabel="", title="", n_ticks=5):
    def sx(x):
        return c.m_left + (x - x0) / (x1 - x0 or 1.0) * c.plot_w

    def sy(y):
        return c.m_top + (1.0 - (y - y0) / (y1 - y0 or 1.0)) * c.plot_h

    c.add(f'<rect x="{c.m_left}" y="{c.m_top}" width="{c.plot_w}" '
          f'height="{c.plot_h}" fill="none" stroke="black"/>')
    for i in range(n_ticks + 1):
        xv = x0 + (x1 - x0) * i / n_ticks
        yv = y0 + (y1 - y0) * i / n_ticks
        c.add(f'<line x1="{_fmt(sx(xv))}" y1="{c.m_top + c.plot_h}" '
              f'x2="{_fmt(sx(xv))}" y2="{c.m_top + c.plot_h + 4}" stroke="black"/>')
        c.add(f'<text x="{_fmt(sx(xv))}" y="{c.m_top + c.plot_h + 16}" '
              f'font-size="10" text-anchor="middle">{_fmt(xv)}</text>')
        c.add(f'<line x1="{c.m_left - 4}" y1="{_fmt(sy(yv))}" '
              f'x2="{c.m_left}" y2="{_fmt(sy(yv))}" stroke="black"/>')
        c.add(f'<text x="{c.m_left - 7}" y="{_fmt(sy(yv) + 3)}" font-size="10" '
              f'text-anchor="end">{_fmt(yv)}</text>')
    if title:
        c.add(f'<text x="{c.width / 2}" y="{c.m_top - 6}" font-size="12" '
              f'text-anchor="middle">{html.escape(title)}</text>')
    if xlabel:
        c.add(f'<text x="{c.width / 2}" y="{c.height - 6}" font-size="11" '
              f'text-anchor="middle">{html.escape(xlabel)}</text>')
    if ylabel:
        c.add(f'<text x="14" y="{c.height / 2}" font-size="11" text-anchor="middle" '
              f'transform="rotate(-90 14 {c.height / 2})">{html.escape(ylabel)}</text>')
    return sx, sy


def bar_chart(path, values, errors=None, labels=None, title="", xlabel="",
              ylabel="", color="#4878a8"):
    """Vertical bars with optional symmetric error bars."""
    n = len(values)
    vmax = max([v + (errors[i] if errors else 0.0) for i, v in enumerate(values)] + [1e-9])
    c = SvgCanvas(width=max(720, 16 * n + 120))
    sx, sy = _axes(c, 0, n, 0.0, vmax * 1.05, xlabel, ylabel, title, n_ticks=5)
    bw = c.plot_w / max(n, 1) * 0.8
    for i, v in enumerate(values):
        x = sx(i + 0.1)
        c.add(f'<rect x="{_fmt(x)}" y="{_fmt(sy(v))}" width="{_fmt(bw)}" '
              f'height="{_fmt(sy(0) - sy(v))}" fill="{color}"/>')
        if errors is not None:
            xc = sx(i + 0.5)
            c.add(f'<line x1="{_fmt(xc)}" y1="{_fmt(sy(v - errors[i]))}" '
                  f'x2="{_fmt(xc)}" y2="{_fmt(sy(v + errors[i]))}" stroke="black"/>')
        if labels is not None and n <= 40:
            c.add(f'<text x="{_fmt(sx(i + 0.5))}" y="{c.m_top + c.plot_h + 26}" '
                  f'font-size="8" text-anchor="middle">{html.escape(str(labels[i]))}</text>')
    c.save(path)


def histogram(path, values, bin_width, title="", xlabel="", ylabel="count",
              color="#70a860"):
    import numpy as np

    values = np.asarray(values, dtype=float)
    lo = np.floor(values.min() / bin_width) * bin_width
    hi = np.ceil(values.max() / bin_width) * bin_width
    edges = np.arange(lo, hi + bin_width / 2, bin_width)
    counts, _ = np.histogram(values, bins=edges)
    c = SvgCanvas()
    sx, sy = _axes(c, lo, hi, 0, counts.max() * 1.05 or 1, xlabel, ylabel, title)
    for i, cnt in enumerate(counts):
        if cnt == 0:
            continue
        x = sx(edges[i])
        w = sx(edges[i + 1]) - x
        c.add(f'<rect x="{_fmt(x)}" y="{_fmt(sy(cnt))}" width="{_fmt(w * 0.95)}" '
              f'height="{_fmt(sy(0) - sy(cnt))}" fill="{color}"/>')
    c.save(path)


def line_chart(path, x, series, errors=None, title="", xlabel="", ylabel="",
               colors=("#4878a8", "#a85848", "#70a860", "#8868a8", "#a89848")):
    """Lines with markers; ``series`` maps label -> y array."""
    ymax = 0.0
    ymin = 0.0
    for label, ys in series.items():
        err = errors.get(label) if errors else None
        for i, v in enumerate(ys):
            e = err[i] if err is not None else 0.0
            ymax = max(ymax, v + e)
            ymin = min(ymin, v - e)
    c = SvgCanvas()
    sx, sy = _axes(c, min(x), max(x), ymin, ymax * 1.05 or 1, xlabel, ylabel, title)
    for ci, (label, ys) in enumerate(series.items()):
        col = colors[ci % len(colors)]
        pts = " ".join(f"{_fmt(sx(xv))},{_fmt(sy(yv))}" for xv, yv in zip(x, ys))
        c.add(f'<polyline points="{pts}" fill="none" stroke="{col}" stroke-width="1.5"/>')
        for xv, yv in zip(x, ys):
            c.add(f'<circle cx="{_fmt(sx(xv))}" cy="{_fmt(sy(yv))}" r="3" fill="{col}"/>')
        if errors and label in errors and errors[label] is not None:
            for xv, yv, e in zip(x, ys, errors[label]):
                c.add(f'<line x1="{_fmt(sx(xv))}" y1="{_fmt(sy(yv - e))}" '
                      f'x2="{_fmt(sx(xv))}" y2="{_fmt(sy(yv + e))}" stroke="{col}"/>')
        c.add(f'<text x="{c.m_left + 8}" y="{c.m_top + 14 + 13 * ci}" font-size="10" '
              f'fill="{col}">{html.escape(label)}</text>')
    c.save(path)
