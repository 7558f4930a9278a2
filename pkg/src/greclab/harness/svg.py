"""Minimal SVG 1.1 line/marker plots; no plotting dependency."""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=170, top=30, bottom=50)
PALETTE = {"black": "#000000", "blue": "#1f77b4", "orange": "#ff7f0e", "green": "#2ca02c",
           "red": "#d62728", "purple": "#9467bd", "gray": "#7f7f7f"}


@dataclass
class Series:
    label: str
    x: np.ndarray
    y: np.ndarray
    style: str = "line"  # line | circle | star | triangle
    color: str = "black"


def _marker(style: str, cx: float, cy: float, color: str, size: float = 4.5) -> str:
    if style == "circle":
        return f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{size:.1f}" fill="none" stroke="{color}"/>'
    if style == "triangle":
        pts = [(cx, cy - size), (cx - size, cy + size * 0.8), (cx + size, cy + size * 0.8)]
    elif style == "star":
        pts = []
        for k in range(10):
            r = size * 1.3 if k % 2 == 0 else size * 0.55
            a = -math.pi / 2 + k * math.pi / 5
            pts.append((cx + r * math.cos(a), cy + r * math.sin(a)))
    else:
        raise ValueError(f"unknown marker {style!r}")
    path = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
    return f'<polygon points="{path}" fill="{color}" stroke="{color}"/>'


def _ticks(lo: float, hi: float, n: int = 6) -> np.ndarray:
    span = hi - lo or 1.0
    step = 10 ** math.floor(math.log10(span / n))
    for m in (1, 2, 5, 10):
        if span / (step * m) <= n:
            step *= m
            break
    return np.arange(math.ceil(lo / step) * step, hi + 1e-9 * span, step)


def render(series: list[Series], title: str = "", xlabel: str = "lambda",
           ylabel: str = "magnetization") -> str:
    xs = np.concatenate([s.x for s in series])
    ys = np.concatenate([s.y for s in series])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    pad = 0.05 * ((y1 - y0) or 1.0)
    y0, y1 = y0 - pad, y1 + pad
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]
    sx = lambda x: MARGIN["left"] + (x - x0) / ((x1 - x0) or 1.0) * pw
    sy = lambda y: MARGIN["top"] + (y1 - y) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
        'fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        X = sx(t)
        out.append(f'<line x1="{X:.2f}" y1="{MARGIN["top"] + ph}" x2="{X:.2f}" '
                   f'y2="{MARGIN["top"] + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{MARGIN["top"] + ph + 18}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1):
        Y = sy(t)
        out.append(f'<line x1="{MARGIN["left"] - 5}" y1="{Y:.2f}" x2="{MARGIN["left"]}" '
                   f'y2="{Y:.2f}" stroke="black"/>')
        out.append(f'<text x="{MARGIN["left"] - 8}" y="{Y + 4:.2f}" text-anchor="end">{t:.4g}</text>')
    out.append(f'<text x="{MARGIN["left"] + pw / 2}" y="{HEIGHT - 12}" text-anchor="middle">'
               f'{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{MARGIN["top"] + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {MARGIN["top"] + ph / 2})">{escape(ylabel)}</text>')
    if title:
        out.append(f'<text x="{MARGIN["left"] + pw / 2}" y="18" text-anchor="middle">{escape(title)}</text>')

    for s in series:
        color = PALETTE.get(s.color, s.color)
        cls = f'series {s.style}'
        out.append(f'<g class="{cls}" data-label="{escape(s.label)}">')
        if s.style == "line":
            pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(s.x, s.y))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        else:
            out.extend(_marker(s.style, sx(x), sy(y), color) for x, y in zip(s.x, s.y))
        out.append("</g>")

    lx = WIDTH - MARGIN["right"] + 15
    for i, s in enumerate(series):
        ly = MARGIN["top"] + 15 + 20 * i
        color = PALETTE.get(s.color, s.color)
        if s.style == "line":
            out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="1.5"/>')
        else:
            out.append(_marker(s.style, lx + 10, ly, color))
        out.append(f'<text x="{lx + 28}" y="{ly + 4}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
