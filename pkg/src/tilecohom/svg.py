"""Plain SVG drawings: stacked 1D tilings and planar Voronoi diagrams."""

from __future__ import annotations

from typing import Mapping, Sequence

from .substitution import Tiling1D

_COLORS = ["#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860"]


def tilings_svg(tilings: Sequence[Tiling1D], titles: Sequence[str] | None = None, span: tuple | None = None,
                width: int = 900, row: int = 60) -> str:
    """Tilings drawn one above the other with a tick at every vertex and the
    origin marked."""
    if span is None:
        lo = min(float(T.window[0]) for T in tilings)
        hi = max(float(T.window[1]) for T in tilings)
    else:
        lo, hi = (float(v) for v in span)
    scale = (width - 40) / (hi - lo)

    def X(v: float) -> float:
        return 20 + (v - lo) * scale

    height = row * len(tilings) + 20
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">', '<rect width="100%" height="100%" fill="white"/>']
    for k, T in enumerate(tilings):
        y = 20 + k * row
        if titles:
            parts.append(f'<text x="20" y="{y - 4}" font-size="11" font-family="sans-serif">{titles[k]}</text>')
        alphabet = T.rule.alphabet
        for i in range(len(T)):
            a, b = float(T.lefts[i]), float(T.right(i))
            if b < lo or a > hi:
                continue
            a, b = max(a, lo), min(b, hi)
            color = _COLORS[alphabet.index(T.types[i]) % len(_COLORS)]
            parts.append(f'<rect x="{X(a):.3f}" y="{y + 8}" width="{(b - a) * scale:.3f}" height="14" '
                         f'fill="{color}" fill-opacity="0.55" stroke="black" stroke-width="0.5"/>')
            if (b - a) * scale > 9:
                parts.append(f'<text x="{X((a + b) / 2):.3f}" y="{y + 19}" font-size="9" text-anchor="middle" '
                             f'font-family="sans-serif">{T.types[i]}</text>')
            parts.append(f'<line x1="{X(a):.3f}" y1="{y + 4}" x2="{X(a):.3f}" y2="{y + 26}" stroke="black" '
                         f'stroke-width="0.8"/>')
        parts.append(f'<line x1="{X(0.0):.3f}" y1="{y}" x2="{X(0.0):.3f}" y2="{y + 30}" stroke="red" '
                     f'stroke-width="1.5"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def voronoi_svg(points: Sequence, cells: Mapping, width: int = 600) -> str:
    """Cells as polygons and points as dots; coordinates are Fractions or floats."""
    xs = [float(v[0]) for c in cells.values() for v in c.vertices] + [float(p[0]) for p in points]
    ys = [float(v[1]) for c in cells.values() for v in c.vertices] + [float(p[1]) for p in points]
    lo_x, hi_x, lo_y, hi_y = min(xs), max(xs), min(ys), max(ys)
    scale = (width - 20) / max(hi_x - lo_x, hi_y - lo_y, 1e-9)
    height = int((hi_y - lo_y) * scale) + 20

    def P(x, y):
        return 10 + (float(x) - lo_x) * scale, height - 10 - (float(y) - lo_y) * scale

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">', '<rect width="100%" height="100%" fill="white"/>']
    for i in sorted(cells):
        pts = " ".join("{:.3f},{:.3f}".format(*P(x, y)) for x, y in cells[i].vertices)
        parts.append(f'<polygon points="{pts}" fill="none" stroke="#4c72b0" stroke-width="1"/>')
    for p in points:
        x, y = P(p[0], p[1])
        parts.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="2" fill="black"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def series_svg(series: Mapping[str, Sequence[tuple[float, float]]], title: str = "", logx: bool = False,
               logy: bool = False, width: int = 600, height: int = 360) -> str:
    """Line plot of named (x, y) series; non-positive values are dropped on log axes."""
    import math

    def tx(v):
        return math.log10(v) if logx else v

    def ty(v):
        return math.log10(v) if logy else v

    clean = {name: [(tx(x), ty(y)) for x, y in pts if (x > 0 or not logx) and (y > 0 or not logy)]
             for name, pts in series.items()}
    allp = [p for pts in clean.values() for p in pts] or [(0.0, 0.0)]
    x0, x1 = min(p[0] for p in allp), max(p[0] for p in allp)
    y0, y1 = min(p[1] for p in allp), max(p[1] for p in allp)
    x1, y1 = (x1 if x1 > x0 else x0 + 1), (y1 if y1 > y0 else y0 + 1)

    def P(x, y):
        return 50 + (x - x0) / (x1 - x0) * (width - 70), height - 40 - (y - y0) / (y1 - y0) * (height - 70)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">', '<rect width="100%" height="100%" fill="white"/>',
             f'<text x="50" y="18" font-size="12" font-family="sans-serif">{title}</text>',
             f'<line x1="50" y1="{height - 40}" x2="{width - 20}" y2="{height - 40}" stroke="black"/>',
             f'<line x1="50" y1="30" x2="50" y2="{height - 40}" stroke="black"/>']
    for k, (name, pts) in enumerate(clean.items()):
        color = _COLORS[k % len(_COLORS)]
        if pts:
            path = " ".join("{:.3f},{:.3f}".format(*P(x, y)) for x, y in pts)
            parts.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
            for x, y in pts:
                cx, cy = P(x, y)
                parts.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="2.5" fill="{color}"/>')
        parts.append(f'<text x="{width - 150}" y="{40 + 14 * k}" font-size="11" fill="{color}" '
                     f'font-family="sans-serif">{name}</text>')
    axes = f"x{' (log10)' if logx else ''}: [{x0:.4g}, {x1:.4g}]  y{' (log10)' if logy else ''}: [{y0:.4g}, {y1:.4g}]"
    parts.append(f'<text x="50" y="{height - 15}" font-size="10" font-family="sans-serif">{axes}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
