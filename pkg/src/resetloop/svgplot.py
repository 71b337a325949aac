"""Minimal SVG line plots (log-frequency axes, dB or linear magnitude).

CSV is the authoritative output everywhere; these plots are a convenience
and deliberately avoid heavyweight plotting dependencies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_PALETTE = ["#1f6fb2", "#d1495b", "#3c8d53", "#8d6b94", "#c97b2d", "#444444"]

WIDTH = 720
HEIGHT = 420
MARGIN_L = 70
MARGIN_R = 20
MARGIN_T = 40
MARGIN_B = 50


@dataclass
class Series:
    x: np.ndarray
    y: np.ndarray
    label: str = ""
    dashed: bool = False


@dataclass
class LinePlot:
    title: str
    xlabel: str
    ylabel: str
    xlog: bool = True
    ylog: bool = False
    series: list[Series] = field(default_factory=list)

    def add(self, x, y, label: str = "", dashed: bool = False) -> "LinePlot":
        self.series.append(Series(np.asarray(x, dtype=float),
                                  np.asarray(y, dtype=float), label, dashed))
        return self

    def write(self, path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(self.render())

    # -- rendering ----------------------------------------------------------

    def _transforms(self):
        xs, ys = [], []
        for s in self.series:
            x = np.asarray(s.x, dtype=float)
            y = np.asarray(s.y, dtype=float)
            ok = np.isfinite(x) & np.isfinite(y)
            if self.xlog:
                ok &= x > 0
            if self.ylog:
                ok &= y > 0
            xs.append(x[ok])
            ys.append(y[ok])
        allx = np.concatenate(xs) if xs else np.array([1.0, 10.0])
        ally = np.concatenate(ys) if ys else np.array([0.0, 1.0])
        if allx.size == 0:
            allx = np.array([1.0, 10.0])
        if ally.size == 0:
            ally = np.array([0.0, 1.0])
        fx = np.log10 if self.xlog else (lambda v: v)
        fy = np.log10 if self.ylog else (lambda v: v)
        x0, x1 = float(np.min(fx(allx))), float(np.max(fx(allx)))
        y0, y1 = float(np.min(fy(ally))), float(np.max(fy(ally)))
        if x1 - x0 < 1e-12:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 - y0 < 1e-12:
            y0, y1 = y0 - 0.5, y1 + 0.5
        pad = 0.05 * (y1 - y0)
        y0, y1 = y0 - pad, y1 + pad

        def to_px(xv, yv):
            px = MARGIN_L + (fx(xv) - x0) / (x1 - x0) * (WIDTH - MARGIN_L - MARGIN_R)
            py = HEIGHT - MARGIN_B - (fy(yv) - y0) / (y1 - y0) * (HEIGHT - MARGIN_T - MARGIN_B)
            return px, py

        return to_px, (x0, x1), (y0, y1)

    def _x_ticks(self, lo: float, hi: float):
        if self.xlog:
            lo_dec = math.floor(lo)
            hi_dec = math.ceil(hi)
            return [(10.0**d, f"1e{d:d}") for d in range(lo_dec, hi_dec + 1)
                    if lo <= d <= hi]
        step = _nice_step(hi - lo)
        first = math.ceil(lo / step) * step
        out = []
        v = first
        while v <= hi + 1e-12:
            out.append((v, f"{v:g}"))
            v += step
        return out

    def _y_ticks(self, lo: float, hi: float):
        if self.ylog:
            return [(10.0**d, f"1e{d:d}") for d in range(math.floor(lo), math.ceil(hi) + 1)
                    if lo <= d <= hi]
        step = _nice_step(hi - lo)
        first = math.ceil(lo / step) * step
        out = []
        v = first
        while v <= hi + 1e-12:
            out.append((v, f"{v:g}"))
            v += step
        return out

    def render(self) -> str:
        to_px, (x0, x1), (y0, y1) = self._transforms()
        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH/2}" y="20" text-anchor="middle" font-size="15" '
            f'font-family="sans-serif">{_esc(self.title)}</text>',
        ]
        # axes box
        parts.append(
            f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{WIDTH-MARGIN_L-MARGIN_R}" '
            f'height="{HEIGHT-MARGIN_T-MARGIN_B}" fill="none" stroke="#999"/>'
        )
        # ticks + grid (tick helpers return raw coordinate values)
        y_anchor = 10.0**y0 if self.ylog else y0
        x_anchor = 10.0**x0 if self.xlog else x0
        for xv, lab in self._x_ticks(x0, x1):
            px, _ = to_px(xv, y_anchor)
            parts.append(f'<line x1="{px:.1f}" y1="{MARGIN_T}" x2="{px:.1f}" '
                         f'y2="{HEIGHT-MARGIN_B}" stroke="#eee"/>')
            parts.append(f'<text x="{px:.1f}" y="{HEIGHT-MARGIN_B+16}" text-anchor="middle" '
                         f'font-size="11" font-family="sans-serif">{lab}</text>')
        for yv, lab in self._y_ticks(y0, y1):
            _, py = to_px(x_anchor, yv)
            parts.append(f'<line x1="{MARGIN_L}" y1="{py:.1f}" x2="{WIDTH-MARGIN_R}" '
                         f'y2="{py:.1f}" stroke="#eee"/>')
            parts.append(f'<text x="{MARGIN_L-6}" y="{py+4:.1f}" text-anchor="end" '
                         f'font-size="11" font-family="sans-serif">{lab}</text>')
        # series
        for i, s in enumerate(self.series):
            color = _PALETTE[i % len(_PALETTE)]
            pts = []
            for xv, yv in zip(s.x, s.y):
                if not (np.isfinite(xv) and np.isfinite(yv)):
                    continue
                if self.xlog and xv <= 0:
                    continue
                if self.ylog and yv <= 0:
                    continue
                px, py = to_px(xv, yv)
                pts.append(f"{px:.2f},{py:.2f}")
            dash = ' stroke-dasharray="6 4"' if s.dashed else ""
            if pts:
                parts.append(f'<polyline points="{" ".join(pts)}" fill="none" '
                             f'stroke="{color}" stroke-width="1.6"{dash}/>')
            if s.label:
                ly = MARGIN_T + 16 + 16 * i
                parts.append(f'<line x1="{WIDTH-170}" y1="{ly-4}" x2="{WIDTH-140}" '
                             f'y2="{ly-4}" stroke="{color}" stroke-width="2"{dash}/>')
                parts.append(f'<text x="{WIDTH-134}" y="{ly}" font-size="11" '
                             f'font-family="sans-serif">{_esc(s.label)}</text>')
        parts.append(f'<text x="{WIDTH/2}" y="{HEIGHT-12}" text-anchor="middle" '
                     f'font-size="12" font-family="sans-serif">{_esc(self.xlabel)}</text>')
        parts.append(f'<text x="16" y="{HEIGHT/2}" text-anchor="middle" font-size="12" '
                     f'font-family="sans-serif" transform="rotate(-90 16 {HEIGHT/2})">'
                     f'{_esc(self.ylabel)}</text>')
        parts.append("</svg>")
        return "\n".join(parts)


def _nice_step(span: float) -> float:
    raw = span / 6.0
    mag = 10.0 ** math.floor(math.log10(raw))
    for m in (1.0, 2.0, 5.0, 10.0):
        if raw <= m * mag:
            return m * mag
    return 10.0 * mag


def _esc(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))


def db(values) -> np.ndarray:
    return 20.0 * np.log10(np.abs(np.asarray(values)))
