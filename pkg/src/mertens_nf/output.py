"""CSV and single-series SVG writers with byte-stable output."""
from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def emit_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """Write header and rows with minimal RFC 4180 quoting and '\\n' line ends."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
        w.writerow(list(header))
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return path


def _ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-12 * abs(step):
        out.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return out


def emit_svg(path, x, y, title: str = "", xlabel: str = "", ylabel: str = "",
             width: int = 640, height: int = 400) -> Path:
    """Single polyline with axes, ticks and labels; no external assets."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = np.isfinite(x) & np.isfinite(y)
    x, y = x[ok], y[ok]
    ml, mr, mt, mb = 70, 20, 30, 50
    pw, ph = width - ml - mr, height - mt - mb
    if x.size:
        x0, x1 = float(x.min()), float(x.max())
        y0, y1 = float(y.min()), float(y.max())
    else:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def py(v):
        return mt + (y1 - v) / (y1 - y0) * ph

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">',
             f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
             f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
             f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>']
    for t in _ticks(x0, x1):
        X = px(t)
        parts.append(f'<line x1="{X:.2f}" y1="{mt + ph}" x2="{X:.2f}" y2="{mt + ph + 5}" stroke="black"/>')
        parts.append(f'<text x="{X:.2f}" y="{mt + ph + 18}" font-size="11" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1):
        Y = py(t)
        parts.append(f'<line x1="{ml - 5}" y1="{Y:.2f}" x2="{ml}" y2="{Y:.2f}" stroke="black"/>')
        parts.append(f'<text x="{ml - 8}" y="{Y + 4:.2f}" font-size="11" text-anchor="end">{t:g}</text>')
    if y0 < 0 < y1:
        parts.append(f'<line x1="{ml}" y1="{py(0):.2f}" x2="{ml + pw}" y2="{py(0):.2f}" '
                     f'stroke="gray" stroke-dasharray="4 3"/>')
    if x.size:
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        parts.append(f'<polyline fill="none" stroke="steelblue" stroke-width="1.2" points="{pts}"/>')
    if title:
        parts.append(f'<text x="{width / 2:.0f}" y="18" font-size="14" text-anchor="middle">{_esc(title)}</text>')
    if xlabel:
        parts.append(f'<text x="{ml + pw / 2:.0f}" y="{height - 10}" font-size="12" '
                     f'text-anchor="middle">{_esc(xlabel)}</text>')
    if ylabel:
        parts.append(f'<text x="16" y="{mt + ph / 2:.0f}" font-size="12" text-anchor="middle" '
                     f'transform="rotate(-90 16 {mt + ph / 2:.0f})">{_esc(ylabel)}</text>')
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n")
    return path


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


# report-specific layouts

SCAN_HEADER = ("x", "E_K", "in_M_K", "density")
DENSITY_HEADER = ("q", "delta", "poisson_error", "truncation_error", "product_error",
                  "total_budget", "zero_precision_error", "M", "b1", "n_zeros", "low_confidence")


def scan_csv(report, path) -> Path:
    return emit_csv(path, SCAN_HEADER, report.rows())


def scan_svg(report, path, label: str = "") -> Path:
    x = np.log(report.x) if len(report.x) else report.x
    return emit_svg(path, x, report.E_K, title=f"E_K {label}".strip(), xlabel="log x", ylabel="E_K(x)")


def density_rows(q, res):
    return [(q, res.delta, res.poisson_error, res.truncation_error, res.product_error,
             res.total_budget, res.zero_precision_error, res.M, res.b1, res.n_zeros, res.low_confidence)]


def density_csv(q, res, path) -> Path:
    return emit_csv(path, DENSITY_HEADER, density_rows(q, res))
