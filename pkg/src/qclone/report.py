"""Serialization of tradeoff regions: run manifest, CSV rows and a standalone SVG plot."""
from __future__ import annotations

import datetime as _dt
import os
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from . import __version__
from .tradeoff import MeritKind, TradeoffPoint, corner_points, region_polygon, sample_boundary

__all__ = [
    "RunManifest",
    "utc_timestamp",
    "boundary_rows",
    "format_csv",
    "format_svg",
    "fmt",
]

CSV_COLUMNS = ("x1", "x2", "kind", "source")


def fmt(x: float) -> str:
    """Locale-independent repr with 17 significant digits."""
    return format(float(x), ".17g")


def utc_timestamp() -> str:
    """Current UTC time, or SOURCE_DATE_EPOCH when set (reproducible builds)."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    now = (_dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc) if epoch
           else _dt.datetime.now(_dt.timezone.utc))
    return now.replace(microsecond=0).isoformat().replace("+00:00", "Z")


@dataclass(frozen=True)
class RunManifest:
    command: str
    d: int
    merit: MeritKind
    samples: int
    seed: int
    timestamp: str
    tool_version: str = __version__

    def line(self) -> str:
        return (f"command={self.command} d={self.d} merit={self.merit.label} "
                f"samples={self.samples} seed={self.seed} tool_version={self.tool_version} "
                f"timestamp={self.timestamp}")


def boundary_rows(kind: MeritKind, d: int, n: int) -> list[tuple[TradeoffPoint, str]]:
    rows = [(TradeoffPoint(0.0, 0.0, kind), "origin")]
    rows += [(p, "corner") for p in corner_points(kind, d)]
    rows += [(p, "boundary") for p in sample_boundary(kind, d, n)]
    return rows


def format_csv(manifest: RunManifest, rows) -> str:
    out = [f"# {manifest.line()}", ",".join(CSV_COLUMNS)]
    for p, source in rows:
        out.append(f"{fmt(p.x1)},{fmt(p.x2)},{p.kind.label},{source}")
    return "\n".join(out) + "\n"


_AXIS_NAMES = {
    MeritKind.F: "F",
    MeritKind.ONE: "1",
    MeritKind.TWO: "2",
    MeritKind.INF: "∞",
    MeritKind.DIAMOND: "⋄",
}


def format_svg(manifest: RunManifest, kind: MeritKind, d: int, rows, size: int = 480) -> str:
    """Filled region, sampled boundary, corner markers, labeled axes and the boundary formula."""
    pad_l, pad_r, pad_t, pad_b = 64, 24, 56, 64
    w = size + pad_l + pad_r
    h = size + pad_t + pad_b

    def sx(x):
        return pad_l + x * size

    def sy(y):
        return pad_t + (1 - y) * size

    def pt(x, y):
        return f"{sx(x):.3f},{sy(y):.3f}"

    poly = region_polygon(kind, d, 401)
    region = " ".join(pt(x, y) for x, y in poly)
    curve = " ".join(pt(p.x1, p.x2) for p, src in rows if src == "boundary")
    sup = _AXIS_NAMES[kind]
    parts = [
        f"<!-- {escape(manifest.line())} -->",
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="13">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>',
        f'<text x="{w / 2:.1f}" y="22" text-anchor="middle" font-size="15">'
        f"C^{escape(sup)} for d = {d}</text>",
    ]
    for t in np.linspace(0, 1, 6):
        parts.append(f'<line x1="{sx(t):.3f}" y1="{sy(0):.3f}" x2="{sx(t):.3f}" y2="{sy(1):.3f}" '
                     'stroke="#e6e6e6" stroke-width="1"/>')
        parts.append(f'<line x1="{sx(0):.3f}" y1="{sy(t):.3f}" x2="{sx(1):.3f}" y2="{sy(t):.3f}" '
                     'stroke="#e6e6e6" stroke-width="1"/>')
        parts.append(f'<text x="{sx(t):.3f}" y="{sy(0) + 18:.3f}" text-anchor="middle">{t:.1f}</text>')
        parts.append(f'<text x="{sx(0) - 8:.3f}" y="{sy(t) + 4:.3f}" text-anchor="end">{t:.1f}</text>')
    parts += [
        f'<polygon points="{region}" fill="#9ecae1" fill-opacity="0.6" stroke="none"/>',
        f'<polyline points="{curve}" fill="none" stroke="#08519c" stroke-width="2"/>' if curve else "",
        f'<line x1="{sx(0)}" y1="{sy(0)}" x2="{sx(1)}" y2="{sy(0)}" stroke="black"/>',
        f'<line x1="{sx(0)}" y1="{sy(0)}" x2="{sx(0)}" y2="{sy(1)}" stroke="black"/>',
        f'<text x="{sx(0.5):.3f}" y="{h - 18}" text-anchor="middle">'
        f"d^{escape(sup)}(T₁, id)</text>",
        f'<text x="18" y="{sy(0.5):.3f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {sy(0.5):.3f})">d^{escape(sup)}(T₂, id)</text>',
    ]
    for p, src in rows:
        if src == "corner":
            parts.append(f'<circle cx="{sx(p.x1):.3f}" cy="{sy(p.x2):.3f}" r="4" fill="#cb181d"/>')
    formula = ("boundary: (√x₁+√x₂)²/(d+1) + "
               "(√x₁−√x₂)²/(d−1) = 2/d")
    if kind not in (MeritKind.F, MeritKind.DIAMOND):
        formula += f" in fidelity coordinates x = f^{sup}(merit)"
    parts.append(f'<text x="{w / 2:.1f}" y="40" text-anchor="middle" font-size="11">'
                 f"{escape(formula)}</text>")
    parts.append("</svg>")
    return "\n".join(p for p in parts if p) + "\n"
