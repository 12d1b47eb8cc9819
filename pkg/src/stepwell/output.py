"""CSV and SVG writers for price curves."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

from .errors import ConfigError

CSV_HEADER = ("s0", "price_spectral", "price_mc", "mc_stderr", "n_terms", "dropped_terms")


@dataclass(frozen=True)
class CurveRow:
    s0: float
    price_spectral: float
    price_mc: Optional[float] = None
    mc_stderr: Optional[float] = None
    n_terms: int = 0
    dropped_terms: int = 0


def fmt_num(v: Optional[float]) -> str:
    return "" if v is None else f"{v:.10g}"


def curve_csv_text(rows: Sequence[CurveRow]) -> str:
    if any(b.s0 <= a.s0 for a, b in zip(rows, rows[1:])):
        raise ValueError("s0 must be strictly increasing across rows")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(
            [fmt_num(r.s0), fmt_num(r.price_spectral), fmt_num(r.price_mc), fmt_num(r.mc_stderr), r.n_terms, r.dropped_terms]
        )
    return buf.getvalue()


def write_curve_csv(rows: Sequence[CurveRow], path) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(curve_csv_text(rows))
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from None


def read_curve_csv(path) -> List[CurveRow]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise ValueError(f"unexpected header {header}")
        rows = []
        for rec in reader:
            opt = lambda s: float(s) if s else None  # noqa: E731
            rows.append(CurveRow(float(rec[0]), float(rec[1]), opt(rec[2]), opt(rec[3]), int(rec[4]), int(rec[5])))
    return rows


def svg_line_chart(
    xs: Sequence[float],
    ys: Sequence[float],
    title: str = "",
    dashed: bool = False,
    width: int = 480,
    height: int = 320,
) -> str:
    """Single-series line chart with bare axes and min/max tick labels."""
    pad = 48
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(0.0, min(ys)), max(ys)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def px(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def py(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
    dash = ' stroke-dasharray="6,4"' if dashed else ""
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{pad}" y="{height - pad + 16}" font-size="11">{x0:.4g}</text>',
        f'<text x="{width - pad}" y="{height - pad + 16}" font-size="11" text-anchor="end">{x1:.4g}</text>',
        f'<text x="{pad - 4}" y="{height - pad}" font-size="11" text-anchor="end">{y0:.4g}</text>',
        f'<text x="{pad - 4}" y="{pad + 4}" font-size="11" text-anchor="end">{y1:.4g}</text>',
        f'<text x="{width / 2}" y="{pad / 2}" font-size="13" text-anchor="middle">{_escape(title)}</text>',
        f'<polyline fill="none" stroke="steelblue" stroke-width="2"{dash} points="{pts}"/>',
        "</svg>",
    ]
    return "\n".join(parts) + "\n"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def write_svg(rows: Iterable[CurveRow], path, title: str = "", dashed: bool = False) -> None:
    rows = list(rows)
    text = svg_line_chart([r.s0 for r in rows], [r.price_spectral for r in rows], title, dashed)
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from None
