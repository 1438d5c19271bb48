"""Matrix text files, CSV/JSON serialization and SVG line charts.

Numbers written to CSV use ``format(x, ".17g")`` so every double survives a
round trip.  JSON uses Python's shortest round-trip ``repr`` for floats and
``null`` for NaN.  Nothing here depends on wall-clock time except the
``metadata`` block a caller chooses to add.
"""
from __future__ import annotations

import csv
import io
import json
import math
import re
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

__all__ = [
    "MatrixParseError",
    "SCHEMA_VERSION",
    "parse_matrix",
    "read_matrix",
    "format_matrix",
    "fmt_num",
    "parse_grid",
    "write_csv",
    "csv_text",
    "json_text",
    "write_json",
    "Series",
    "line_chart_svg",
    "write_text",
]

SCHEMA_VERSION = "1.0"


class MatrixParseError(ValueError):
    """Malformed matrix file."""


_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?(?:/(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)?"
# Either "a", "a+bi" (imaginary part needs its sign) or a bare "bi".
_ENTRY = re.compile(
    rf"^(?:(?P<re>[+-]?{_NUM})(?:(?P<im>[+-](?:{_NUM})?)[ij])?|(?P<im_only>[+-]?(?:{_NUM})?)[ij])$"
)


def _scalar(tok: str) -> float:
    sign = -1.0 if tok.startswith("-") else 1.0
    body = tok.lstrip("+-")
    if body == "":
        return sign
    if "/" in body:
        num, den = body.split("/")
        if float(den) == 0.0:
            raise MatrixParseError(f"zero denominator in {tok!r}")
        # Exact rational first, then a single rounding to double.
        return sign * float(Fraction(num) / Fraction(den))
    return sign * float(body)


def _entry(tok: str, complex_ok: bool) -> complex:
    m = _ENTRY.match(tok)
    if not m:
        raise MatrixParseError(f"cannot parse entry {tok!r}")
    im = m.group("im") if m.group("im") is not None else m.group("im_only")
    if im is not None and not complex_ok:
        raise MatrixParseError(f"complex entry {tok!r} in a real matrix")
    re_part = _scalar(m.group("re")) if m.group("re") is not None else 0.0
    im_part = _scalar(im) if im is not None else 0.0
    return complex(re_part, im_part)


def parse_matrix(text: str) -> np.ndarray:
    """Parse ``"m n real|complex"`` followed by ``m`` rows of ``n`` entries.

    Entries are separated by whitespace or commas.  Real entries may be
    decimals or fractions (``1/3``); complex entries are written ``a+bi``,
    ``a-bi``, ``bi`` or ``i``.  ``#`` starts a comment.
    """
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if not lines:
        raise MatrixParseError("empty matrix file")
    head = lines[0].split()
    if len(head) != 3 or head[2].lower() not in ("real", "complex"):
        raise MatrixParseError(f"bad header {lines[0]!r}; expected 'm n real|complex'")
    try:
        m, n = int(head[0]), int(head[1])
    except ValueError:
        raise MatrixParseError(f"bad dimensions in header {lines[0]!r}") from None
    if m < 1 or n < 1:
        raise MatrixParseError(f"dimensions must be positive, got {m} x {n}")
    complex_ok = head[2].lower() == "complex"
    body = lines[1:]
    if len(body) != m:
        raise MatrixParseError(f"header says {m} rows, found {len(body)}")
    out = np.empty((m, n), dtype=np.complex128)
    for i, line in enumerate(body):
        toks = [t for t in re.split(r"[\s,]+", line) if t]
        if len(toks) != n:
            raise MatrixParseError(f"row {i + 1} has {len(toks)} entries, expected {n}")
        for j, tok in enumerate(toks):
            out[i, j] = _entry(tok, complex_ok)
    if not np.all(np.isfinite(out)):
        raise MatrixParseError("matrix has non-finite entries")
    return out


def read_matrix(path) -> np.ndarray:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise MatrixParseError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        return parse_matrix(text)
    except MatrixParseError as exc:
        raise MatrixParseError(f"{path}: {exc}") from None


def format_matrix(M) -> str:
    """Inverse of :func:`parse_matrix`, full precision."""
    a = np.asarray(M, dtype=np.complex128)
    is_real = not np.any(a.imag)
    lines = [f"{a.shape[0]} {a.shape[1]} {'real' if is_real else 'complex'}"]
    for row in a:
        if is_real:
            lines.append(" ".join(fmt_num(x.real) for x in row))
        else:
            lines.append(" ".join(f"{fmt_num(x.real)}{'+' if x.imag >= 0 else '-'}{fmt_num(abs(x.imag))}i" for x in row))
    return "\n".join(lines) + "\n"


def fmt_num(x) -> str:
    """17 significant digits for floats, ``nan`` / ``inf`` spelled out."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return "" if x is None else str(x)


def parse_grid(text: str) -> list[float]:
    """``start:stop:count`` (inclusive linspace) or a comma list of values."""
    text = text.strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise ValueError
            return np.linspace(start, stop, count).tolist()
        vals = [float(v) for v in text.split(",") if v.strip()]
        if not vals:
            raise ValueError
        return vals
    except ValueError:
        raise ValueError(f"bad grid {text!r}; expected start:stop:count or v1,v2,...") from None


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_num(v) for v in row])
    return buf.getvalue()


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.write_text(csv_text(header, rows), encoding="utf-8", newline="")
    return path


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return None if not math.isfinite(x) else x
    return x


def json_text(payload: Mapping) -> str:
    return json.dumps(_jsonable(payload), indent=2, allow_nan=False) + "\n"


def write_json(path, payload: Mapping) -> Path:
    path = Path(path)
    path.write_text(json_text(payload), encoding="utf-8")
    return path


# -- SVG ---------------------------------------------------------------------

class Series:
    """One named polyline."""

    def __init__(self, name: str, x: Sequence[float], y: Sequence[float]):
        if len(x) != len(y):
            raise ValueError("x and y lengths differ")
        self.name = name
        self.x = [float(v) for v in x]
        self.y = [float(v) for v in y]


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = next(s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw)
    first = math.ceil(lo / step - 1e-9) * step
    out, t = [], first
    while t <= hi + 1e-9 * step:
        out.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return out


def line_chart_svg(series: Sequence[Series], title: str = "", xlabel: str = "", ylabel: str = "",
                   width: int = 800, height: int = 600, log_y: bool = False) -> str:
    """Static line chart with axes, ticks and a legend.

    Each polyline carries ``data-name``, ``data-x`` and ``data-y`` attributes
    holding the plotted values at full precision.
    """
    if not series:
        raise ValueError("no series to plot")
    left, right, top, bottom = 80, 30, 50, 70
    pw, ph = width - left - right, height - top - bottom

    def ty(v):
        return math.log10(v) if log_y else v

    xs = [v for s in series for v in s.x if math.isfinite(v)]
    ys = [ty(v) for s in series for v in s.y if math.isfinite(v) and (v > 0 or not log_y)]
    if not xs or not ys:
        raise ValueError("no finite data to plot")
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    pad = 0.05 * (y1 - y0) if y1 > y0 else 0.5
    y0, y1 = y0 - pad, y1 + pad

    def px(v):
        return left + (v - x0) / (x1 - x0) * pw

    def py(v):
        return top + ph - (ty(v) - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{width / 2:.1f}" y="28" text-anchor="middle" font-size="16">{escape(title)}</text>')
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for t in _ticks(x0, x1):
        X = px(t)
        out.append(f'<line x1="{X:.2f}" y1="{top + ph}" x2="{X:.2f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{top + ph + 20}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1):
        Y = top + ph - (t - y0) / (y1 - y0) * ph
        label = f"{10 ** t:.3g}" if log_y else f"{t:g}"
        out.append(f'<line x1="{left - 5}" y1="{Y:.2f}" x2="{left}" y2="{Y:.2f}" stroke="black"/>')
        out.append(f'<line x1="{left}" y1="{Y:.2f}" x2="{left + pw}" y2="{Y:.2f}" stroke="#e0e0e0"/>')
        out.append(f'<text x="{left - 8}" y="{Y + 4:.2f}" text-anchor="end">{label}</text>')
    if xlabel:
        out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 20}" text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        out.append(f'<text x="20" y="{top + ph / 2:.1f}" text-anchor="middle" '
                   f'transform="rotate(-90 20 {top + ph / 2:.1f})">{escape(ylabel)}</text>')
    for i, s in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(s.x, s.y)
                       if math.isfinite(y) and (y > 0 or not log_y))
        out.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}" '
            f'data-name="{escape(s.name)}" data-x="{" ".join(fmt_num(v) for v in s.x)}" '
            f'data-y="{" ".join(fmt_num(v) for v in s.y)}"/>'
        )
        ly = top + 20 + 18 * i
        out.append(f'<line x1="{left + pw - 170}" y1="{ly}" x2="{left + pw - 140}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw - 132}" y="{ly + 4}">{escape(s.name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_text(path, text: str) -> Path:
    path = Path(path)
    path.write_text(text, encoding="utf-8", newline="")
    return path

