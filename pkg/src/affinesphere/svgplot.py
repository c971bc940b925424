"""Tiny deterministic SVG writers for line plots, heat maps and wireframes.

No external plotting dependency; every float is formatted with %.6g and the
output carries no timestamps or generated ids, so identical inputs produce
byte-identical files.
"""

from __future__ import annotations

import numpy as np

__all__ = ["line_plot", "heatmap", "wireframe"]

_PALETTE = ("#1f5fbf", "#bf3f1f", "#1f8f4f", "#8f1f8f", "#bf8f1f")


def _f(x: float) -> str:
    return f"{float(x):.6g}"


def _svg_open(width, height, title):
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<title>{title}</title>',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]


def _axes(parts, x0, y0, x1, y1, xmin, xmax, ymin, ymax, xlabel, ylabel):
    parts.append(
        f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" '
        f'fill="none" stroke="black" stroke-width="1"/>'
    )
    for k in range(5):
        t = k / 4.0
        xv = xmin + t * (xmax - xmin)
        yv = ymin + t * (ymax - ymin)
        px = x0 + t * (x1 - x0)
        py = y0 - t * (y0 - y1)
        parts.append(
            f'<line x1="{_f(px)}" y1="{y0}" x2="{_f(px)}" y2="{y0 + 4}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{_f(px)}" y="{y0 + 16}" font-size="10" text-anchor="middle">{_f(xv)}</text>'
        )
        parts.append(
            f'<line x1="{x0 - 4}" y1="{_f(py)}" x2="{x0}" y2="{_f(py)}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{x0 - 6}" y="{_f(py + 3)}" font-size="10" text-anchor="end">{_f(yv)}</text>'
        )
    parts.append(
        f'<text x="{(x0 + x1) // 2}" y="{y0 + 32}" font-size="11" text-anchor="middle">{xlabel}</text>'
    )
    parts.append(
        f'<text x="14" y="{(y0 + y1) // 2}" font-size="11" text-anchor="middle" '
        f'transform="rotate(-90 14 {(y0 + y1) // 2})">{ylabel}</text>'
    )


def line_plot(path, series, title="", xlabel="", ylabel="", size=(640, 420)):
    """series: iterable of (xs, ys, label)."""
    width, height = size
    x0, y0, x1, y1 = 56, height - 48, width - 16, 40
    xs_all = np.concatenate([np.asarray(s[0], dtype=float) for s in series])
    ys_all = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    xmin, xmax = float(xs_all.min()), float(xs_all.max())
    ymin, ymax = float(ys_all.min()), float(ys_all.max())
    if xmax == xmin:
        xmax = xmin + 1.0
    if ymax == ymin:
        ymax = ymin + 1.0

    def px(x):
        return x0 + (x - xmin) / (xmax - xmin) * (x1 - x0)

    def py(y):
        return y0 - (y - ymin) / (ymax - ymin) * (y0 - y1)

    parts = _svg_open(width, height, title)
    parts.append(
        f'<text x="{width // 2}" y="20" font-size="13" text-anchor="middle">{title}</text>'
    )
    _axes(parts, x0, y0, x1, y1, xmin, xmax, ymin, ymax, xlabel, ylabel)
    for k, (xs, ys, label) in enumerate(series):
        color = _PALETTE[k % len(_PALETTE)]
        pts = " ".join(
            f"{_f(px(x))},{_f(py(y))}" for x, y in zip(np.asarray(xs), np.asarray(ys))
        )
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        if label:
            ly = 40 + 14 * k
            parts.append(
                f'<line x1="{x1 - 90}" y1="{ly}" x2="{x1 - 70}" y2="{ly}" '
                f'stroke="{color}" stroke-width="1.5"/>'
            )
            parts.append(
                f'<text x="{x1 - 66}" y="{ly + 3}" font-size="10">{label}</text>'
            )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def _diverging_color(t: float) -> str:
    # blue (0) -> white (0.5) -> red (1)
    t = min(max(t, 0.0), 1.0)
    if t < 0.5:
        u = t / 0.5
        r, g, b = int(40 + 215 * u), int(80 + 175 * u), 255
    else:
        u = (t - 0.5) / 0.5
        r, g, b = 255, int(255 - 175 * u), int(255 - 215 * u)
    return f"rgb({r},{g},{b})"


def heatmap(path, values, title="", size=(560, 520)):
    values = np.asarray(values, dtype=float)
    nx, ny = values.shape
    width, height = size
    x0, y1 = 40, 40
    cell_w = (width - 60) / nx
    cell_h = (height - 80) / ny
    vmin, vmax = float(values.min()), float(values.max())
    span = vmax - vmin if vmax > vmin else 1.0
    parts = _svg_open(width, height, title)
    parts.append(
        f'<text x="{width // 2}" y="20" font-size="13" text-anchor="middle">{title}</text>'
    )
    for i in range(nx):
        for j in range(ny):
            t = (values[i, j] - vmin) / span
            parts.append(
                f'<rect x="{_f(x0 + i * cell_w)}" y="{_f(y1 + (ny - 1 - j) * cell_h)}" '
                f'width="{_f(cell_w + 0.5)}" height="{_f(cell_h + 0.5)}" '
                f'fill="{_diverging_color(t)}"/>'
            )
    parts.append(
        f'<text x="{x0}" y="{height - 16}" font-size="10">min {_f(vmin)}  max {_f(vmax)}</text>'
    )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def wireframe(path, X, Y, title="", size=(560, 520), stride=1):
    """Projected surface wireframe: X, Y are (nx, ny) planar coordinates."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    width, height = size
    xmin, xmax = float(X.min()), float(X.max())
    ymin, ymax = float(Y.min()), float(Y.max())
    sx = (width - 60) / (xmax - xmin if xmax > xmin else 1.0)
    sy = (height - 90) / (ymax - ymin if ymax > ymin else 1.0)
    s = min(sx, sy)

    def px(x):
        return 30 + (x - xmin) * s

    def py(y):
        return height - 50 - (y - ymin) * s

    parts = _svg_open(width, height, title)
    parts.append(
        f'<text x="{width // 2}" y="20" font-size="13" text-anchor="middle">{title}</text>'
    )
    nx, ny = X.shape
    for i in range(0, nx, stride):
        pts = " ".join(f"{_f(px(X[i, j]))},{_f(py(Y[i, j]))}" for j in range(ny))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="#1f5fbf" stroke-width="0.7"/>'
        )
    for j in range(0, ny, stride):
        pts = " ".join(f"{_f(px(X[i, j]))},{_f(py(Y[i, j]))}" for i in range(nx))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="#bf3f1f" stroke-width="0.7"/>'
        )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
