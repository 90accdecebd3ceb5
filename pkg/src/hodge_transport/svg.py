"""Minimal SVG heatmaps with a fixed 256-step viridis-like colour table."""
from __future__ import annotations

import numpy as np

# 256 RGB triples, hex encoded
_TABLE_HEX = (
    "44015444025645045745055946075a46085c460a5d460b5e470d60470e61471063471164471365481467481668481769"
    "48186a481a6c481b6d481c6e481d6f481f70482071482173482374482475482576482677482878482979472a7a472c7a"
    "472d7b472e7c472f7d46307e46327e46337f463480453581453781453882443983443a83443b84433d84433e85423f85"
    "4240864241864142874144874045884046883f47883f48893e49893e4a893e4c8a3d4d8a3d4e8a3c4f8a3c508b3b518b"
    "3b528b3a538b3a548c39558c39568c38588c38598c375a8c375b8d365c8d365d8d355e8d355f8d34608d34618d33628d"
    "33638d32648e32658e31668e31678e31688e30698e306a8e2f6b8e2f6c8e2e6d8e2e6e8e2e6f8e2d708e2d718e2c718e"
    "2c728e2c738e2b748e2b758e2a768e2a778e2a788e29798e297a8e297b8e287c8e287d8e277e8e277f8e27808e26818e"
    "26828e26828e25838e25848e25858e24868e24878e23888e23898e238a8d228b8d228c8d228d8d218e8d218f8d21908d"
    "21918c20928c20928c20938c1f948c1f958b1f968b1f978b1f988b1f998a1f9a8a1e9b8a1e9c891e9d891f9e891f9f88"
    "1fa0881fa1881fa1871fa28720a38620a48621a58521a68522a78522a88423a98324aa8325ab8225ac8226ad8127ad81"
    "28ae8029af7f2ab07f2cb17e2db27d2eb37c2fb47c31b57b32b67a34b67935b77937b87838b9773aba763bbb753dbc74"
    "3fbc7340bd7242be7144bf7046c06f48c16e4ac16d4cc26c4ec36b50c46a52c56954c56856c66758c7655ac8645cc863"
    "5ec96260ca6063cb5f65cb5e67cc5c69cd5b6ccd5a6ece5870cf5773d05675d05477d1537ad1517cd2507fd34e81d34d"
    "84d44b86d54989d5488bd6468ed64590d74393d74195d84098d83e9bd93c9dd93ba0da39a2da37a5db36a8db34aadc32"
    "addc30b0dd2fb2dd2db5de2bb8de29bade28bddf26c0df25c2df23c5e021c8e020cae11fcde11dd0e11cd2e21bd5e21a"
    "d8e219dae319dde318dfe318e2e418e5e419e7e419eae51aece51befe51cf1e51df4e61ef6e620f8e621fbe723fde725"
)
COLORMAP = np.array([[int(_TABLE_HEX[i + k:i + k + 2], 16) for k in (0, 2, 4)]
                     for i in range(0, len(_TABLE_HEX), 6)], dtype=int)
NAN_COLOR = "#bfbfbf"


def color_for(value: float, lo: float, hi: float) -> str:
    if not np.isfinite(value):
        return NAN_COLOR
    u = 0.0 if hi <= lo else (value - lo) / (hi - lo)
    r, g, b = COLORMAP[int(round(min(max(u, 0.0), 1.0) * 255))]
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap_svg(grid, x_values, y_values, title: str = "", x_label: str = "t", y_label: str = "d",
                cell: int = 12) -> str:
    """Render ``grid[i, j]`` with rows along ``y_values`` (upwards) and columns along ``x_values``.

    NaN cells are drawn grey.  The output depends only on the inputs.
    """
    z = np.asarray(grid, dtype=float)
    n_y, n_x = z.shape
    finite = z[np.isfinite(z)]
    lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    left, top, bar = 60, 30, 16
    w, h = n_x * cell, n_y * cell
    width, height = left + w + 3 * bar + 70, top + h + 45
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<text x="{left}" y="18">{_escape(title)}</text>',
    ]
    for i in range(n_y):
        y = top + (n_y - 1 - i) * cell
        for j in range(n_x):
            out.append(f'<rect x="{left + j * cell}" y="{y}" width="{cell}" height="{cell}" '
                       f'fill="{color_for(z[i, j], lo, hi)}"/>')
    out.append(f'<text x="{left + w / 2:.1f}" y="{top + h + 30}" text-anchor="middle">{_escape(x_label)}</text>')
    out.append(f'<text x="14" y="{top + h / 2:.1f}" transform="rotate(-90 14 {top + h / 2:.1f})" '
               f'text-anchor="middle">{_escape(y_label)}</text>')
    xs, ys = np.asarray(x_values, dtype=float), np.asarray(y_values, dtype=float)
    if xs.size:
        out.append(f'<text x="{left}" y="{top + h + 14}">{xs[0]:.3g}</text>')
        out.append(f'<text x="{left + w}" y="{top + h + 14}" text-anchor="end">{xs[-1]:.3g}</text>')
    if ys.size:
        out.append(f'<text x="{left - 4}" y="{top + h}" text-anchor="end">{ys[0]:.3g}</text>')
        out.append(f'<text x="{left - 4}" y="{top + 10}" text-anchor="end">{ys[-1]:.3g}</text>')
    # colour bar
    bx = left + w + bar
    steps = 64
    for s in range(steps):
        v = lo + (hi - lo) * s / (steps - 1)
        y = top + h - (s + 1) * h / steps
        out.append(f'<rect x="{bx}" y="{y:.2f}" width="{bar}" height="{h / steps + 0.5:.2f}" '
                   f'fill="{color_for(v, lo, hi)}"/>')
    out.append(f'<text x="{bx + bar + 4}" y="{top + 10}">{hi:.3g}</text>')
    out.append(f'<text x="{bx + bar + 4}" y="{top + h}">{lo:.3g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
