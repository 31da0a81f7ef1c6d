"""CSV and SVG emission for scenario runs.

All payload files are byte-deterministic for identical inputs; wall-clock
timestamps go only into the run metadata file. Float formatting uses
significant digits controlled by the JAMFTL_CSV_PRECISION environment
variable (default 6).
"""

from __future__ import annotations

import os

import numpy as np

EVENTS_HEADER = ("controller", "run", "time_s", "step_id", "fjm_index",
                 "action", "base_insertion_mm")
FORCES_HEADER = ("controller", "run", "time_s", "phase", "checkpoint",
                 "segment", "force_mN")
LAMBDA_HEADER = ("scenario", "controller", "run", "lambda", "grey_cells",
                 "white_cells", "resolution_mm")


def float_precision() -> int:
    try:
        return max(1, int(os.environ.get("JAMFTL_CSV_PRECISION", "6")))
    except ValueError:
        return 6


def fmt(value) -> str:
    if isinstance(value, float) or isinstance(value, np.floating):
        return f"{value:.{float_precision()}g}"
    return str(value)


def write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path) -> list:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    header = lines[0].split(",")
    return [dict(zip(header, ln.split(","))) for ln in lines[1:]]


def _downsample(cells: np.ndarray, factor: int) -> np.ndarray:
    """Block-wise any() reduction; pads the edges."""
    if factor == 1:
        return cells
    ny, nx = cells.shape
    py = (-ny) % factor
    px = (-nx) % factor
    padded = np.pad(cells, ((0, py), (0, px)))
    return padded.reshape(padded.shape[0] // factor, factor,
                          padded.shape[1] // factor, factor).any(axis=(1, 3))


def _row_runs(mask_row: np.ndarray):
    """(start, stop) index pairs of the true runs in a boolean row."""
    idx = np.flatnonzero(np.diff(np.concatenate(([False], mask_row, [False]))
                                 .astype(np.int8)))
    return zip(idx[::2], idx[1::2])


def sweep_svg(union: np.ndarray, final: np.ndarray, resolution: float,
              lam: float | None = None, title: str = "",
              max_dim: int = 400) -> str:
    """Three-tone sweep image: black background, white for swept-and-vacated
    cells, grey for the final robot footprint."""
    factor = max(1, int(np.ceil(max(union.shape) / max_dim)))
    u = _downsample(union, factor)
    f = _downsample(final, factor)
    white = u & ~f
    ny, nx = u.shape
    cell = resolution * factor
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'width="{fmt(nx * cell)}mm" height="{fmt(ny * cell)}mm" '
        f'viewBox="0 0 {nx} {ny}">',
        f'<rect x="0" y="0" width="{nx}" height="{ny}" fill="black"/>',
    ]
    for color, mask in (("white", white), ("grey", f)):
        parts.append(f'<g fill="{color}">')
        for j in range(ny):
            for start, stop in _row_runs(mask[j]):
                parts.append(f'<rect x="{start}" y="{j}" '
                             f'width="{stop - start}" height="1"/>')
        parts.append("</g>")
    label = title
    if lam is not None:
        label = f"{title} lambda={fmt(lam)}".strip()
    if label:
        parts.append(f'<text x="2" y="{ny - 2}" fill="red" '
                     f'font-size="{max(8, ny // 30)}">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
