"""Sweeping-area error and force-summary tables.

The posture error lambda is the ratio of swept-but-vacated area (white) to
the final robot footprint (grey), computed on planar occupancy grids built
from per-frame capsule footprints of the segments. Force summaries follow
the checkpoint protocol: per segment mean over its full pass of a ring, max
across segments per phase, then mean +/- sample std across repeated runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import RobotConfig

TOUCH_THRESHOLD = 1.0  # mN; below this every run reads "no touch"


@dataclass
class OccupancyGrid:
    """Binary planar grid. ``basis`` (2x3) projects world points onto the
    grid plane; ``origin`` is the plane coordinate of cell (0, 0)."""

    origin: np.ndarray          # (2,), mm
    resolution: float           # mm per cell
    cells: np.ndarray           # bool (ny, nx)
    basis: np.ndarray = field(default_factory=lambda: np.array(
        [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]))

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        self.origin = np.asarray(self.origin, float)
        self.cells = np.asarray(self.cells, bool)
        self.basis = np.asarray(self.basis, float)

    @staticmethod
    def empty(origin, size_mm, resolution, basis=None) -> "OccupancyGrid":
        if resolution <= 0:
            raise ValueError("resolution must be positive")
        ny = int(math.ceil(size_mm[1] / resolution))
        nx = int(math.ceil(size_mm[0] / resolution))
        kwargs = {} if basis is None else {"basis": np.asarray(basis, float)}
        return OccupancyGrid(origin=np.asarray(origin, float),
                             resolution=resolution,
                             cells=np.zeros((ny, nx), bool), **kwargs)

    def count(self) -> int:
        return int(np.count_nonzero(self.cells))

    def project(self, points: np.ndarray) -> np.ndarray:
        return np.atleast_2d(points) @ self.basis.T


def dominant_plane_basis(points: np.ndarray) -> np.ndarray:
    """Best-fit plane of a 3D point cloud as a deterministic (2x3) basis."""
    pts = np.asarray(points, float)
    centered = pts - pts.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    basis = vt[:2]
    # Fix signs so the basis does not flip between near-identical inputs.
    for i in range(2):
        j = int(np.argmax(np.abs(basis[i])))
        if basis[i, j] < 0:
            basis[i] = -basis[i]
    return basis


def grid_for_extent(points: np.ndarray, cfg: RobotConfig, resolution: float,
                    basis=None) -> OccupancyGrid:
    """Empty grid covering the projected extent of ``points`` plus one
    segment diameter of margin on every side."""
    g_basis = dominant_plane_basis(points) if basis is None else np.asarray(basis, float)
    proj = np.atleast_2d(points) @ g_basis.T
    margin = cfg.seg_diameter
    lo = proj.min(axis=0) - margin
    hi = proj.max(axis=0) + margin
    return OccupancyGrid.empty(origin=lo, size_mm=hi - lo,
                               resolution=resolution, basis=g_basis)


def rasterize_footprint(poses, cfg: RobotConfig, grid: OccupancyGrid) -> OccupancyGrid:
    """Footprint of one frame: each segment is a capsule (seg_length chord,
    seg_diameter width) projected onto the grid plane. Returns a new grid
    with the same geometry; raises if any capsule leaves the grid."""
    out = OccupancyGrid(origin=grid.origin.copy(), resolution=grid.resolution,
                        cells=np.zeros_like(grid.cells), basis=grid.basis.copy())
    if not poses:
        return out
    pts = np.array([p.position for p in poses])
    proj = out.project(pts)
    radius = cfg.seg_diameter / 2.0
    _mark_capsules(out, proj, radius)
    return out


def _mark_capsules(grid: OccupancyGrid, proj: np.ndarray, radius: float) -> None:
    """Set cells within ``radius`` of any chord of the projected polyline."""
    res = grid.resolution
    ny, nx = grid.cells.shape
    for a, b in zip(proj[:-1], proj[1:]):
        lo = np.minimum(a, b) - radius
        hi = np.maximum(a, b) + radius
        i0 = int(math.floor((lo[0] - grid.origin[0]) / res))
        j0 = int(math.floor((lo[1] - grid.origin[1]) / res))
        i1 = int(math.ceil((hi[0] - grid.origin[0]) / res)) + 1
        j1 = int(math.ceil((hi[1] - grid.origin[1]) / res)) + 1
        if i0 < 0 or j0 < 0 or i1 > nx or j1 > ny:
            raise ValueError("footprint extends beyond the occupancy grid; "
                             "enlarge the grid instead of clipping")
        xs = grid.origin[0] + (np.arange(i0, i1) + 0.5) * res
        ys = grid.origin[1] + (np.arange(j0, j1) + 0.5) * res
        X, Y = np.meshgrid(xs, ys)
        ab = b - a
        denom = float(ab @ ab)
        if denom < 1e-12:
            d2 = (X - a[0]) ** 2 + (Y - a[1]) ** 2
        else:
            t = ((X - a[0]) * ab[0] + (Y - a[1]) * ab[1]) / denom
            t = np.clip(t, 0.0, 1.0)
            d2 = (X - (a[0] + t * ab[0])) ** 2 + (Y - (a[1] + t * ab[1])) ** 2
        grid.cells[j0:j1, i0:i1] |= d2 <= radius * radius


class FootprintAccumulator:
    """Streaming union of footprint frames; keeps the latest frame separate
    so lambda can be computed without retaining the whole frame history."""

    def __init__(self, grid: OccupancyGrid):
        self.template = grid
        self.union = np.zeros_like(grid.cells)
        self.last = np.zeros_like(grid.cells)
        self.n_frames = 0

    def add(self, poses, cfg: RobotConfig) -> None:
        frame = rasterize_footprint(poses, cfg, self.template)
        self.union |= frame.cells
        self.last = frame.cells
        self.n_frames += 1

    def ftl_error(self) -> float:
        grey = int(np.count_nonzero(self.last))
        if grey == 0:
            raise ValueError("final footprint is empty")
        white = int(np.count_nonzero(self.union & ~self.last))
        return white / grey

    def counts(self) -> tuple:
        grey = int(np.count_nonzero(self.last))
        white = int(np.count_nonzero(self.union & ~self.last))
        return grey, white


def ftl_error(frames) -> float:
    """Sweep error from an explicit frame list: area covered at some point
    but vacated by the final frame, divided by the final frame's area."""
    if not frames:
        raise ValueError("need at least one frame")
    final = frames[-1].cells
    grey = int(np.count_nonzero(final))
    if grey == 0:
        raise ValueError("final footprint is empty")
    union = np.zeros_like(final)
    for f in frames:
        union |= f.cells
    white = int(np.count_nonzero(union & ~final))
    return white / grey


@dataclass
class ForceTrace:
    """Per-run checkpoint force time series with run metadata."""

    scenario: str
    controller: str            # "tdcr" or "ES<n>"
    run_index: int
    # samples: (time_s, phase, checkpoint_label, segment, force_mN)
    samples: list = field(default_factory=list)
    # ring planes crossed at least once, per phase: {(phase, label)}
    observed: set = field(default_factory=set)

    def add(self, time_s, phase, label, segment, force) -> None:
        if force < 0:
            raise ValueError("forces must be non-negative")
        if self.samples and time_s < self.samples[-1][0]:
            raise ValueError("sample times must be non-decreasing")
        self.samples.append((time_s, phase, label, segment, force))
        self.observed.add((phase, label))


@dataclass(frozen=True)
class ForceSummaryCell:
    """One (phase, checkpoint) cell of the summary table."""

    phase: str
    checkpoint: str
    mean: float | None   # None => never observed ("--")
    std: float | None
    display: str         # formatted value, "NT", or "--"


def _phase_checkpoint_value(trace: ForceTrace, phase: str, label: str):
    """Highest per-segment mean force at one ring during one phase, or None
    if the ring plane was never crossed in that phase."""
    per_segment = {}
    for _, ph, lab, seg, force in trace.samples:
        if ph == phase and lab == label:
            per_segment.setdefault(seg, []).append(force)
    if not per_segment:
        return None if (phase, label) not in trace.observed else 0.0
    return max(float(np.mean(v)) for v in per_segment.values())


def summarize_forces(traces, phases=("I", "II", "III"),
                     checkpoints=("bottom", "middle", "top"),
                     touch_threshold: float = TOUCH_THRESHOLD) -> dict:
    """Summary cells keyed by (scenario, controller, phase, checkpoint).

    ``traces`` are the repeated runs; all runs of one condition must share
    scenario and controller metadata. A cell is "NT" when every run stayed
    below the touch threshold and "--" when the ring was not reached.
    """
    groups = {}
    for t in traces:
        groups.setdefault((t.scenario, t.controller), []).append(t)
    table = {}
    for (scenario, controller), runs in groups.items():
        for phase in phases:
            for label in checkpoints:
                values = [_phase_checkpoint_value(r, phase, label) for r in runs]
                if all(v is None for v in values):
                    cell = ForceSummaryCell(phase, label, None, None, "--")
                else:
                    vals = np.array([0.0 if v is None else v for v in values])
                    mean = float(np.mean(vals))
                    std = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
                    if np.all(vals < touch_threshold):
                        cell = ForceSummaryCell(phase, label, mean, std, "NT")
                    else:
                        cell = ForceSummaryCell(phase, label, mean, std,
                                                f"{mean:.1f}±{std:.1f}")
                table[(scenario, controller, phase, label)] = cell
    return table
