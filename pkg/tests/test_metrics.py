"""Sweep-error metric and force-summary tables."""

import numpy as np
import pytest

from jamftl import (ForceTrace, JointState, OccupancyGrid, RobotConfig,
                    forward_kinematics, ftl_error, rasterize_footprint,
                    summarize_forces)

CFG = RobotConfig()


def square_frame(grid, i0, j0, size):
    out = OccupancyGrid(origin=grid.origin.copy(), resolution=grid.resolution,
                        cells=np.zeros_like(grid.cells))
    out.cells[j0:j0 + size, i0:i0 + size] = True
    return out


def test_single_frame_has_zero_error():
    grid = OccupancyGrid.empty(origin=(0.0, 0.0), size_mm=(50.0, 50.0),
                               resolution=1.0)
    assert ftl_error([square_frame(grid, 5, 5, 10)]) == 0.0


def test_translated_square_has_unit_error():
    grid = OccupancyGrid.empty(origin=(0.0, 0.0), size_mm=(50.0, 50.0),
                               resolution=1.0)
    frames = [square_frame(grid, 5, 5, 10), square_frame(grid, 25, 5, 10)]
    assert ftl_error(frames) == pytest.approx(1.0)


def test_partial_overlap_error():
    grid = OccupancyGrid.empty(origin=(0.0, 0.0), size_mm=(50.0, 50.0),
                               resolution=1.0)
    # Shift a 10x10 square by half its width: white = 50, grey = 100.
    frames = [square_frame(grid, 5, 5, 10), square_frame(grid, 10, 5, 10)]
    assert ftl_error(frames) == pytest.approx(0.5)


def test_error_requires_frames_and_a_final_footprint():
    grid = OccupancyGrid.empty(origin=(0.0, 0.0), size_mm=(10.0, 10.0),
                               resolution=1.0)
    with pytest.raises(ValueError):
        ftl_error([])
    with pytest.raises(ValueError):
        ftl_error([square_frame(grid, 0, 0, 0)])


def test_capsule_footprint_area():
    # One straight segment: capsule area = L*D + pi*r^2, checked at 2% on a
    # fine grid.
    grid = OccupancyGrid.empty(origin=(-20.0, -20.0), size_mm=(40.0, 60.0),
                               resolution=0.1,
                               basis=[[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    poses = forward_kinematics([JointState()], CFG)
    frame = rasterize_footprint(poses, CFG, grid)
    area = frame.count() * grid.resolution ** 2
    r = CFG.seg_diameter / 2.0
    expected = CFG.seg_length * CFG.seg_diameter + np.pi * r ** 2
    assert area == pytest.approx(expected, rel=0.02)


def test_footprint_must_stay_inside_the_grid():
    grid = OccupancyGrid.empty(origin=(0.0, 0.0), size_mm=(5.0, 5.0),
                               resolution=1.0)
    poses = forward_kinematics([JointState()], CFG)
    with pytest.raises(ValueError):
        rasterize_footprint(poses, CFG, grid)


def make_trace(samples, observed=(), controller="tdcr"):
    t = ForceTrace(scenario="sc", controller=controller, run_index=0)
    for s in samples:
        t.add(*s)
    for key in observed:
        t.observed.add(key)
    return t


def test_summary_statistics_and_labels():
    runs = [
        make_trace([(0.0, "II", "middle", 5, 10.0),
                    (1.0, "II", "middle", 5, 20.0),     # same segment: mean 15
                    (2.0, "II", "middle", 6, 12.0)]),   # peak segment wins
        make_trace([(0.0, "II", "middle", 5, 25.0)]),
    ]
    table = summarize_forces(runs)
    cell = table[("sc", "tdcr", "II", "middle")]
    assert cell.mean == pytest.approx((15.0 + 25.0) / 2)
    assert cell.std == pytest.approx(np.std([15.0, 25.0], ddof=1))
    assert cell.display == f"{cell.mean:.1f}±{cell.std:.1f}"
    # Ring plane never crossed in phase I: no observation at all.
    assert table[("sc", "tdcr", "I", "middle")].display == "--"


def test_summary_no_touch():
    runs = [make_trace([(0.0, "II", "bottom", 3, 0.2)]),
            make_trace([(0.0, "II", "bottom", 3, 0.5)])]
    cell = summarize_forces(runs)[("sc", "tdcr", "II", "bottom")]
    assert cell.display == "NT"
    assert cell.mean is not None and cell.mean < 1.0


def test_observed_crossing_without_force_counts_as_touch_free_zero():
    run = make_trace([], observed={("III", "top")})
    table = summarize_forces([run])
    cell = table[("sc", "tdcr", "III", "top")]
    assert cell.display == "NT" and cell.mean == 0.0


def test_trace_validation():
    t = ForceTrace(scenario="sc", controller="ES1", run_index=0)
    t.add(1.0, "I", "bottom", 2, 5.0)
    with pytest.raises(ValueError):
        t.add(0.5, "I", "bottom", 2, 5.0)   # time went backwards
    with pytest.raises(ValueError):
        t.add(2.0, "I", "bottom", 2, -1.0)  # negative force
    with pytest.raises(ValueError):
        OccupancyGrid.empty(origin=(0, 0), size_mm=(1, 1), resolution=0.0)
