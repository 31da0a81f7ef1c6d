"""Reproduction suite: the gated checks comparing the jamming-assisted
controller against the tendon-only baseline.

Gates: sweep error lambda <= 0.25 on the standard shapes (target band
0.09-0.2); no-touch at every checkpoint for the gentle single-bend
jamming-assisted run; tendon-only vs jamming-assisted middle-checkpoint
force ratio >= 2 in phase II; relative spread across extension strategies
<= 15%.
"""

from __future__ import annotations

from dataclasses import dataclass

from .environment import CHECKPOINT_LABELS, PHASES
from .metrics import TOUCH_THRESHOLD
from .scenario import Scenario, run_scenario, scenario_from_dict, summary_table

LAMBDA_GATE = 0.25
LAMBDA_BAND = (0.09, 0.2)
FORCE_RATIO_GATE = 2.0
STRATEGY_SPREAD_GATE = 0.15


def suite_scenario(name: str, kind: str, bend_class: str, controller: str,
                   strategy="all", runs: int = 1, **extra) -> Scenario:
    raw = {"name": name,
           "trajectory": {"kind": kind, "bend_class": bend_class},
           "controller": controller, "strategy": strategy, "runs": runs}
    raw.update(extra)
    return scenario_from_dict(raw)


def standard_suite() -> dict:
    """The standard comparison matrix: C/S x gentle/sharp for both
    controllers, plus the spiral shape for the jamming-assisted one."""
    suite = {}
    for kind, bend in (("C", "gentle"), ("C", "sharp"),
                       ("S", "gentle"), ("S", "sharp")):
        key = f"{kind.lower()}_{bend}"
        suite[f"{key}_ftl"] = suite_scenario(f"{key}_ftl", kind, bend, "ftl")
        suite[f"{key}_tdcr"] = suite_scenario(f"{key}_tdcr", kind, bend, "tdcr")
    suite["spiral_gentle_ftl"] = suite_scenario(
        "spiral_gentle_ftl", "spiral", "gentle", "ftl", strategy=1)
    return suite


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def _cell_value(table, scenario, controller, phase, label) -> float:
    cell = table.get((scenario, controller, phase, label))
    if cell is None or cell.mean is None:
        return 0.0
    return cell.mean


def check_lambda_band(results) -> list:
    checks = []
    for key in ("c_gentle_ftl", "s_gentle_ftl", "spiral_gentle_ftl"):
        lam = max(r.lam for r in results[key])
        checks.append(Check(
            name=f"lambda_band[{key}]",
            passed=lam <= LAMBDA_GATE,
            detail=f"lambda={lam:.4f} gate<={LAMBDA_GATE} "
                   f"target_band={LAMBDA_BAND}"))
    return checks


def check_no_touch(results) -> list:
    records = results["c_gentle_ftl"]
    table = summary_table(records)
    worst = 0.0
    for r in records:
        for ph in PHASES:
            for label in CHECKPOINT_LABELS:
                worst = max(worst, _cell_value(table, r.scenario, r.controller,
                                               ph, label))
    return [Check(name="no_touch[c_gentle_ftl]",
                  passed=worst < TOUCH_THRESHOLD,
                  detail=f"max checkpoint force {worst:.3f} mN "
                         f"< {TOUCH_THRESHOLD} mN at all rings/phases")]


def check_force_ordering(results) -> list:
    checks = []
    for key in ("c_gentle", "s_gentle", "s_sharp"):
        ftl_records = results[f"{key}_ftl"]
        tdcr_records = results[f"{key}_tdcr"]
        ftl_table = summary_table(ftl_records)
        tdcr_table = summary_table(tdcr_records)
        scenario_ftl = ftl_records[0].scenario
        scenario_tdcr = tdcr_records[0].scenario
        ftl_peak = max(_cell_value(ftl_table, scenario_ftl, r.controller,
                                   "II", "middle") for r in ftl_records)
        tdcr_peak = _cell_value(tdcr_table, scenario_tdcr, "tdcr", "II",
                                "middle")
        ratio = tdcr_peak / max(ftl_peak, TOUCH_THRESHOLD)
        checks.append(Check(
            name=f"force_ratio[{key}]",
            passed=ratio >= FORCE_RATIO_GATE,
            detail=f"tendon {tdcr_peak:.1f} mN vs jamming-assisted "
                   f"{ftl_peak:.1f} mN, ratio {ratio:.2f} "
                   f">= {FORCE_RATIO_GATE}"))
    return checks


def _relative_spread(values) -> float:
    mean = sum(values) / len(values)
    if max(values) < TOUCH_THRESHOLD:
        return 0.0
    return (max(values) - min(values)) / mean


def check_strategy_invariance(results) -> list:
    checks = []
    for key in ("s_gentle_ftl", "s_sharp_ftl"):
        records = results[key]
        controllers = sorted({r.controller for r in records})
        lam = {c: max(r.lam for r in records if r.controller == c)
               for c in controllers}
        spreads = [_relative_spread([max(lam[c], 1e-6) for c in controllers])
                   if max(lam.values()) > 1e-6 else 0.0]
        table = summary_table(records)
        for ph in PHASES:
            for label in CHECKPOINT_LABELS:
                vals = [_cell_value(table, records[0].scenario, c, ph, label)
                        for c in controllers]
                spreads.append(_relative_spread(vals))
        worst = max(spreads)
        checks.append(Check(
            name=f"strategy_invariance[{key}]",
            passed=worst <= STRATEGY_SPREAD_GATE,
            detail=f"max relative spread across ES1-ES{len(controllers)}: "
                   f"{worst:.3f} <= {STRATEGY_SPREAD_GATE}"))
    return checks


def run_verification_suite(out_root=None, scenarios=None) -> tuple:
    """Run the suite and evaluate every gate.

    Returns (results, checks): results maps suite key -> RunRecord list.
    """
    suite = scenarios or standard_suite()
    results = {}
    for key, sc in suite.items():
        out_dir = None if out_root is None else f"{out_root}/{key}"
        results[key] = run_scenario(sc, out_dir=out_dir)
    checks = (check_lambda_band(results) + check_no_touch(results)
              + check_force_ordering(results)
              + check_strategy_invariance(results))
    return results, checks
