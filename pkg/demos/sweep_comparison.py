"""Sweep-error comparison: jamming-assisted insertion vs tendon-only baseline.

Runs both controllers on the same gentle S path, prints the posture error
lambda (swept-and-vacated area over final footprint) and the checkpoint force
table, and writes the two sweep images to a scratch directory.
"""

import tempfile
from pathlib import Path

from jamftl.report import sweep_svg
from jamftl.scenario import scenario_from_dict, simulate_run, summary_table


def main():
    out = Path(tempfile.mkdtemp(prefix="jamftl_sweep_"))
    base = {"trajectory": {"kind": "S", "bend_class": "gentle"}, "runs": 1}
    records = []
    for label, strategy_index in (("jamming-assisted", 1), ("tendon-only", None)):
        sc = scenario_from_dict({**base, "name": "s_gentle",
                                 "controller": "tdcr" if strategy_index is None
                                 else "ftl"})
        rec = simulate_run(sc, strategy_index, run=0)
        records.append(rec)
        svg = out / f"sweep_{rec.controller}.svg"
        svg.write_text(sweep_svg(rec.union_cells, rec.final_cells,
                                 rec.resolution, lam=rec.lam,
                                 title=f"s_gentle {rec.controller}"),
                       encoding="utf-8")
        print(f"{label:17s}: lambda = {rec.lam:.4f} "
              f"({rec.white_cells} white / {rec.grey_cells} grey cells) "
              f"-> {svg.name}")

    print("\npeak mean checkpoint forces (mN), phase II:")
    table = summary_table(records)
    for rec in records:
        cells = [table[("s_gentle", rec.controller, "II", cp)].display
                 for cp in ("bottom", "middle", "top")]
        print(f"  {rec.controller:5s}: bottom {cells[0]:>10s}  "
              f"middle {cells[1]:>10s}  top {cells[2]:>10s}")
    print("\nNT = contact below 1 mN, -- = ring plane never crossed "
          "in that phase.")


if __name__ == "__main__":
    main()
