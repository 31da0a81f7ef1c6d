"""Command-line interface.

Verbs: ``run`` a scenario file, ``compare`` finished run directories,
``verify`` the reproduction suite, ``schema`` for the scenario file schema.
Exit codes: 0 success, 1 validation error, 2 solver failure, 3 verification
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import yaml

from .errors import ScenarioError, SolverFailure
from .report import read_csv, write_csv
from .scenario import SCENARIO_SCHEMA, load_scenario, run_scenario
from .verification import run_verification_suite


def _cmd_run(args) -> int:
    sc = load_scenario(args.scenario)
    print(yaml.safe_dump({"effective_config": sc.effective_config()},
                         sort_keys=False), end="")
    records = run_scenario(sc, out_dir=args.out)
    for r in records:
        print(f"{r.controller} run {r.run_index}: lambda={r.lam:.4f} "
              f"({r.white_cells} white / {r.grey_cells} grey cells)")
    print(f"outputs written to {args.out}")
    return 0


def _load_run_dir(path: Path) -> dict:
    cfg_path = path / "effective_config.yaml"
    if not cfg_path.exists():
        raise ScenarioError(f"{path} is not a run directory "
                            "(missing effective_config.yaml)")
    cfg = yaml.safe_load(cfg_path.read_text(encoding="utf-8"))
    lam_rows = read_csv(path / "lambda.csv") if (path / "lambda.csv").exists() else []
    summary = read_csv(path / "summary.csv") if (path / "summary.csv").exists() else []
    return {"dir": path, "config": cfg, "lambda": lam_rows, "summary": summary}


def _cmd_compare(args) -> int:
    runs = [_load_run_dir(Path(d)) for d in args.dirs]
    trajs = {json.dumps(r["config"]["trajectory"], sort_keys=True) for r in runs}
    if len(trajs) > 1:
        raise ScenarioError("compared runs must share the same trajectory")

    rows = []
    lam_by_dir = {}
    for r in runs:
        lams = [float(x["lambda"]) for x in r["lambda"]] or [float("nan")]
        lam_by_dir[str(r["dir"])] = max(lams)
        rows.append(("lambda_max", str(r["dir"]), f"{max(lams):.6g}"))
    vals = [v for v in lam_by_dir.values() if v == v]
    if len(vals) >= 2 and min(vals) > 0:
        rows.append(("lambda_ratio_max_over_min", "all",
                     f"{max(vals) / min(vals):.6g}"))

    # Side-by-side force summary cells.
    for r in runs:
        for line in r["summary"]:
            for col, val in line.items():
                if col in ("scenario", "checkpoint"):
                    continue
                rows.append((f"force[{line['checkpoint']}][{col}]",
                             str(r["dir"]), val))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "comparison.csv", ("metric", "source", "value"), rows)
    for metric, source, value in rows:
        print(f"{metric:48s} {source}: {value}")
    print(f"comparison written to {out / 'comparison.csv'}")
    return 0


def _cmd_verify(args) -> int:
    if args.suite != "paper":
        raise ScenarioError(f"unknown suite {args.suite!r}; only 'paper'")
    _, checks = run_verification_suite(out_root=args.out)
    failed = 0
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"[{status}] {c.name}: {c.detail}")
        failed += 0 if c.passed else 1
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 0 if failed == 0 else 3


def _cmd_schema(args) -> int:
    print(json.dumps(SCENARIO_SCHEMA, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jamftl",
        description="Quasi-static simulator for a jamming-based "
                    "follow-the-leader continuum robot")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario file")
    p_run.add_argument("--scenario", required=True, help="scenario YAML file")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.set_defaults(func=_cmd_run)

    p_cmp = sub.add_parser("compare", help="compare finished run directories")
    p_cmp.add_argument("--out", required=True, help="output directory")
    p_cmp.add_argument("dirs", nargs="+", help="run directories to compare")
    p_cmp.set_defaults(func=_cmd_compare)

    p_ver = sub.add_parser("verify", help="run the reproduction suite")
    p_ver.add_argument("--suite", default="paper", help="suite name")
    p_ver.add_argument("--out", default=None,
                       help="optional directory for the suite outputs")
    p_ver.set_defaults(func=_cmd_verify)

    p_schema = sub.add_parser("schema", help="print the scenario file schema")
    p_schema.set_defaults(func=_cmd_schema)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
