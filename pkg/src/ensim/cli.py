"""Command-line front end.

    ensim run <config>       run a scenario (bundled name or JSON path)
    ensim sweep <config>     run a coverage sweep config
    ensim vectors --count N --seed S   emit crypto test vectors

All artifacts land under --out with fixed filenames. Exit 0 on success,
2 on a config problem (message names the offending field).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import coverage as coverage_mod
from . import crypto, scenarios
from .engine import RunResult, ScenarioConfig, ScenarioError, run_scenario, write_outputs


def _load_config(ref: str) -> dict:
    p = Path(ref)
    if p.exists():
        try:
            return json.loads(p.read_text())
        except json.JSONDecodeError as e:
            raise ScenarioError(f"config {ref!r} is not valid JSON: {e}") from e
    if ref in scenarios.BUILDERS:
        return scenarios.BUILDERS[ref]()
    raise ScenarioError(
        f"config {ref!r} is neither a file nor a bundled scenario "
        f"(bundled: {', '.join(sorted(scenarios.BUILDERS))})"
    )


def _run_sweep(raw: dict, outdir: Path) -> None:
    for key in ("seed", "alphas_sc", "alphas_cd"):
        if key not in raw:
            raise ScenarioError(f"missing required field '{key}' in sweep config")
    reports = coverage_mod.sweep(
        alphas_sc=raw["alphas_sc"],
        alphas_cd=raw["alphas_cd"],
        n=raw.get("n", 10000),
        n_contacts=raw.get("n_contacts", 100000),
        seed=raw["seed"],
        one_sided_quality=raw.get("one_sided_quality", 1.0),
    )
    outdir.mkdir(parents=True, exist_ok=True)
    coverage_mod.write_sweep_csv(reports, outdir / "coverage.csv")
    print(f"sweep: {len(reports)} grid points -> {outdir / 'coverage.csv'}")


def _summarize(result: RunResult) -> None:
    rows = result.notification_rows
    false_pos = sum(1 for r in rows if not r["ground_truth_contact"])
    print(f"scenario {result.config.name}: {len(result.world.events)} scan events, "
          f"{len(result.published)} published keys")
    print(f"notifications: {len(rows)} ({false_pos} with no genuine contact)")
    if result.attacker is not None:
        print(f"attacker: {len(result.attacker.db)} harvested frames, "
              f"{len(result.attacker.plan_log)} relay decisions, "
              f"{len(result.dossiers)} dossiers")


def cmd_run(args) -> int:
    raw = _load_config(args.config)
    outdir = Path(args.out) if args.out else Path("out") / raw.get("name", "run")
    if args.seed is not None:
        raw = dict(raw, seed=args.seed)
    if raw.get("kind", "scenario") == "sweep":
        _run_sweep(raw, outdir)
        return 0
    cfg = ScenarioConfig.from_dict(raw)
    result = run_scenario(cfg)
    write_outputs(result, outdir)
    _summarize(result)
    print(f"artifacts -> {outdir}")
    return 0


def cmd_sweep(args) -> int:
    raw = _load_config(args.config)
    if raw.get("kind") != "sweep":
        raise ScenarioError(f"field 'kind' is {raw.get('kind')!r}, expected 'sweep'")
    if args.seed is not None:
        raw = dict(raw, seed=args.seed)
    outdir = Path(args.out) if args.out else Path("out") / raw.get("name", "sweep")
    _run_sweep(raw, outdir)
    return 0


def cmd_vectors(args) -> int:
    vectors = crypto.generate_test_vectors(args.count, args.seed)
    outdir = Path(args.out) if args.out else Path("out")
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "test_vectors.jsonl"
    with open(path, "w") as fh:
        for v in vectors:
            fh.write(json.dumps(v) + "\n")
    print(f"{len(vectors)} vectors -> {path}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ensim",
        description="Deterministic BLE exposure-notification attack simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario config end to end")
    p_run.add_argument("config", help="bundled scenario name or path to a JSON config")
    p_run.add_argument("--out", help="output directory (default out/<name>)")
    p_run.add_argument("--seed", type=int, help="override the config seed")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a coverage sweep config")
    p_sweep.add_argument("config", help="bundled sweep name or path to a JSON config")
    p_sweep.add_argument("--out", help="output directory (default out/<name>)")
    p_sweep.add_argument("--seed", type=int, help="override the config seed")
    p_sweep.set_defaults(func=cmd_sweep)

    p_vec = sub.add_parser("vectors", help="emit crypto pipeline test vectors")
    p_vec.add_argument("--count", type=int, required=True)
    p_vec.add_argument("--seed", type=int, required=True)
    p_vec.add_argument("--out", help="output directory (default out/)")
    p_vec.set_defaults(func=cmd_vectors)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
