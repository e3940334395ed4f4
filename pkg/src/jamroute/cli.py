"""Command-line interface.

Subcommands: ``generate`` draws and saves a topology, ``plan`` optimizes
both route modes on one seed, ``sweep`` runs the configured grid, ``oracle``
cross-checks the planner against brute force on a small instance, and
``validate-mc`` compares the closed-form outage to Monte Carlo sampling.
Reports render matplotlib figures next to their data files unless
``--no-figures`` is given.

Exit codes: 0 success, 1 configuration or generation error, 2 nothing
feasible, 3 validation mismatch (oracle or MC).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path
from typing import Optional

from .errors import ConfigurationError, GenerationError, OracleSizeError
from .experiment import (
    ExperimentConfig,
    build_topology,
    resolve_config,
    run_mc_validation,
    run_single,
    run_sweep,
)
from .planner import brute_force_plan, plan_with_vehicle, plan_without_vehicle
from .topology import save_topology

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INFEASIBLE = 2
EXIT_MISMATCH = 3


def _add_common(sub: argparse.ArgumentParser, *, seed: bool = True, pmax: bool = False) -> None:
    sub.add_argument("--config", required=True, help="config file path or bundled config name")
    sub.add_argument("--out", default=None, help="output directory (default: config output_dir)")
    sub.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    if seed:
        sub.add_argument("--seed", type=int, default=None, help="override the config seed list")
    if pmax:
        sub.add_argument(
            "--pmax-infinite",
            action="store_true",
            help="lift the transmit power cap for planning",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jamroute",
        description="Minimum-energy routing around jammers, with and without a relay vehicle.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("generate", help="draw a topology and save it"))
    _add_common(sub.add_parser("plan", help="plan vehicle and baseline routes"), pmax=True)
    _add_common(sub.add_parser("sweep", help="run the configured sweep grid"), seed=False, pmax=True)
    oracle = sub.add_parser("oracle", help="check the planner against brute force")
    _add_common(oracle)
    oracle.add_argument("--max-hops", type=int, default=None, help="cap on total hop count")
    mc = sub.add_parser("validate-mc", help="Monte Carlo check of the outage model")
    _add_common(mc)
    mc.add_argument("--samples", type=int, default=1_000_000, help="MC samples per link")
    mc.add_argument("--links", type=int, default=50, help="number of random links")
    return parser


def _load(args: argparse.Namespace) -> ExperimentConfig:
    config = resolve_config(args.config)
    if getattr(args, "seed", None) is not None:
        config = dataclasses.replace(config, seeds=(args.seed,))
    if getattr(args, "pmax_infinite", False):
        config = dataclasses.replace(config, pmax_infinite=True)
    return config


def _out_dir(args: argparse.Namespace, config: ExperimentConfig) -> Path:
    out = Path(args.out if args.out is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_generate(args: argparse.Namespace) -> int:
    config = _load(args)
    out = _out_dir(args, config)
    topology = build_topology(config, config.seeds[0])
    save_topology(topology, out / "topology.json")
    print(f"topology: {len(topology.nodes)} nodes, {len(topology.jammers)} jammers, "
          f"source {topology.source_id}, dest {topology.dest_id} -> {out / 'topology.json'}")
    if not args.no_figures:
        from .plots import render_topology

        print(f"figure: {render_topology(topology, out / 'topology.png')}")
    return EXIT_OK


def _cmd_plan(args: argparse.Namespace) -> int:
    config = _load(args)
    out = _out_dir(args, config)
    result = run_single(config, out_dir=out)
    for mode in ("vehicle", "baseline"):
        plan = result.plans[mode]
        if plan is None:
            print(f"{mode}: infeasible")
            continue
        split = "" if plan.hop_split is None else f" (n={plan.hop_split[1]})"
        audit = result.audits[mode]
        print(
            f"{mode}: energy {plan.total_energy_j:.6g} J over {plan.hop_count} hops{split}, "
            f"outage {plan.end_to_end_outage:.4g}, audit "
            f"{'ok' if audit is not None and audit.passed else 'FAILED'}"
        )
    if not args.no_figures:
        from .plots import render_topology

        print(f"figure: {render_topology(result.topology, out / 'routes.png', result.plans)}")
    return EXIT_OK if result.any_feasible else EXIT_INFEASIBLE


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = _load(args)
    out = _out_dir(args, config)
    records = run_sweep(config, out_dir=out)
    feasible = sum(r.feasible for r in records)
    print(f"sweep: {len(records)} rows ({feasible} feasible) -> {out / 'sweep.csv'}")
    if records and not args.no_figures:
        from .plots import render_sweep

        print(f"figure: {render_sweep(records, out / 'sweep.png')}")
    return EXIT_OK if feasible or not records else EXIT_INFEASIBLE


def _cmd_oracle(args: argparse.Namespace) -> int:
    config = _load(args)
    if args.max_hops is not None:
        config = dataclasses.replace(
            config, solver=dataclasses.replace(config.solver, max_hops=args.max_hops)
        )
    topology = build_topology(config, config.seeds[0])
    qos = config.planning_qos()
    mismatch = False
    any_feasible = False
    for mode, fn, vehicle in (
        ("baseline", plan_without_vehicle, False),
        ("vehicle", plan_with_vehicle, True),
    ):
        planned = fn(topology, qos, config.message, options=config.solver)
        reference = brute_force_plan(
            topology, qos, config.message, with_vehicle=vehicle, options=config.solver
        )
        if (planned is None) != (reference is None):
            print(f"{mode}: FEASIBILITY MISMATCH planner={planned is not None} "
                  f"oracle={reference is not None}")
            mismatch = True
            continue
        if planned is None:
            print(f"{mode}: both infeasible")
            continue
        any_feasible = True
        gap = abs(planned.total_energy_j - reference.total_energy_j)
        rel = gap / max(planned.total_energy_j, reference.total_energy_j)
        ok = rel <= 1e-9
        mismatch |= not ok
        print(
            f"{mode}: planner {planned.total_energy_j:.12g} J vs oracle "
            f"{reference.total_energy_j:.12g} J ({'agree' if ok else 'MISMATCH'})"
        )
    if mismatch:
        return EXIT_MISMATCH
    return EXIT_OK if any_feasible else EXIT_INFEASIBLE


def _cmd_validate_mc(args: argparse.Namespace) -> int:
    config = _load(args)
    out = _out_dir(args, config)
    report = run_mc_validation(
        config, samples=args.samples, link_count=args.links
    )
    (out / "mc_validation.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    print(
        f"mc validation: {len(report.checks)} links x {report.samples} samples, "
        f"max deviation {report.max_abs_deviation:.3e}, "
        f"{'all within bound' if report.all_within_bound else 'BOUND EXCEEDED'}"
    )
    if not args.no_figures:
        from .plots import render_mc_report

        print(f"figure: {render_mc_report(report, out / 'mc_validation.png')}")
    return EXIT_OK if report.all_within_bound else EXIT_MISMATCH


_COMMANDS = {
    "generate": _cmd_generate,
    "plan": _cmd_plan,
    "sweep": _cmd_sweep,
    "oracle": _cmd_oracle,
    "validate-mc": _cmd_validate_mc,
}


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigurationError, GenerationError, OracleSizeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
