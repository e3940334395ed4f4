"""End-to-end acceptance checks for the routing stack.

Each test pins one externally meaningful guarantee and prints a single
PASS/FAIL line so a verbose run doubles as a report:

  1. closed-form link outage agrees with Monte Carlo sampling,
  2. equal-split per-link targets compose back to the exact budget,
  3. both planners match an exhaustive reference on small instances,
  4. total energy is non-increasing in the outage budget,
  5. total energy is non-increasing in the power cap and saturates,
  6. vehicle relaying saves energy on average across random draws,
  7. vehicle routes use more hops on average than direct routes,
  8. planner runtime grows politely with the network size.
"""
from __future__ import annotations

import dataclasses
import functools
import math
import statistics
import time

import pytest

from jamroute import (
    GenerationError,
    MessageSpec,
    QosParams,
    RoadLine,
    SolverOptions,
    SweepSpec,
    TopologyConfig,
    brute_force_plan,
    build_topology,
    bundled_config,
    end_to_end_outage,
    generate_topology,
    per_link_target,
    plan_with_vehicle,
    plan_without_vehicle,
    run_mc_validation,
    run_sweep,
)

SEEDS_10 = tuple(range(1, 11))
MODES = ("baseline", "vehicle")
REL_TOL = 1e-9


def report(label: str, ok: bool, detail: str = "") -> None:
    suffix = f" [{detail}]" if detail else ""
    print(f"{label}: {'PASS' if ok else 'FAIL'}{suffix}")


def series_for(records, seed, mode):
    rows = [r for r in records if r.seed == seed and r.mode == mode]
    rows.sort(key=lambda r: r.value)
    return rows


def test_acceptance_1_closed_form_outage_matches_monte_carlo():
    start = time.perf_counter()
    mc = run_mc_validation(bundled_config("demo_alpha2"), samples=1_000_000, link_count=50)
    elapsed = time.perf_counter() - start
    bounds_pinned = all(
        c.bound
        == pytest.approx(4.0 * math.sqrt(c.closed_form * (1.0 - c.closed_form) / mc.samples), rel=1e-12)
        for c in mc.checks
    )
    ok = (
        mc.samples == 1_000_000
        and len(mc.checks) == 50
        and bounds_pinned
        and mc.all_within_bound
        and elapsed <= 120.0
    )
    report(
        "acceptance 1/8 (closed-form outage vs Monte Carlo)",
        ok,
        f"max deviation {mc.max_abs_deviation:.2e}, {elapsed:.1f}s",
    )
    assert ok


def test_acceptance_2_equal_split_composition_is_exact():
    worst = 0.0
    for budget in (0.01, 0.1, 0.5):
        for hops in range(1, 65):
            target = per_link_target(budget, hops)
            worst = max(worst, abs(end_to_end_outage([target] * hops) - budget))
    ok = worst <= 1e-12
    report("acceptance 2/8 (equal-split outage composition)", ok, f"worst error {worst:.2e}")
    assert ok


def tiny_instances(count):
    """Small random draws (3..6 nodes, 0..3 jammers), skipping degenerate ones."""
    road = RoadLine(a=0.0, b=-50.0)
    produced = 0
    seed = 0
    while produced < count:
        cfg = TopologyConfig(
            area_width=100.0,
            area_height=100.0,
            road=road,
            node_count=3 + seed % 4,
            jammer_count=seed % 4,
            road_step=25.0,
            rng_seed=seed,
        )
        seed += 1
        try:
            topo = generate_topology(cfg, 0.2)
        except GenerationError:
            continue
        produced += 1
        yield topo


def test_acceptance_3_planners_match_exhaustive_reference():
    qos = QosParams(
        spectral_efficiency=1.0, path_loss_exponent=2.0, outage_budget=0.1, max_power_w=15.0
    )
    msg = MessageSpec(bits=1.0, spectral_efficiency=1.0)
    options = SolverOptions(max_hops=4)
    start = time.perf_counter()
    worst = 0.0
    verdict_mismatches = 0
    compared = 0
    for topo in tiny_instances(100):
        for with_vehicle in (False, True):
            fast_plan = (plan_with_vehicle if with_vehicle else plan_without_vehicle)(
                topo, qos, msg, options=options
            )
            reference = brute_force_plan(
                topo, qos, msg, with_vehicle=with_vehicle, options=options
            )
            if (fast_plan is None) != (reference is None):
                verdict_mismatches += 1
                continue
            if fast_plan is not None:
                rel = abs(fast_plan.total_energy_j - reference.total_energy_j) / abs(
                    reference.total_energy_j
                )
                worst = max(worst, rel)
                compared += 1
    elapsed = time.perf_counter() - start
    ok = (
        verdict_mismatches == 0
        and worst <= 1e-9
        and compared >= 20
        and elapsed <= 300.0
    )
    report(
        "acceptance 3/8 (planner vs exhaustive reference)",
        ok,
        f"{compared} feasible comparisons, worst rel {worst:.2e}, {elapsed:.1f}s",
    )
    assert ok


def test_acceptance_4_energy_non_increasing_in_outage_budget():
    config = dataclasses.replace(
        bundled_config("demo_alpha2"),
        seeds=SEEDS_10,
        pmax_infinite=True,
        sweep=SweepSpec(axis="outage_budget", values=(0.05, 0.1, 0.2, 0.3, 0.4)),
    )
    records = run_sweep(config)
    violations = []
    for seed in SEEDS_10:
        for mode in MODES:
            rows = series_for(records, seed, mode)
            if not all(r.feasible for r in rows):
                violations.append((seed, mode, "infeasible cell under an unbounded cap"))
                continue
            for prev, nxt in zip(rows, rows[1:]):
                if nxt.energy_j > prev.energy_j * (1.0 + REL_TOL):
                    violations.append((seed, mode, prev.value, nxt.value))
    ok = not violations
    report(
        "acceptance 4/8 (energy non-increasing in outage budget)",
        ok,
        f"{len(SEEDS_10) * len(MODES)} series checked" if ok else f"violations {violations[:3]}",
    )
    assert ok, violations


def test_acceptance_5_energy_saturates_in_power_cap():
    grid = (1.0, 2.0, 5.0, 10.0, 15.0, 30.0, 100.0)
    config = dataclasses.replace(
        bundled_config("demo_alpha2"),
        seeds=SEEDS_10,
        pmax_infinite=False,
        sweep=SweepSpec(axis="max_power_w", values=grid),
    )
    records = run_sweep(config)
    problems = []
    thresholds = {}
    for seed in SEEDS_10:
        for mode in MODES:
            rows = series_for(records, seed, mode)
            flags = [r.feasible for r in rows]
            if True not in flags:
                problems.append((seed, mode, "never feasible"))
                continue
            first = flags.index(True)
            if not all(flags[first:]):
                problems.append((seed, mode, "feasibility not monotone in the cap"))
                continue
            feasible = rows[first:]
            for prev, nxt in zip(feasible, feasible[1:]):
                if nxt.energy_j > prev.energy_j * (1.0 + REL_TOL):
                    problems.append((seed, mode, "energy increases", prev.value))
            if len(feasible) < 2 or not math.isclose(
                feasible[-1].energy_j, feasible[-2].energy_j, rel_tol=REL_TOL
            ):
                problems.append((seed, mode, "no plateau at the top of the grid"))
            thresholds[(seed, mode)] = feasible[0].value
    wins = sum(
        1
        for seed in SEEDS_10
        if (seed, "vehicle") in thresholds
        and (seed, "baseline") in thresholds
        and thresholds[(seed, "vehicle")] <= thresholds[(seed, "baseline")]
    )
    ok = not problems and wins >= math.ceil(0.7 * len(SEEDS_10))
    report(
        "acceptance 5/8 (energy saturates in power cap)",
        ok,
        f"vehicle threshold <= baseline in {wins}/{len(SEEDS_10)} seeds"
        if ok
        else f"problems {problems[:3]}, wins {wins}",
    )
    assert ok, problems


@functools.lru_cache(maxsize=None)
def paired_sample(config_name: str, want: int = 20):
    """First ``want`` seeds, scanning upward from 1, where both modes are feasible."""
    config = bundled_config(config_name)
    qos = config.planning_qos()
    pairs = []
    for seed in range(1, 201):
        if len(pairs) == want:
            break
        topo = build_topology(config, seed)
        vehicle = plan_with_vehicle(topo, qos, config.message, options=config.solver)
        baseline = plan_without_vehicle(topo, qos, config.message, options=config.solver)
        if vehicle is not None and baseline is not None:
            pairs.append((vehicle, baseline))
    if len(pairs) < want:
        raise AssertionError(f"only {len(pairs)} jointly feasible draws in 200 seeds")
    return tuple(pairs)


def mean_energy_ratio(pairs):
    return statistics.fmean(v.total_energy_j / b.total_energy_j for v, b in pairs)


def test_acceptance_6_vehicle_saves_energy_on_average():
    ratio_a2 = mean_energy_ratio(paired_sample("demo_alpha2"))
    ratio_a3 = mean_energy_ratio(paired_sample("demo_alpha3"))
    ok = ratio_a2 < 1.0 and ratio_a3 <= ratio_a2
    report(
        "acceptance 6/8 (vehicle saves energy on average)",
        ok,
        f"mean vehicle/baseline ratio {ratio_a2:.4f} at alpha=2, {ratio_a3:.4f} at alpha=3",
    )
    assert ok


def test_acceptance_7_vehicle_routes_use_more_hops():
    pairs = paired_sample("demo_alpha2")
    vehicle_hops = statistics.fmean(v.hop_count for v, _ in pairs)
    baseline_hops = statistics.fmean(b.hop_count for _, b in pairs)
    ok = vehicle_hops > baseline_hops
    report(
        "acceptance 7/8 (vehicle routes use more hops)",
        ok,
        f"mean hops {vehicle_hops:.2f} vehicle vs {baseline_hops:.2f} baseline",
    )
    assert ok


def test_acceptance_8_runtime_scales_politely_with_network_size():
    base = bundled_config("demo_alpha2")
    start = time.perf_counter()
    medians = {}
    for node_count in (20, 40):
        config = dataclasses.replace(
            base, topology=dataclasses.replace(base.topology, node_count=node_count)
        )
        qos = config.planning_qos()
        runtimes = []
        for seed in range(1, 6):
            topo = build_topology(config, seed)
            t0 = time.perf_counter()
            plan_with_vehicle(topo, qos, config.message, options=config.solver)
            plan_without_vehicle(topo, qos, config.message, options=config.solver)
            runtimes.append(time.perf_counter() - t0)
        medians[node_count] = statistics.median(runtimes)
    elapsed = time.perf_counter() - start
    ratio = medians[40] / medians[20]
    ok = ratio <= 32.0 and elapsed <= 600.0
    report(
        "acceptance 8/8 (runtime growth, 20 -> 40 nodes)",
        ok,
        f"median {medians[20] * 1e3:.1f}ms -> {medians[40] * 1e3:.1f}ms, ratio {ratio:.1f}x, {elapsed:.1f}s",
    )
    assert ok
