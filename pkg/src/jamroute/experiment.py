"""Experiment configs, seeded runs, parameter sweeps, and MC validation.

A config document fixes the topology draw, the QoS contract, the message,
the seed list, and optionally a sweep grid over the outage budget or the
power cap. Runs are deterministic functions of (config, seed): the topology
is drawn once per seed and shared across the whole grid.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .channel import LinkGeometry, QosParams, link_outage, mc_link_outage
from .errors import ConfigParseError, ConfigurationError
from .planner import (
    AuditReport,
    RoutePlan,
    SolverOptions,
    audit_route,
    plan_with_vehicle,
    plan_without_vehicle,
    save_plan,
)
from .power import MessageSpec
from .topology import (
    RoadLine,
    Topology,
    TopologyConfig,
    distance,
    generate_topology,
    save_topology,
)

SWEEP_AXES = ("outage_budget", "max_power_w")
CSV_HEADER = ("seed", "axis", "value", "mode", "energy_j", "m", "n", "feasible", "runtime_s")
PLAN_MODES = ("baseline", "vehicle")


@dataclass(frozen=True)
class SweepSpec:
    """One swept QoS axis and its grid; an empty grid is allowed."""

    axis: str
    values: Tuple[float, ...]

    def __post_init__(self) -> None:
        if self.axis not in SWEEP_AXES:
            raise ConfigurationError(f"sweep axis must be one of {SWEEP_AXES}, got {self.axis!r}")
        for v in self.values:
            if self.axis == "outage_budget" and not 0.0 < v < 1.0:
                raise ConfigurationError(f"swept outage budgets must lie in (0, 1), got {v}")
            if self.axis == "max_power_w" and (v <= 0.0 or not math.isfinite(v)):
                raise ConfigurationError(f"swept power caps must be positive and finite, got {v}")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ConfigurationError("sweep values must be strictly ascending")


@dataclass(frozen=True)
class ExperimentConfig:
    topology: TopologyConfig
    jammer_power_w: float
    qos: QosParams
    message: MessageSpec
    seeds: Tuple[int, ...]
    sweep: Optional[SweepSpec]
    solver: SolverOptions
    pmax_infinite: bool = False
    output_dir: str = "out"

    def __post_init__(self) -> None:
        if not self.seeds:
            raise ConfigurationError("config must list at least one seed")
        for s in self.seeds:
            if s < 0:
                raise ConfigurationError(f"seeds must be non-negative integers, got {s}")
        if self.jammer_power_w < 0.0 or not math.isfinite(self.jammer_power_w):
            raise ConfigurationError(f"jammer_power_w must be >= 0, got {self.jammer_power_w}")
        if self.pmax_infinite and self.sweep is not None and self.sweep.axis == "max_power_w":
            raise ConfigurationError("cannot sweep max_power_w with pmax_infinite set")

    def planning_qos(self) -> QosParams:
        """QoS used by the planners; lifts the cap in infinite-power mode."""
        if self.pmax_infinite:
            return dataclasses.replace(self.qos, max_power_w=math.inf)
        return self.qos


# ---------------------------------------------------------------------------
# Config document parsing
# ---------------------------------------------------------------------------


def _check_fields(prefix: str, doc: dict, required: Sequence[str], optional: Sequence[str] = ()) -> None:
    if not isinstance(doc, dict):
        raise ConfigParseError(f"field '{prefix}' must be an object")
    for key in doc:
        if key not in required and key not in optional:
            raise ConfigParseError(f"unknown field '{prefix}.{key}'")
    for key in required:
        if key not in doc:
            raise ConfigParseError(f"missing field '{prefix}.{key}'")


def _number(prefix: str, doc: dict, key: str, default=None):
    if key not in doc or doc[key] is None:
        return default
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigParseError(f"field '{prefix}.{key}' must be a number")
    return value


def _parse_topology(doc: dict) -> TopologyConfig:
    _check_fields(
        "topology",
        doc,
        required=("area_width", "area_height", "road"),
        optional=(
            "node_count",
            "node_intensity",
            "jammer_count",
            "jammer_intensity",
            "road_step",
            "source_id",
            "dest_id",
        ),
    )
    _check_fields("topology.road", doc["road"], required=("a", "b"))
    road = RoadLine(a=float(_number("topology.road", doc["road"], "a")),
                    b=float(_number("topology.road", doc["road"], "b")))
    node_count = _number("topology", doc, "node_count")
    jammer_count = _number("topology", doc, "jammer_count")
    source_id = _number("topology", doc, "source_id")
    dest_id = _number("topology", doc, "dest_id")
    return TopologyConfig(
        area_width=float(_number("topology", doc, "area_width")),
        area_height=float(_number("topology", doc, "area_height")),
        road=road,
        node_count=None if node_count is None else int(node_count),
        node_intensity=_number("topology", doc, "node_intensity"),
        jammer_count=None if jammer_count is None else int(jammer_count),
        jammer_intensity=_number("topology", doc, "jammer_intensity"),
        road_step=float(_number("topology", doc, "road_step", 1.0)),
        source_id=None if source_id is None else int(source_id),
        dest_id=None if dest_id is None else int(dest_id),
    )


def _parse_qos(doc: dict) -> QosParams:
    _check_fields(
        "qos",
        doc,
        required=("spectral_efficiency", "path_loss_exponent", "outage_budget", "max_power_w"),
        optional=("sir_threshold",),
    )
    max_power = float(_number("qos", doc, "max_power_w"))
    if not math.isfinite(max_power):
        raise ConfigParseError("field 'qos.max_power_w' must be finite; use pmax_infinite instead")
    return QosParams(
        spectral_efficiency=float(_number("qos", doc, "spectral_efficiency")),
        path_loss_exponent=float(_number("qos", doc, "path_loss_exponent")),
        outage_budget=float(_number("qos", doc, "outage_budget")),
        max_power_w=max_power,
        sir_threshold=_number("qos", doc, "sir_threshold"),
    )


def _parse_solver(doc: Optional[dict]) -> SolverOptions:
    if doc is None:
        return SolverOptions()
    _check_fields(
        "solver",
        doc,
        required=(),
        optional=(
            "tol",
            "power_floor_w",
            "approximate",
            "handoff_rule",
            "max_hops",
            "oracle_sequence_limit",
        ),
    )
    defaults = SolverOptions()
    max_hops = _number("solver", doc, "max_hops")
    return SolverOptions(
        tol=float(_number("solver", doc, "tol", defaults.tol)),
        power_floor_w=float(_number("solver", doc, "power_floor_w", defaults.power_floor_w)),
        approximate=bool(doc.get("approximate", defaults.approximate)),
        handoff_rule=str(doc.get("handoff_rule", defaults.handoff_rule)),
        max_hops=None if max_hops is None else int(max_hops),
        oracle_sequence_limit=int(
            _number("solver", doc, "oracle_sequence_limit", defaults.oracle_sequence_limit)
        ),
    )


def config_from_dict(doc: dict) -> ExperimentConfig:
    _check_fields(
        "config",
        doc,
        required=("topology", "jammer_power_w", "qos", "message", "seeds"),
        optional=("sweep", "solver", "pmax_infinite", "output_dir"),
    )
    qos = _parse_qos(doc["qos"])
    _check_fields("message", doc["message"], required=("bits",))
    message = MessageSpec(
        bits=float(_number("message", doc["message"], "bits")),
        spectral_efficiency=qos.spectral_efficiency,
    )
    seeds = doc["seeds"]
    if not isinstance(seeds, list) or not all(isinstance(s, int) and not isinstance(s, bool) for s in seeds):
        raise ConfigParseError("field 'seeds' must be a list of integers")
    sweep_doc = doc.get("sweep")
    sweep = None
    if sweep_doc is not None:
        _check_fields("sweep", sweep_doc, required=("axis", "values"))
        values = sweep_doc["values"]
        if not isinstance(values, list):
            raise ConfigParseError("field 'sweep.values' must be a list of numbers")
        sweep = SweepSpec(axis=str(sweep_doc["axis"]), values=tuple(float(v) for v in values))
    return ExperimentConfig(
        topology=_parse_topology(doc["topology"]),
        jammer_power_w=float(_number("config", doc, "jammer_power_w")),
        qos=qos,
        message=message,
        seeds=tuple(seeds),
        sweep=sweep,
        solver=_parse_solver(doc.get("solver")),
        pmax_infinite=bool(doc.get("pmax_infinite", False)),
        output_dir=str(doc.get("output_dir", "out")),
    )


def config_to_dict(config: ExperimentConfig) -> dict:
    topo = config.topology
    return {
        "topology": {
            "area_width": topo.area_width,
            "area_height": topo.area_height,
            "road": {"a": topo.road.a, "b": topo.road.b},
            "node_count": topo.node_count,
            "node_intensity": topo.node_intensity,
            "jammer_count": topo.jammer_count,
            "jammer_intensity": topo.jammer_intensity,
            "road_step": topo.road_step,
            "source_id": topo.source_id,
            "dest_id": topo.dest_id,
        },
        "jammer_power_w": config.jammer_power_w,
        "qos": {
            "spectral_efficiency": config.qos.spectral_efficiency,
            "path_loss_exponent": config.qos.path_loss_exponent,
            "outage_budget": config.qos.outage_budget,
            "max_power_w": config.qos.max_power_w,
            "sir_threshold": config.qos.sir_threshold,
        },
        "message": {"bits": config.message.bits},
        "seeds": list(config.seeds),
        "sweep": None
        if config.sweep is None
        else {"axis": config.sweep.axis, "values": list(config.sweep.values)},
        "solver": {
            "tol": config.solver.tol,
            "power_floor_w": config.solver.power_floor_w,
            "approximate": config.solver.approximate,
            "handoff_rule": config.solver.handoff_rule,
            "max_hops": config.solver.max_hops,
            "oracle_sequence_limit": config.solver.oracle_sequence_limit,
        },
        "pmax_infinite": config.pmax_infinite,
        "output_dir": config.output_dir,
    }


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Parse a config document; errors name the offending field."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"invalid config {path}: line {exc.lineno}: {exc.msg}") from exc
    return config_from_dict(doc)


def save_config(config: ExperimentConfig, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(config_to_dict(config), indent=2) + "\n")


def bundled_config(name: str) -> ExperimentConfig:
    """Load a config shipped with the package, e.g. ``demo_alpha2``."""
    ref = resources.files("jamroute").joinpath(f"configs/{name}.json")
    if not ref.is_file():
        raise ConfigParseError(f"no bundled config named {name!r}")
    return config_from_dict(json.loads(ref.read_text()))


def resolve_config(spec: Union[str, Path]) -> ExperimentConfig:
    """Load a config from a path, falling back to the bundled set by name."""
    path = Path(spec)
    if path.is_file():
        return load_config(path)
    return bundled_config(str(spec))


# ---------------------------------------------------------------------------
# Runs
# ---------------------------------------------------------------------------


def build_topology(config: ExperimentConfig, seed: int) -> Topology:
    topo_cfg = dataclasses.replace(config.topology, rng_seed=seed)
    return generate_topology(topo_cfg, config.jammer_power_w)


@dataclass(frozen=True)
class SingleRunResult:
    seed: int
    topology: Topology
    plans: Dict[str, Optional[RoutePlan]]
    audits: Dict[str, Optional[AuditReport]]

    @property
    def any_feasible(self) -> bool:
        return any(p is not None for p in self.plans.values())


def run_single(
    config: ExperimentConfig,
    seed: Optional[int] = None,
    out_dir: Optional[Union[str, Path]] = None,
) -> SingleRunResult:
    """Plan both modes on one seeded topology; optionally write documents."""
    seed = config.seeds[0] if seed is None else seed
    topology = build_topology(config, seed)
    qos = config.planning_qos()
    plans: Dict[str, Optional[RoutePlan]] = {}
    audits: Dict[str, Optional[AuditReport]] = {}
    for mode, fn in (("baseline", plan_without_vehicle), ("vehicle", plan_with_vehicle)):
        plan = fn(topology, qos, config.message, options=config.solver)
        plans[mode] = plan
        audits[mode] = None if plan is None else audit_route(plan, topology, qos, config.message)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        save_topology(topology, out / "topology.json")
        for mode, plan in plans.items():
            if plan is not None:
                save_plan(plan, out / f"plan_{mode}.json")
    return SingleRunResult(seed=seed, topology=topology, plans=plans, audits=audits)


@dataclass(frozen=True)
class SweepRecord:
    seed: int
    axis: str
    value: float
    mode: str
    energy_j: Optional[float]
    m: Optional[int]
    n: Optional[int]
    feasible: bool
    runtime_s: float


def _record_for(plan: Optional[RoutePlan], seed: int, axis: str, value: float, mode: str, runtime_s: float) -> SweepRecord:
    if plan is None:
        return SweepRecord(seed, axis, value, mode, None, None, None, False, runtime_s)
    split = plan.hop_split
    return SweepRecord(
        seed=seed,
        axis=axis,
        value=value,
        mode=mode,
        energy_j=plan.total_energy_j,
        m=plan.hop_count,
        n=None if split is None else split[1],
        feasible=True,
        runtime_s=runtime_s,
    )


def run_sweep(
    config: ExperimentConfig, out_dir: Optional[Union[str, Path]] = None
) -> List[SweepRecord]:
    """Plan both modes over the sweep grid for every seed.

    The topology is drawn once per seed and reused across the grid. Rows
    are sorted by (seed, value, mode) before writing, so any execution
    order produces the same CSV (modulo the measured runtimes).
    """
    if config.sweep is None:
        raise ConfigurationError("config defines no sweep axis")
    records: List[SweepRecord] = []
    base_qos = config.planning_qos()
    for seed in config.seeds:
        topology = build_topology(config, seed)
        for value in config.sweep.values:
            qos = dataclasses.replace(base_qos, **{config.sweep.axis: value})
            for mode, fn in (("baseline", plan_without_vehicle), ("vehicle", plan_with_vehicle)):
                start = time.perf_counter()
                plan = fn(topology, qos, config.message, options=config.solver)
                runtime = time.perf_counter() - start
                records.append(
                    _record_for(plan, seed, config.sweep.axis, value, mode, runtime)
                )
    records.sort(key=lambda r: (r.seed, r.value, r.mode))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_sweep_csv(records, out / "sweep.csv")
    return records


def write_sweep_csv(records: Sequence[SweepRecord], path: Union[str, Path]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in records:
            writer.writerow(
                [
                    r.seed,
                    r.axis,
                    repr(r.value),
                    r.mode,
                    "" if r.energy_j is None else repr(r.energy_j),
                    "" if r.m is None else r.m,
                    "" if r.n is None else r.n,
                    "true" if r.feasible else "false",
                    f"{r.runtime_s:.6f}",
                ]
            )


def read_sweep_csv(path: Union[str, Path]) -> List[SweepRecord]:
    records: List[SweepRecord] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != list(CSV_HEADER):
            raise ConfigParseError(f"unexpected sweep CSV header in {path}")
        for row in reader:
            records.append(
                SweepRecord(
                    seed=int(row["seed"]),
                    axis=row["axis"],
                    value=float(row["value"]),
                    mode=row["mode"],
                    energy_j=float(row["energy_j"]) if row["energy_j"] else None,
                    m=int(row["m"]) if row["m"] else None,
                    n=int(row["n"]) if row["n"] else None,
                    feasible=row["feasible"] == "true",
                    runtime_s=float(row["runtime_s"]),
                )
            )
    return records


# ---------------------------------------------------------------------------
# Monte Carlo validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class McLinkCheck:
    tx_id: int
    rx_id: int
    power_w: float
    closed_form: float
    monte_carlo: float
    bound: float

    @property
    def within_bound(self) -> bool:
        return abs(self.monte_carlo - self.closed_form) <= self.bound


@dataclass(frozen=True)
class McValidationReport:
    seed: int
    samples: int
    checks: Tuple[McLinkCheck, ...]

    @property
    def max_abs_deviation(self) -> float:
        return max(abs(c.monte_carlo - c.closed_form) for c in self.checks)

    @property
    def all_within_bound(self) -> bool:
        return all(c.within_bound for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "samples": self.samples,
            "max_abs_deviation": self.max_abs_deviation,
            "all_within_bound": self.all_within_bound,
            "checks": [
                {
                    "tx_id": c.tx_id,
                    "rx_id": c.rx_id,
                    "power_w": c.power_w,
                    "closed_form": c.closed_form,
                    "monte_carlo": c.monte_carlo,
                    "bound": c.bound,
                    "within_bound": c.within_bound,
                }
                for c in self.checks
            ],
        }


def run_mc_validation(
    config: ExperimentConfig,
    seed: Optional[int] = None,
    samples: int = 1_000_000,
    link_count: int = 50,
) -> McValidationReport:
    """Cross-check the closed-form outage on random links of a seeded draw.

    Each link gets an independent Monte Carlo estimate; the acceptance
    bound is four binomial standard deviations of the closed-form value.
    Fully deterministic for a given (config, seed).
    """
    if samples <= 0 or link_count <= 0:
        raise ConfigurationError("samples and link_count must be positive")
    seed = config.seeds[0] if seed is None else seed
    topology = build_topology(config, seed)
    rng = np.random.default_rng(seed)
    n = len(topology.nodes)
    cap = config.qos.max_power_w
    base_power = cap if math.isfinite(cap) else 100.0
    checks: List[McLinkCheck] = []
    for _ in range(link_count):
        tx = int(rng.integers(n))
        rx = int(rng.integers(n))
        while rx == tx:
            rx = int(rng.integers(n))
        power = base_power * 10.0 ** float(rng.uniform(-3.0, 0.0))
        child_seed = int(rng.integers(2**63))
        geom = LinkGeometry(
            tx_rx_distance=distance(topology.nodes[tx].point, topology.nodes[rx].point),
            jammers=tuple(
                (j.power_w, distance(j.point, topology.nodes[rx].point))
                for j in topology.jammers
            ),
        )
        closed = link_outage(power, geom, config.qos)
        estimate = mc_link_outage(power, geom, config.qos, samples=samples, seed=child_seed)
        bound = 4.0 * math.sqrt(closed * (1.0 - closed) / samples)
        checks.append(
            McLinkCheck(
                tx_id=topology.nodes[tx].id,
                rx_id=topology.nodes[rx].id,
                power_w=power,
                closed_form=closed,
                monte_carlo=estimate,
                bound=bound,
            )
        )
    return McValidationReport(seed=seed, samples=samples, checks=tuple(checks))
