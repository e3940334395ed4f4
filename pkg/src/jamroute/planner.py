"""Minimum-energy route planning across a jammed network.

Two planners share one machinery. The vehicle planner relays the message
through a vehicle driving along the road: a plane-A path hands the message
to the vehicle at a road point, the vehicle carries it for free, and a
plane-B path completes delivery. The baseline planner routes hop-by-hop
over the full node set. Both split the end-to-end outage budget evenly
over the energy-counted hops and assign each link the least power meeting
its share, so total energy is the only objective.

The dynamic program is indexed by exact hop count and ranges over node
walks (revisits allowed, self-links forbidden). A brute-force enumerator
with identical semantics serves as the correctness oracle on small
instances.
"""

from __future__ import annotations

import dataclasses
import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .channel import LinkGeometry, QosParams, end_to_end_outage, link_outage
from .errors import ConfigurationError, OracleSizeError
from .power import (
    DEFAULT_POWER_FLOOR_W,
    DEFAULT_TOL,
    MessageSpec,
    link_energy,
    min_power_for_outage,
    per_link_target,
)
from .topology import (
    Jammer,
    Point,
    Topology,
    distance,
    nearest_plane_b_ids,
)

HANDOFF_RULES = ("min-power", "max-outage")

# Fixed iteration count for the vectorized interference-scale bisection;
# drives the bracket far below double-precision resolution.
_SCALE_SOLVE_ITERS = 96


@dataclass(frozen=True)
class SolverOptions:
    """Switches shared by the power solver and the planners."""

    tol: float = DEFAULT_TOL
    power_floor_w: float = DEFAULT_POWER_FLOOR_W
    approximate: bool = False
    handoff_rule: str = "min-power"
    max_hops: Optional[int] = None
    oracle_sequence_limit: int = 2_000_000

    def __post_init__(self) -> None:
        if self.tol <= 0.0 or not math.isfinite(self.tol):
            raise ConfigurationError(f"tol must be positive and finite, got {self.tol}")
        if self.power_floor_w <= 0.0:
            raise ConfigurationError(f"power_floor_w must be positive, got {self.power_floor_w}")
        if self.handoff_rule not in HANDOFF_RULES:
            raise ConfigurationError(
                f"handoff_rule must be one of {HANDOFF_RULES}, got {self.handoff_rule!r}"
            )
        if self.max_hops is not None and self.max_hops < 1:
            raise ConfigurationError(f"max_hops must be >= 1, got {self.max_hops}")
        if self.oracle_sequence_limit < 1:
            raise ConfigurationError("oracle_sequence_limit must be >= 1")


# ---------------------------------------------------------------------------
# Geometry cache and per-target power tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeometryCache:
    """Distances and jammer weights of one topology, target-independent."""

    topology: Topology
    qos: QosParams
    msg: MessageSpec
    options: SolverOptions
    node_ids: Tuple[int, ...]
    node_xy: np.ndarray  # (N, 2)
    road_xy: np.ndarray  # (R, 2)
    scale_node: np.ndarray  # (N, N) sir_threshold * d**alpha, zero diagonal
    scale_hand: np.ndarray  # (N, R)
    weights_node: np.ndarray  # (N, J) jammer power * jammer distance**-alpha
    weights_road: np.ndarray  # (R, J)
    a_indices: np.ndarray
    b_indices: np.ndarray
    source_index: int
    dest_index: int
    theta_ids: Tuple[int, ...]
    delivery_road_index: Dict[int, int]

    @classmethod
    def build(
        cls,
        topology: Topology,
        qos: QosParams,
        msg: MessageSpec,
        options: SolverOptions,
    ) -> "GeometryCache":
        if not 0.0 < options.power_floor_w < qos.max_power_w:
            raise ConfigurationError(
                f"power_floor_w must lie in (0, max_power_w), got {options.power_floor_w}"
            )
        node_ids = tuple(n.id for n in topology.nodes)
        node_xy = topology.node_positions()
        road_xy = topology.road_point_array()
        jam_xy = topology.jammer_positions()
        jam_pw = topology.jammer_powers()
        alpha = qos.path_loss_exponent

        d_node = np.linalg.norm(node_xy[:, None, :] - node_xy[None, :, :], axis=2)
        d_hand = np.linalg.norm(node_xy[:, None, :] - road_xy[None, :, :], axis=2)
        scale_node = qos.sir_threshold * d_node**alpha
        scale_hand = qos.sir_threshold * d_hand**alpha

        def weights(rx_xy: np.ndarray) -> np.ndarray:
            if jam_xy.shape[0] == 0:
                return np.zeros((rx_xy.shape[0], 0))
            d = np.linalg.norm(rx_xy[:, None, :] - jam_xy[None, :, :], axis=2)
            with np.errstate(divide="ignore"):
                return jam_pw[None, :] * d ** (-alpha)

        planes = np.array([n.plane for n in topology.nodes])
        index_of = {nid: i for i, nid in enumerate(node_ids)}
        nearest_b = nearest_plane_b_ids(topology)
        theta_ids = tuple(sorted(set(nearest_b)))
        delivery: Dict[int, int] = {}
        for sigma in theta_ids:
            candidates = [r for r, nid in enumerate(nearest_b) if nid == sigma]
            sigma_xy = node_xy[index_of[sigma]]
            delivery[sigma] = min(
                candidates, key=lambda r: (np.hypot(*(road_xy[r] - sigma_xy)), r)
            )

        return cls(
            topology=topology,
            qos=qos,
            msg=msg,
            options=options,
            node_ids=node_ids,
            node_xy=node_xy,
            road_xy=road_xy,
            scale_node=scale_node,
            scale_hand=scale_hand,
            weights_node=weights(node_xy),
            weights_road=weights(road_xy),
            a_indices=np.flatnonzero(planes == "A"),
            b_indices=np.flatnonzero(planes == "B"),
            source_index=index_of[topology.source_id],
            dest_index=index_of[topology.dest_id],
            theta_ids=theta_ids,
            delivery_road_index=delivery,
        )

    def index_of(self, node_id: int) -> int:
        return self.node_ids.index(node_id)


def _solve_interference_scale(
    weights: np.ndarray, target: float, approximate: bool
) -> np.ndarray:
    """Per-receiver scale ``x`` with outage(x) == target, conservative side.

    ``x`` stands for ``sir_threshold * d**alpha / power``; solving it per
    receiver prices every transmitter toward that receiver with a single
    division. Rows without active jammers get ``inf`` (any power works);
    rows with a co-located jammer get ``0`` (no power works).
    """
    n_rx, n_jam = weights.shape
    log_margin = -math.log1p(-target)
    if n_jam == 0:
        return np.full(n_rx, np.inf)
    wsum = weights.sum(axis=1)
    if approximate:
        with np.errstate(divide="ignore"):
            return np.where(wsum > 0.0, log_margin / wsum, np.inf)
    wmax = weights.max(axis=1)
    x = np.zeros(n_rx)
    x[wsum == 0.0] = np.inf
    solvable = (wsum > 0.0) & np.isfinite(wmax)
    if not solvable.any():
        return x
    w = weights[solvable]
    # log1p concavity brackets the root analytically on both sides.
    lo = log_margin / w.sum(axis=1)
    hi = math.expm1(log_margin) / w.max(axis=1)
    for _ in range(_SCALE_SOLVE_ITERS):
        mid = 0.5 * (lo + hi)
        over = np.log1p(w * mid[:, None]).sum(axis=1) > log_margin
        hi = np.where(over, mid, hi)
        lo = np.where(over, lo, mid)
    x[solvable] = lo
    return x


@dataclass(frozen=True)
class PowerTables:
    """Link powers and energies at one per-link outage target.

    Entries are ``inf`` where the link is infeasible (target unreachable
    at the power cap, or a self-link).
    """

    target: float
    power_node: np.ndarray  # (N, N) transmitter row, receiver column
    energy_node: np.ndarray
    power_hand: np.ndarray  # (N, R) node row, road point column
    energy_hand: np.ndarray


def compute_power_tables(cache: GeometryCache, target: float) -> PowerTables:
    opts = cache.options
    cap = cache.qos.max_power_w

    def pair_power(scale: np.ndarray, x: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            power = scale / x[None, :]
        power = np.where(np.isinf(x)[None, :], opts.power_floor_w, power)
        return np.where(power > cap, np.inf, power)

    x_node = _solve_interference_scale(cache.weights_node, target, opts.approximate)
    x_road = _solve_interference_scale(cache.weights_road, target, opts.approximate)
    power_node = pair_power(cache.scale_node, x_node)
    np.fill_diagonal(power_node, np.inf)
    power_hand = pair_power(cache.scale_hand, x_road)
    duration = cache.msg.tx_duration
    return PowerTables(
        target=target,
        power_node=power_node,
        energy_node=power_node * duration,
        power_hand=power_hand,
        energy_hand=power_hand * duration,
    )


# ---------------------------------------------------------------------------
# Hop-indexed dynamic program
# ---------------------------------------------------------------------------


def _dp_sweep(
    energy: np.ndarray, start_costs: np.ndarray, hops: int
) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """Exact-hop-count Bellman sweep over walks.

    Returns per-hop cost vectors (``costs[h]`` for h = 0..hops) and
    predecessor index vectors (``preds[h - 1]`` feeding ``costs[h]``,
    -1 where unreachable). Ties resolve to the smallest index, i.e. the
    smallest node id.
    """
    costs = [start_costs]
    preds: List[np.ndarray] = []
    n = energy.shape[0]
    cols = np.arange(n)
    for _ in range(hops):
        via = costs[-1][:, None] + energy
        pred = via.argmin(axis=0)
        cost = via[pred, cols]
        costs.append(cost)
        preds.append(np.where(np.isfinite(cost), pred, -1))
    return costs, preds


def _walk_back(preds: Sequence[np.ndarray], end_index: int, hops: int) -> List[int]:
    """Recover the index path ending at ``end_index`` after ``hops`` hops."""
    path = [end_index]
    for h in range(hops, 0, -1):
        prev = int(preds[h - 1][path[0]])
        if prev < 0:
            raise AssertionError("walked back through an unreachable state")
        path.insert(0, prev)
    return path


@dataclass(frozen=True)
class DpTable:
    """Cost/predecessor table of one DP run, for inspection and testing."""

    node_ids: Tuple[int, ...]
    costs: np.ndarray  # (hops + 1, N)
    preds: np.ndarray  # (hops, N)

    def cost(self, hops: int, node_id: int) -> float:
        return float(self.costs[hops, self.node_ids.index(node_id)])

    def predecessor(self, hops: int, node_id: int) -> Optional[int]:
        p = int(self.preds[hops - 1, self.node_ids.index(node_id)])
        return None if p < 0 else self.node_ids[p]


def compute_dp_table(
    topology: Topology,
    target: float,
    qos: QosParams,
    msg: MessageSpec,
    hops: int,
    *,
    scope: str = "all",
    candidates: Optional[Iterable[int]] = None,
    options: Optional[SolverOptions] = None,
) -> DpTable:
    """Run one hop-indexed DP and expose its table.

    ``scope`` selects the node set and start states: ``"all"`` and
    ``"plane-a"`` start from the source, ``"plane-b"`` starts from the
    candidate set (default: the handoff candidates).
    """
    options = options or SolverOptions()
    cache = GeometryCache.build(topology, qos, msg, options)
    tables = compute_power_tables(cache, target)
    if scope == "all":
        idx = np.arange(len(cache.node_ids))
        starts = [cache.source_index]
    elif scope == "plane-a":
        idx = cache.a_indices
        starts = [cache.source_index]
    elif scope == "plane-b":
        idx = cache.b_indices
        ids = cache.theta_ids if candidates is None else tuple(sorted(candidates))
        starts = [cache.index_of(i) for i in ids]
    else:
        raise ConfigurationError(f"unknown DP scope {scope!r}")
    sub_ids = tuple(cache.node_ids[i] for i in idx)
    pos = {g: i for i, g in enumerate(idx)}
    start = np.full(len(idx), np.inf)
    for s in starts:
        if s not in pos:
            raise ConfigurationError("start node is outside the DP scope")
        start[pos[s]] = 0.0
    energy = tables.energy_node[np.ix_(idx, idx)]
    costs, preds = _dp_sweep(energy, start, hops)
    return DpTable(
        node_ids=sub_ids,
        costs=np.vstack(costs),
        preds=np.vstack(preds) if preds else np.empty((0, len(idx)), dtype=int),
    )


# ---------------------------------------------------------------------------
# Route plans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Endpoint:
    """A hop endpoint: a network node or a bare road position."""

    node_id: Optional[int]
    point: Point


@dataclass(frozen=True)
class Hop:
    """One transmission. ``counted`` marks hops that spend budgeted energy;
    the vehicle's own delivery hop is recorded but not counted."""

    tx: Endpoint
    rx: Endpoint
    power_w: Optional[float]
    outage: Optional[float]
    energy_j: float
    counted: bool


@dataclass(frozen=True)
class RoutePlan:
    mode: str  # "vehicle" | "baseline"
    hops: Tuple[Hop, ...]
    total_energy_j: float
    end_to_end_outage: float
    hop_split: Optional[Tuple[int, int]]  # (total hops m, plane-A hops n); None for baseline
    handoff_point: Optional[Point]

    def __post_init__(self) -> None:
        if self.mode not in ("vehicle", "baseline"):
            raise ConfigurationError(f"unknown plan mode {self.mode!r}")
        if not self.hops:
            raise ConfigurationError("a route plan must contain at least one hop")
        counted = [h for h in self.hops if h.counted]
        total = sum(h.energy_j for h in counted)
        if abs(total - self.total_energy_j) > 1e-9 * max(1.0, abs(total)):
            raise ConfigurationError("total_energy_j does not match the counted hop energies")
        composed = end_to_end_outage([h.outage for h in counted])
        if abs(composed - self.end_to_end_outage) > 1e-9:
            raise ConfigurationError("end_to_end_outage does not match the counted hop outages")
        if self.mode == "vehicle":
            if self.hop_split is None or self.handoff_point is None:
                raise ConfigurationError("vehicle plans must carry hop_split and handoff_point")
            m, n = self.hop_split
            if m != len(counted) or not 1 <= n <= m - 1:
                raise ConfigurationError(f"inconsistent hop split ({m}, {n})")
        elif self.hop_split is not None:
            raise ConfigurationError("baseline plans carry no hop split")

    @property
    def counted_hops(self) -> Tuple[Hop, ...]:
        return tuple(h for h in self.hops if h.counted)

    @property
    def hop_count(self) -> int:
        """Budget-counted hops (the vehicle delivery hop is excluded)."""
        return len(self.counted_hops)


@dataclass(frozen=True)
class HandoffChoice:
    road_index: int
    point: Point
    power_w: float


@dataclass(frozen=True)
class PlaneASegment:
    """Source-side half route: node path, then a hand-off to the vehicle."""

    node_ids: Tuple[int, ...]
    handoff_index: int
    handoff_point: Point
    energy_j: float


@dataclass(frozen=True)
class PlaneBSegment:
    """Destination-side half route, starting at a handoff candidate."""

    node_ids: Tuple[int, ...]
    energy_j: float


def _node_endpoint(cache: GeometryCache, index: int) -> Endpoint:
    node = cache.topology.nodes[index]
    return Endpoint(node_id=node.id, point=node.point)


def _road_endpoint(cache: GeometryCache, road_index: int) -> Endpoint:
    return Endpoint(node_id=None, point=cache.topology.road_points[road_index])


def _make_hop(
    cache: GeometryCache, tx: Endpoint, rx: Endpoint, power_w: float
) -> Hop:
    geom = LinkGeometry(
        tx_rx_distance=distance(tx.point, rx.point),
        jammers=tuple(
            (j.power_w, distance(j.point, rx.point)) for j in cache.topology.jammers
        ),
    )
    return Hop(
        tx=tx,
        rx=rx,
        power_w=power_w,
        outage=link_outage(power_w, geom, cache.qos),
        energy_j=link_energy(power_w, cache.msg),
        counted=True,
    )


def _build_vehicle_plan(
    cache: GeometryCache,
    tables: PowerTables,
    a_index_path: Sequence[int],
    handoff_road_index: int,
    b_index_path: Sequence[int],
    split: Tuple[int, int],
) -> RoutePlan:
    hops: List[Hop] = []
    for u, v in zip(a_index_path, a_index_path[1:]):
        hops.append(
            _make_hop(
                cache,
                _node_endpoint(cache, u),
                _node_endpoint(cache, v),
                float(tables.power_node[u, v]),
            )
        )
    last_a = a_index_path[-1]
    hops.append(
        _make_hop(
            cache,
            _node_endpoint(cache, last_a),
            _road_endpoint(cache, handoff_road_index),
            float(tables.power_hand[last_a, handoff_road_index]),
        )
    )
    sigma_index = b_index_path[0]
    sigma_id = cache.node_ids[sigma_index]
    delivery = _road_endpoint(cache, cache.delivery_road_index[sigma_id])
    hops.append(
        Hop(
            tx=delivery,
            rx=_node_endpoint(cache, sigma_index),
            power_w=None,
            outage=None,
            energy_j=0.0,
            counted=False,
        )
    )
    for u, v in zip(b_index_path, b_index_path[1:]):
        hops.append(
            _make_hop(
                cache,
                _node_endpoint(cache, u),
                _node_endpoint(cache, v),
                float(tables.power_node[u, v]),
            )
        )
    counted = [h for h in hops if h.counted]
    return RoutePlan(
        mode="vehicle",
        hops=tuple(hops),
        total_energy_j=sum(h.energy_j for h in counted),
        end_to_end_outage=end_to_end_outage([h.outage for h in counted]),
        hop_split=split,
        handoff_point=cache.topology.road_points[handoff_road_index],
    )


def _build_baseline_plan(
    cache: GeometryCache, tables: PowerTables, index_path: Sequence[int]
) -> RoutePlan:
    hops = [
        _make_hop(
            cache,
            _node_endpoint(cache, u),
            _node_endpoint(cache, v),
            float(tables.power_node[u, v]),
        )
        for u, v in zip(index_path, index_path[1:])
    ]
    return RoutePlan(
        mode="baseline",
        hops=tuple(hops),
        total_energy_j=sum(h.energy_j for h in hops),
        end_to_end_outage=end_to_end_outage([h.outage for h in hops]),
        hop_split=None,
        handoff_point=None,
    )


# ---------------------------------------------------------------------------
# Handoff selection
# ---------------------------------------------------------------------------


def select_handoff(
    tx_point: Point,
    road_points: Sequence[Point],
    jammers: Sequence[Jammer],
    qos: QosParams,
    target: float,
    *,
    options: Optional[SolverOptions] = None,
) -> Optional[HandoffChoice]:
    """Scan every road point and pick the hand-off position for one node.

    The default rule minimizes the solved transmit power at the per-link
    target; ``max-outage`` instead picks the feasible point that demands
    the most power. Ties resolve to the earliest point along the road.
    """
    options = options or SolverOptions()
    best: Optional[HandoffChoice] = None
    for idx, rp in enumerate(road_points):
        jam = tuple((j.power_w, distance(j.point, rp)) for j in jammers)
        if any(p > 0.0 and d == 0.0 for p, d in jam):
            continue  # co-located jammer saturates the outage at any power
        geom = LinkGeometry(tx_rx_distance=distance(tx_point, rp), jammers=jam)
        res = min_power_for_outage(
            target,
            geom,
            qos,
            tol=options.tol,
            power_floor_w=options.power_floor_w,
            approximate=options.approximate,
        )
        if not res.feasible:
            continue
        if (
            best is None
            or (options.handoff_rule == "min-power" and res.power_w < best.power_w)
            or (options.handoff_rule == "max-outage" and res.power_w > best.power_w)
        ):
            best = HandoffChoice(road_index=idx, point=rp, power_w=res.power_w)
    return best


def _handoff_best(
    cache: GeometryCache, tables: PowerTables
) -> Tuple[np.ndarray, np.ndarray]:
    """Per-node best road point under the configured rule.

    Returns (cost, road index) arrays over all nodes; cost is ``inf`` where
    no road point is feasible.
    """
    energy = tables.energy_hand
    rows = np.arange(energy.shape[0])
    if cache.options.handoff_rule == "min-power":
        idx = energy.argmin(axis=1)
    else:
        masked = np.where(np.isfinite(energy), energy, -np.inf)
        idx = masked.argmax(axis=1)
    return energy[rows, idx], idx


# ---------------------------------------------------------------------------
# Planners
# ---------------------------------------------------------------------------


def plan_plane_a(
    topology: Topology,
    n: int,
    target: float,
    qos: QosParams,
    msg: MessageSpec,
    *,
    options: Optional[SolverOptions] = None,
) -> Optional[PlaneASegment]:
    """Cheapest n-hop plane-A walk from the source into the vehicle's lane.

    The first n - 1 hops stay on plane-A nodes; hop n hands the message to
    the vehicle at the transmitting node's best road point.
    """
    if n < 1:
        raise ConfigurationError(f"plane-A hop count must be >= 1, got {n}")
    options = options or SolverOptions()
    cache = GeometryCache.build(topology, qos, msg, options)
    tables = compute_power_tables(cache, target)
    return _extract_plane_a(cache, tables, n)


def _extract_plane_a(
    cache: GeometryCache, tables: PowerTables, n: int
) -> Optional[PlaneASegment]:
    a_idx = cache.a_indices
    pos = {g: i for i, g in enumerate(a_idx)}
    start = np.full(len(a_idx), np.inf)
    start[pos[cache.source_index]] = 0.0
    energy = tables.energy_node[np.ix_(a_idx, a_idx)]
    costs, preds = _dp_sweep(energy, start, n - 1)
    hand_cost, hand_idx = _handoff_best(cache, tables)
    totals = costs[n - 1] + hand_cost[a_idx]
    best = int(totals.argmin())
    if not math.isfinite(totals[best]):
        return None
    local_path = _walk_back(preds, best, n - 1)
    index_path = [int(a_idx[i]) for i in local_path]
    road_index = int(hand_idx[a_idx[best]])
    return PlaneASegment(
        node_ids=tuple(cache.node_ids[i] for i in index_path),
        handoff_index=road_index,
        handoff_point=cache.topology.road_points[road_index],
        energy_j=float(totals[best]),
    )


def plan_plane_b(
    topology: Topology,
    k: int,
    candidates: Iterable[int],
    target: float,
    qos: QosParams,
    msg: MessageSpec,
    *,
    options: Optional[SolverOptions] = None,
) -> Optional[PlaneBSegment]:
    """Cheapest k-hop plane-B walk from any candidate node to the destination.

    Candidates are the nodes the vehicle can deliver to. A single-hop walk
    requires a candidate distinct from the destination; self-links are
    never allowed.
    """
    if k < 1:
        raise ConfigurationError(f"plane-B hop count must be >= 1, got {k}")
    options = options or SolverOptions()
    cache = GeometryCache.build(topology, qos, msg, options)
    tables = compute_power_tables(cache, target)
    return _extract_plane_b(cache, tables, k, tuple(sorted(set(candidates))))


def _extract_plane_b(
    cache: GeometryCache, tables: PowerTables, k: int, candidate_ids: Tuple[int, ...]
) -> Optional[PlaneBSegment]:
    b_idx = cache.b_indices
    pos = {g: i for i, g in enumerate(b_idx)}
    start = np.full(len(b_idx), np.inf)
    for cid in candidate_ids:
        gi = cache.index_of(cid)
        if gi not in pos:
            raise ConfigurationError(f"candidate node {cid} is not on plane B")
        start[pos[gi]] = 0.0
    energy = tables.energy_node[np.ix_(b_idx, b_idx)]
    costs, preds = _dp_sweep(energy, start, k)
    dest_pos = pos[cache.dest_index]
    if not math.isfinite(costs[k][dest_pos]):
        return None
    local_path = _walk_back(preds, dest_pos, k)
    index_path = [int(b_idx[i]) for i in local_path]
    return PlaneBSegment(
        node_ids=tuple(cache.node_ids[i] for i in index_path),
        energy_j=float(costs[k][dest_pos]),
    )


def _hop_limit(cache: GeometryCache) -> int:
    n_nodes = len(cache.node_ids)
    limit = n_nodes - 1
    if cache.options.max_hops is not None:
        limit = min(limit, cache.options.max_hops)
    return limit


def plan_with_vehicle(
    topology: Topology,
    qos: QosParams,
    msg: MessageSpec,
    road_points: Optional[Sequence[Point]] = None,
    *,
    options: Optional[SolverOptions] = None,
) -> Optional[RoutePlan]:
    """Optimal vehicle-assisted route, or None when no hop split is feasible.

    Scans total hop counts m and plane splits n in lexicographic order,
    re-pricing every link at the per-link outage target for m counted
    hops. The vehicle's delivery hop is free and uncounted.
    """
    options = options or SolverOptions()
    if road_points is not None:
        topology = dataclasses.replace(topology, road_points=tuple(road_points))
    cache = GeometryCache.build(topology, qos, msg, options)
    best: Optional[Tuple[float, int, int]] = None
    a_idx, b_idx = cache.a_indices, cache.b_indices
    a_pos = {g: i for i, g in enumerate(a_idx)}
    b_pos = {g: i for i, g in enumerate(b_idx)}
    start_a = np.full(len(a_idx), np.inf)
    start_a[a_pos[cache.source_index]] = 0.0
    start_b = np.full(len(b_idx), np.inf)
    for sigma in cache.theta_ids:
        start_b[b_pos[cache.index_of(sigma)]] = 0.0
    dest_pos = b_pos[cache.dest_index]
    energy_a_of = lambda t: t.energy_node[np.ix_(a_idx, a_idx)]
    energy_b_of = lambda t: t.energy_node[np.ix_(b_idx, b_idx)]

    for m in range(2, _hop_limit(cache) + 1):
        tables = compute_power_tables(cache, per_link_target(qos.outage_budget, m))
        a_costs, _ = _dp_sweep(energy_a_of(tables), start_a, m - 2)
        b_costs, _ = _dp_sweep(energy_b_of(tables), start_b, m - 1)
        hand_cost, _ = _handoff_best(cache, tables)
        hand_a = hand_cost[a_idx]
        for n in range(1, m):
            total = float((a_costs[n - 1] + hand_a).min() + b_costs[m - n][dest_pos])
            if math.isfinite(total) and (best is None or total < best[0]):
                best = (total, m, n)
    if best is None:
        return None

    _, m, n = best
    tables = compute_power_tables(cache, per_link_target(qos.outage_budget, m))
    a_costs, a_preds = _dp_sweep(energy_a_of(tables), start_a, m - 2)
    b_costs, b_preds = _dp_sweep(energy_b_of(tables), start_b, m - 1)
    hand_cost, hand_idx = _handoff_best(cache, tables)
    totals = a_costs[n - 1] + hand_cost[a_idx]
    u_local = int(totals.argmin())
    a_path = [int(a_idx[i]) for i in _walk_back(a_preds, u_local, n - 1)]
    b_path = [int(b_idx[i]) for i in _walk_back(b_preds, dest_pos, m - n)]
    return _build_vehicle_plan(
        cache,
        tables,
        a_path,
        int(hand_idx[a_idx[u_local]]),
        b_path,
        split=(m, n),
    )


def plan_without_vehicle(
    topology: Topology,
    qos: QosParams,
    msg: MessageSpec,
    *,
    options: Optional[SolverOptions] = None,
) -> Optional[RoutePlan]:
    """Optimal route over the full node set with no vehicle assistance."""
    options = options or SolverOptions()
    cache = GeometryCache.build(topology, qos, msg, options)
    n_nodes = len(cache.node_ids)
    start = np.full(n_nodes, np.inf)
    start[cache.source_index] = 0.0
    best: Optional[Tuple[float, int]] = None
    for m in range(1, _hop_limit(cache) + 1):
        tables = compute_power_tables(cache, per_link_target(qos.outage_budget, m))
        costs, _ = _dp_sweep(tables.energy_node, start, m)
        total = float(costs[m][cache.dest_index])
        if math.isfinite(total) and (best is None or total < best[0]):
            best = (total, m)
    if best is None:
        return None
    _, m = best
    tables = compute_power_tables(cache, per_link_target(qos.outage_budget, m))
    _, preds = _dp_sweep(tables.energy_node, start, m)
    path = _walk_back(preds, cache.dest_index, m)
    return _build_baseline_plan(cache, tables, path)


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------


def _walks(indices: Sequence[int], first: int, interior: int) -> Iterable[List[int]]:
    """All walks [first, i_1 .. i_interior] without consecutive repeats."""
    for mids in itertools.product(indices, repeat=interior):
        path = [first, *mids]
        if any(a == b for a, b in zip(path, path[1:])):
            continue
        yield path


def _walk_cost(path: Sequence[int], energy: np.ndarray) -> float:
    total = 0.0
    for u, v in zip(path, path[1:]):
        e = energy[u, v]
        if not math.isfinite(e):
            return math.inf
        total += float(e)
    return total


def brute_force_plan(
    topology: Topology,
    qos: QosParams,
    msg: MessageSpec,
    *,
    with_vehicle: bool,
    options: Optional[SolverOptions] = None,
) -> Optional[RoutePlan]:
    """Exhaustive reference planner with the DP's exact semantics.

    Enumerates every hop-count-bounded node walk (and every road handoff
    column) instead of recursing, so it shares no search structure with the
    dynamic program. Guarded against oversized instances.
    """
    options = options or SolverOptions()
    cache = GeometryCache.build(topology, qos, msg, options)
    limit = _hop_limit(cache)
    n_a, n_b = len(cache.a_indices), len(cache.b_indices)
    n_all = len(cache.node_ids)
    if with_vehicle:
        sequences = sum(
            n_a ** (n - 1) + len(cache.theta_ids) * n_b ** (m - n - 1)
            for m in range(2, limit + 1)
            for n in range(1, m)
        )
    else:
        sequences = sum(n_all ** (m - 1) for m in range(1, limit + 1))
    if sequences > options.oracle_sequence_limit:
        raise OracleSizeError(
            f"brute force would enumerate {sequences} sequences "
            f"(limit {options.oracle_sequence_limit})"
        )

    if not with_vehicle:
        best: Optional[Tuple[float, int, List[int]]] = None
        all_indices = list(range(n_all))
        for m in range(1, limit + 1):
            tables = compute_power_tables(cache, per_link_target(qos.outage_budget, m))
            for walk in _walks(all_indices, cache.source_index, m - 1):
                if walk[-1] == cache.dest_index:
                    continue
                path = [*walk, cache.dest_index]
                cost = _walk_cost(path, tables.energy_node)
                if math.isfinite(cost) and (best is None or cost < best[0]):
                    best = (cost, m, path)
        if best is None:
            return None
        _, m, path = best
        tables = compute_power_tables(cache, per_link_target(qos.outage_budget, m))
        return _build_baseline_plan(cache, tables, path)

    theta_indices = [cache.index_of(i) for i in cache.theta_ids]
    best_v: Optional[Tuple[float, int, int, List[int], int, List[int]]] = None
    a_list = [int(i) for i in cache.a_indices]
    b_list = [int(i) for i in cache.b_indices]
    for m in range(2, limit + 1):
        tables = compute_power_tables(cache, per_link_target(qos.outage_budget, m))
        for n in range(1, m):
            side_a: Optional[Tuple[float, List[int], int]] = None
            for walk in _walks(a_list, cache.source_index, n - 1):
                base = _walk_cost(walk, tables.energy_node)
                if not math.isfinite(base):
                    continue
                u = walk[-1]
                pick: Optional[Tuple[float, int]] = None
                for r in range(tables.power_hand.shape[1]):
                    p = float(tables.power_hand[u, r])
                    if not math.isfinite(p):
                        continue
                    if (
                        pick is None
                        or (options.handoff_rule == "min-power" and p < pick[0])
                        or (options.handoff_rule == "max-outage" and p > pick[0])
                    ):
                        pick = (p, r)
                if pick is None:
                    continue
                cand = base + float(tables.energy_hand[u, pick[1]])
                if side_a is None or cand < side_a[0]:
                    side_a = (cand, walk, pick[1])
            if side_a is None:
                continue
            k = m - n
            side_b: Optional[Tuple[float, List[int]]] = None
            for sigma in theta_indices:
                for walk in _walks(b_list, sigma, k - 1):
                    if walk[-1] == cache.dest_index:
                        continue
                    path = [*walk, cache.dest_index]
                    cost = _walk_cost(path, tables.energy_node)
                    if math.isfinite(cost) and (side_b is None or cost < side_b[0]):
                        side_b = (cost, path)
            if side_b is None:
                continue
            total = side_a[0] + side_b[0]
            if best_v is None or total < best_v[0]:
                best_v = (total, m, n, side_a[1], side_a[2], side_b[1])
    if best_v is None:
        return None
    _, m, n, a_path, road_index, b_path = best_v
    tables = compute_power_tables(cache, per_link_target(qos.outage_budget, m))
    return _build_vehicle_plan(cache, tables, a_path, road_index, b_path, split=(m, n))


# ---------------------------------------------------------------------------
# Auditing and serialization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AuditReport:
    """Independent re-check of a plan against the raw outage model."""

    end_to_end_outage: float
    outage_within_budget: bool
    max_counted_power_w: float
    powers_within_cap: bool
    recomputed_energy_j: float
    energy_consistent: bool

    @property
    def passed(self) -> bool:
        return self.outage_within_budget and self.powers_within_cap and self.energy_consistent


def audit_route(
    plan: RoutePlan,
    topology: Topology,
    qos: QosParams,
    msg: MessageSpec,
) -> AuditReport:
    """Recompute outages and energies of every counted hop from geometry.

    The recorded per-hop fields are ignored except for transmit power, so
    a tampered power shows up either as a budget violation or as an energy
    mismatch.
    """
    outages: List[float] = []
    max_power = 0.0
    energy = 0.0
    for hop in plan.hops:
        if not hop.counted:
            continue
        if hop.power_w is None:
            raise ConfigurationError("counted hop without a transmit power")
        geom = LinkGeometry(
            tx_rx_distance=distance(hop.tx.point, hop.rx.point),
            jammers=tuple(
                (j.power_w, distance(j.point, hop.rx.point)) for j in topology.jammers
            ),
        )
        outages.append(link_outage(hop.power_w, geom, qos))
        max_power = max(max_power, hop.power_w)
        energy += link_energy(hop.power_w, msg)
    composed = end_to_end_outage(outages)
    return AuditReport(
        end_to_end_outage=composed,
        outage_within_budget=composed <= qos.outage_budget + 1e-9,
        max_counted_power_w=max_power,
        powers_within_cap=max_power <= qos.max_power_w * (1.0 + 1e-12),
        recomputed_energy_j=energy,
        energy_consistent=abs(energy - plan.total_energy_j)
        <= 1e-9 * max(1.0, abs(energy), abs(plan.total_energy_j)),
    )


def _endpoint_to_dict(e: Endpoint) -> dict:
    return {"node": e.node_id, "x": e.point.x, "y": e.point.y}


def _endpoint_from_dict(doc: dict) -> Endpoint:
    return Endpoint(
        node_id=None if doc["node"] is None else int(doc["node"]),
        point=Point(float(doc["x"]), float(doc["y"])),
    )


def plan_to_dict(plan: RoutePlan) -> dict:
    return {
        "mode": plan.mode,
        "total_energy_j": plan.total_energy_j,
        "end_to_end_outage": plan.end_to_end_outage,
        "hop_split": None if plan.hop_split is None else list(plan.hop_split),
        "handoff_point": None
        if plan.handoff_point is None
        else [plan.handoff_point.x, plan.handoff_point.y],
        "hops": [
            {
                "from": _endpoint_to_dict(h.tx),
                "to": _endpoint_to_dict(h.rx),
                "power_w": h.power_w,
                "outage": h.outage,
                "energy_j": h.energy_j,
                "counted": h.counted,
            }
            for h in plan.hops
        ],
    }


def plan_from_dict(doc: dict) -> RoutePlan:
    return RoutePlan(
        mode=str(doc["mode"]),
        hops=tuple(
            Hop(
                tx=_endpoint_from_dict(h["from"]),
                rx=_endpoint_from_dict(h["to"]),
                power_w=None if h["power_w"] is None else float(h["power_w"]),
                outage=None if h["outage"] is None else float(h["outage"]),
                energy_j=float(h["energy_j"]),
                counted=bool(h["counted"]),
            )
            for h in doc["hops"]
        ),
        total_energy_j=float(doc["total_energy_j"]),
        end_to_end_outage=float(doc["end_to_end_outage"]),
        hop_split=None if doc["hop_split"] is None else tuple(doc["hop_split"]),
        handoff_point=None
        if doc["handoff_point"] is None
        else Point(*doc["handoff_point"]),
    )


def save_plan(plan: RoutePlan, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(plan_to_dict(plan), indent=2) + "\n")


def load_plan(path: Union[str, Path]) -> RoutePlan:
    return plan_from_dict(json.loads(Path(path).read_text()))
