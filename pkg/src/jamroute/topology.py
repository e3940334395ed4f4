"""Random jammed-network topologies split by a road into two half-planes.

Nodes and jammers are drawn from independent Poisson point processes (or
placed with fixed counts) on a rectangular area. A straight road crosses the
area and partitions the nodes into plane A (the source's side) and plane B
(the destination's side). The road is discretized into candidate positions
for a relay vehicle travelling along it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    ConfigurationError,
    ConfigParseError,
    DegeneratePositionError,
    GenerationError,
)

# Sampling is retried with an incremented sub-seed when a draw violates a
# structural requirement (empty plane, coincident endpoints, ...).
MAX_GENERATION_ATTEMPTS = 1000

# Road points must satisfy the line equation to this absolute tolerance.
ROAD_COLINEARITY_TOL = 1e-9


@dataclass(frozen=True)
class Point:
    """A position in the plane, in meters."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ConfigurationError(f"point coordinates must be finite, got ({self.x}, {self.y})")

    def as_tuple(self) -> Tuple[float, float]:
        return (self.x, self.y)


def distance(p: Point, q: Point) -> float:
    """Euclidean distance between two points in meters."""
    return math.hypot(p.x - q.x, p.y - q.y)


@dataclass(frozen=True)
class RoadLine:
    """The road ``a*x + y + b = 0``. Vertical roads are not representable."""

    a: float
    b: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ConfigurationError(f"road coefficients must be finite, got a={self.a} b={self.b}")

    @classmethod
    def from_coefficients(cls, cx: float, cy: float, c0: float) -> "RoadLine":
        """Build from the general form ``cx*x + cy*y + c0 = 0`` (``cy != 0``)."""
        if cy == 0.0:
            raise ConfigurationError("vertical road lines (cy == 0) are not supported")
        return cls(a=cx / cy, b=c0 / cy)

    def offset(self, p: Point) -> float:
        """Signed value ``a*x + y + b``; its sign identifies the half-plane."""
        return self.a * p.x + p.y + self.b

    def y_at(self, x: float) -> float:
        return -self.a * x - self.b


def plane_of(p: Point, road: RoadLine, source_side_sign: float) -> str:
    """Label ``p`` as ``'A'`` (source's side of the road) or ``'B'``.

    Raises DegeneratePositionError if ``p`` lies exactly on the line.
    """
    value = road.offset(p)
    if value == 0.0:
        raise DegeneratePositionError(f"point ({p.x}, {p.y}) lies exactly on the road line")
    return "A" if (value > 0.0) == (source_side_sign > 0.0) else "B"


def discretize_road(
    road: RoadLine, area: Tuple[float, float], step: float
) -> Tuple[Point, ...]:
    """Sample the road inside the area rectangle every ``step`` meters.

    Returns points ordered along the road from the smaller-x boundary
    intersection to the larger-x one. Both boundary intersections are always
    included, so the final gap may be shorter than ``step``.
    """
    width, height = area
    if width <= 0.0 or height <= 0.0:
        raise ConfigurationError(f"area must be positive, got {width} x {height}")
    if step <= 0.0 or not math.isfinite(step):
        raise ConfigurationError(f"road step must be positive and finite, got {step}")

    eps = 1e-9
    candidates = []
    for x_edge in (0.0, width):
        y = road.y_at(x_edge)
        if -eps <= y <= height + eps:
            candidates.append((x_edge, min(max(y, 0.0), height)))
    if road.a != 0.0:
        for y_edge in (0.0, height):
            x = -(road.b + y_edge) / road.a
            if -eps <= x <= width + eps:
                candidates.append((min(max(x, 0.0), width), y_edge))

    # Collapse duplicates from corner hits, then keep the segment extremes.
    distinct: list[Tuple[float, float]] = []
    for cand in sorted(candidates):
        if not distinct or math.hypot(cand[0] - distinct[-1][0], cand[1] - distinct[-1][1]) > eps:
            distinct.append(cand)
    if len(distinct) < 2:
        raise ConfigurationError(
            f"road {road.a}*x + y + {road.b} = 0 does not cross the {width} x {height} area"
        )
    (x0, y0), (x1, y1) = distinct[0], distinct[-1]

    length = math.hypot(x1 - x0, y1 - y0)
    ux, uy = (x1 - x0) / length, (y1 - y0) / length
    whole_steps = int(math.floor(length / step + eps))
    points = [Point(x0 + k * step * ux, y0 + k * step * uy) for k in range(whole_steps + 1)]
    if math.hypot(points[-1].x - x1, points[-1].y - y1) > eps:
        points.append(Point(x1, y1))
    return tuple(points)


@dataclass(frozen=True)
class Node:
    id: int
    point: Point
    plane: str

    def __post_init__(self) -> None:
        if self.plane not in ("A", "B"):
            raise ConfigurationError(f"node plane must be 'A' or 'B', got {self.plane!r}")


@dataclass(frozen=True)
class Jammer:
    id: int
    point: Point
    power_w: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.power_w) or self.power_w < 0.0:
            raise ConfigurationError(f"jammer power must be finite and >= 0, got {self.power_w}")


@dataclass(frozen=True)
class TopologyConfig:
    """Parameters of the random topology draw.

    Node and jammer populations are given either as a Poisson intensity
    (expected count over the full area) or as a fixed count; exactly one of
    the two must be set for each population.
    """

    area_width: float
    area_height: float
    road: RoadLine
    node_intensity: Optional[float] = None
    node_count: Optional[int] = None
    jammer_intensity: Optional[float] = None
    jammer_count: Optional[int] = None
    road_step: float = 1.0
    rng_seed: int = 0
    source_id: Optional[int] = None
    dest_id: Optional[int] = None

    def __post_init__(self) -> None:
        if not (self.area_width > 0.0 and math.isfinite(self.area_width)):
            raise ConfigurationError(f"area_width must be positive, got {self.area_width}")
        if not (self.area_height > 0.0 and math.isfinite(self.area_height)):
            raise ConfigurationError(f"area_height must be positive, got {self.area_height}")
        if (self.node_intensity is None) == (self.node_count is None):
            raise ConfigurationError("exactly one of node_intensity or node_count must be set")
        if (self.jammer_intensity is None) == (self.jammer_count is None):
            raise ConfigurationError("exactly one of jammer_intensity or jammer_count must be set")
        if self.node_intensity is not None and self.node_intensity <= 0.0:
            raise ConfigurationError(f"node_intensity must be positive, got {self.node_intensity}")
        if self.node_count is not None and self.node_count < 2:
            raise ConfigurationError(f"node_count must be at least 2, got {self.node_count}")
        if self.jammer_intensity is not None and self.jammer_intensity < 0.0:
            raise ConfigurationError(f"jammer_intensity must be >= 0, got {self.jammer_intensity}")
        if self.jammer_count is not None and self.jammer_count < 0:
            raise ConfigurationError(f"jammer_count must be >= 0, got {self.jammer_count}")
        if self.road_step <= 0.0:
            raise ConfigurationError(f"road_step must be positive, got {self.road_step}")
        if self.rng_seed < 0:
            raise ConfigurationError(f"rng_seed must be a non-negative integer, got {self.rng_seed}")

    @property
    def area(self) -> Tuple[float, float]:
        return (self.area_width, self.area_height)


@dataclass(frozen=True)
class Topology:
    """An immutable drawn topology; all planner inputs derive from it."""

    nodes: Tuple[Node, ...]
    jammers: Tuple[Jammer, ...]
    road: RoadLine
    road_points: Tuple[Point, ...]
    source_id: int
    dest_id: int
    seed: int

    def __post_init__(self) -> None:
        node_ids = [n.id for n in self.nodes]
        jam_ids = [j.id for j in self.jammers]
        if len(set(node_ids)) != len(node_ids):
            raise ConfigurationError("node ids must be unique")
        if len(set(jam_ids)) != len(jam_ids):
            raise ConfigurationError("jammer ids must be unique")
        # Keep list order aligned with id order so positional argmin
        # tie-breaking resolves toward the smaller id.
        object.__setattr__(self, "nodes", tuple(sorted(self.nodes, key=lambda n: n.id)))
        object.__setattr__(self, "jammers", tuple(sorted(self.jammers, key=lambda j: j.id)))
        by_id = {n.id: n for n in self.nodes}
        if self.source_id not in by_id or self.dest_id not in by_id:
            raise ConfigurationError("source_id and dest_id must reference existing nodes")
        if self.source_id == self.dest_id:
            raise ConfigurationError("source and destination must be distinct nodes")
        if by_id[self.source_id].plane != "A":
            raise ConfigurationError("source node must lie in plane A")
        if by_id[self.dest_id].plane != "B":
            raise ConfigurationError("destination node must lie in plane B")
        side = self.road.offset(by_id[self.source_id].point)
        for n in self.nodes:
            value = self.road.offset(n.point)
            if value == 0.0:
                raise DegeneratePositionError(f"node {n.id} lies exactly on the road line")
            expected = "A" if (value > 0.0) == (side > 0.0) else "B"
            if n.plane != expected:
                raise ConfigurationError(
                    f"node {n.id} labeled plane {n.plane} but lies on plane {expected}'s side"
                )
        if len(self.road_points) < 2:
            raise ConfigurationError("road must carry at least two sampled points")
        for p in self.road_points:
            if abs(self.road.offset(p)) > ROAD_COLINEARITY_TOL:
                raise ConfigurationError(f"road point ({p.x}, {p.y}) is off the road line")

    def node(self, node_id: int) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(f"no node with id {node_id}")

    def plane_node_ids(self, plane: str) -> Tuple[int, ...]:
        return tuple(n.id for n in self.nodes if n.plane == plane)

    @property
    def source_side_sign(self) -> float:
        return math.copysign(1.0, self.road.offset(self.node(self.source_id).point))

    def node_positions(self) -> np.ndarray:
        return np.array([[n.point.x, n.point.y] for n in self.nodes], dtype=float)

    def jammer_positions(self) -> np.ndarray:
        return np.array([[j.point.x, j.point.y] for j in self.jammers], dtype=float).reshape(-1, 2)

    def jammer_powers(self) -> np.ndarray:
        return np.array([j.power_w for j in self.jammers], dtype=float)

    def road_point_array(self) -> np.ndarray:
        return np.array([[p.x, p.y] for p in self.road_points], dtype=float)


def nearest_plane_b_ids(topology: Topology) -> Tuple[int, ...]:
    """For each road point, the id of the nearest plane-B node (ties: smaller id)."""
    b_nodes = [n for n in topology.nodes if n.plane == "B"]
    if not b_nodes:
        raise ConfigurationError("topology has no plane-B nodes")
    b_xy = np.array([[n.point.x, n.point.y] for n in b_nodes], dtype=float)
    road_xy = topology.road_point_array()
    d2 = ((road_xy[:, None, :] - b_xy[None, :, :]) ** 2).sum(axis=2)
    # argmin returns the first minimum; b_nodes is id-sorted, so ties break
    # toward the smaller id.
    nearest = d2.argmin(axis=1)
    return tuple(b_nodes[i].id for i in nearest)


def handoff_candidates(topology: Topology) -> set[int]:
    """Node ids that are nearest plane-B neighbors of at least one road point."""
    return set(nearest_plane_b_ids(topology))


def generate_topology(config: TopologyConfig, jammer_power: float) -> Topology:
    """Draw a topology from the config, retrying structurally invalid samples.

    A draw is rejected (and retried with an incremented sub-seed) when it has
    fewer than two nodes, leaves either half-plane empty, puts the
    destination on the source's side, or selects the same node for both
    endpoints. After MAX_GENERATION_ATTEMPTS rejections a GenerationError is
    raised.
    """
    if not math.isfinite(jammer_power) or jammer_power < 0.0:
        raise ConfigurationError(f"jammer power must be finite and >= 0, got {jammer_power}")
    road_points = discretize_road(config.road, config.area, config.road_step)
    width, height = config.area

    for attempt in range(MAX_GENERATION_ATTEMPTS):
        rng = np.random.default_rng(config.rng_seed + attempt)
        n_nodes = (
            config.node_count
            if config.node_count is not None
            else int(rng.poisson(config.node_intensity))
        )
        node_xy = np.column_stack(
            [rng.uniform(0.0, width, n_nodes), rng.uniform(0.0, height, n_nodes)]
        )
        n_jam = (
            config.jammer_count
            if config.jammer_count is not None
            else int(rng.poisson(config.jammer_intensity))
        )
        jam_xy = np.column_stack(
            [rng.uniform(0.0, width, n_jam), rng.uniform(0.0, height, n_jam)]
        )

        if n_nodes < 2:
            continue

        # A node exactly on the road has no plane; redraw just that node.
        offsets = config.road.a * node_xy[:, 0] + node_xy[:, 1] + config.road.b
        for _ in range(100):
            on_line = offsets == 0.0
            if not on_line.any():
                break
            k = int(on_line.sum())
            node_xy[on_line] = np.column_stack(
                [rng.uniform(0.0, width, k), rng.uniform(0.0, height, k)]
            )
            offsets = config.road.a * node_xy[:, 0] + node_xy[:, 1] + config.road.b
        else:
            continue

        if config.source_id is not None:
            if not 0 <= config.source_id < n_nodes:
                raise ConfigurationError(f"source_id {config.source_id} out of range for {n_nodes} nodes")
            source = config.source_id
        else:
            source = int(((node_xy - [0.0, 0.0]) ** 2).sum(axis=1).argmin())
        if config.dest_id is not None:
            if not 0 <= config.dest_id < n_nodes:
                raise ConfigurationError(f"dest_id {config.dest_id} out of range for {n_nodes} nodes")
            dest = config.dest_id
        else:
            dest = int(((node_xy - [width, height]) ** 2).sum(axis=1).argmin())
        if source == dest:
            continue

        source_sign = offsets[source] > 0.0
        planes = np.where((offsets > 0.0) == source_sign, "A", "B")
        if planes[dest] != "B" or not (planes == "A").any() or not (planes == "B").any():
            continue

        nodes = tuple(
            Node(id=i, point=Point(float(x), float(y)), plane=str(p))
            for i, ((x, y), p) in enumerate(zip(node_xy, planes))
        )
        jammers = tuple(
            Jammer(id=i, point=Point(float(x), float(y)), power_w=jammer_power)
            for i, (x, y) in enumerate(jam_xy)
        )
        return Topology(
            nodes=nodes,
            jammers=jammers,
            road=config.road,
            road_points=road_points,
            source_id=source,
            dest_id=dest,
            seed=config.rng_seed,
        )

    raise GenerationError(
        f"no structurally valid topology after {MAX_GENERATION_ATTEMPTS} draws "
        f"(seed {config.rng_seed})"
    )


def topology_to_dict(topology: Topology) -> dict:
    return {
        "seed": topology.seed,
        "road": {"a": topology.road.a, "b": topology.road.b},
        "source_id": topology.source_id,
        "dest_id": topology.dest_id,
        "nodes": [
            {"id": n.id, "x": n.point.x, "y": n.point.y, "plane": n.plane}
            for n in topology.nodes
        ],
        "jammers": [
            {"id": j.id, "x": j.point.x, "y": j.point.y, "power_w": j.power_w}
            for j in topology.jammers
        ],
        "road_points": [[p.x, p.y] for p in topology.road_points],
    }


def topology_from_dict(doc: dict) -> Topology:
    try:
        road = RoadLine(a=float(doc["road"]["a"]), b=float(doc["road"]["b"]))
        nodes = tuple(
            Node(id=int(n["id"]), point=Point(float(n["x"]), float(n["y"])), plane=str(n["plane"]))
            for n in doc["nodes"]
        )
        jammers = tuple(
            Jammer(id=int(j["id"]), point=Point(float(j["x"]), float(j["y"])), power_w=float(j["power_w"]))
            for j in doc["jammers"]
        )
        return Topology(
            nodes=nodes,
            jammers=jammers,
            road=road,
            road_points=tuple(Point(float(x), float(y)) for x, y in doc["road_points"]),
            source_id=int(doc["source_id"]),
            dest_id=int(doc["dest_id"]),
            seed=int(doc["seed"]),
        )
    except KeyError as exc:
        raise ConfigParseError(f"topology document is missing field {exc.args[0]!r}") from exc


def save_topology(topology: Topology, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(topology_to_dict(topology), indent=2) + "\n")


def load_topology(path: Union[str, Path]) -> Topology:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"invalid topology document {path}: {exc}") from exc
    return topology_from_dict(doc)
