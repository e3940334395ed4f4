"""Shared hand-built topologies for the test suite."""
from __future__ import annotations

import pytest

from jamroute import Jammer, Node, Point, RoadLine, Topology


def make_topology(nodes, jammers, road, road_points, source_id, dest_id, seed=0):
    return Topology(
        nodes=tuple(nodes),
        jammers=tuple(jammers),
        road=road,
        road_points=tuple(road_points),
        source_id=source_id,
        dest_id=dest_id,
        seed=seed,
    )


@pytest.fixture
def demo_topology():
    """Five nodes straddling the horizontal road y=50, two jammers."""
    road = RoadLine(a=0.0, b=-50.0)
    nodes = [
        Node(0, Point(10.0, 10.0), "A"),
        Node(1, Point(40.0, 30.0), "A"),
        Node(2, Point(55.0, 65.0), "B"),
        Node(3, Point(80.0, 80.0), "B"),
        Node(4, Point(90.0, 90.0), "B"),
    ]
    jammers = [
        Jammer(0, Point(50.0, 20.0), 0.1),
        Jammer(1, Point(60.0, 75.0), 0.1),
    ]
    road_points = [Point(x, 50.0) for x in (0.0, 25.0, 50.0, 75.0, 100.0)]
    return make_topology(nodes, jammers, road, road_points, 0, 4)


@pytest.fixture
def micro_topology():
    """Three nodes, one jammer sitting on the road."""
    road = RoadLine(a=0.0, b=-50.0)
    nodes = [
        Node(0, Point(20.0, 20.0), "A"),
        Node(1, Point(60.0, 60.0), "B"),
        Node(2, Point(80.0, 80.0), "B"),
    ]
    jammers = [Jammer(0, Point(50.0, 50.0), 0.1)]
    road_points = [Point(x, 50.0) for x in (0.0, 50.0, 100.0)]
    return make_topology(nodes, jammers, road, road_points, 0, 2)


@pytest.fixture
def jammerless_topology():
    """No interference anywhere; every link prices at the power floor."""
    road = RoadLine(a=0.0, b=-50.0)
    nodes = [
        Node(0, Point(10.0, 40.0), "A"),
        Node(1, Point(40.0, 60.0), "B"),
        Node(2, Point(60.0, 60.0), "B"),
        Node(3, Point(90.0, 70.0), "B"),
    ]
    road_points = [Point(x, 50.0) for x in (0.0, 25.0, 50.0, 75.0, 100.0)]
    return make_topology(nodes, [], road, road_points, 0, 3)
