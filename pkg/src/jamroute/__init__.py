"""Minimum-energy routing for jammed ad-hoc networks, with an optional
road vehicle relaying messages across the jammed region for free."""

from .channel import (
    LinkGeometry,
    QosParams,
    approx_link_outage,
    end_to_end_outage,
    link_outage,
    mc_link_outage,
    sir_threshold,
)
from .errors import (
    ConfigParseError,
    ConfigurationError,
    DegeneratePositionError,
    GenerationError,
    OracleSizeError,
)
from .experiment import (
    ExperimentConfig,
    McLinkCheck,
    McValidationReport,
    SingleRunResult,
    SweepRecord,
    SweepSpec,
    build_topology,
    bundled_config,
    config_from_dict,
    config_to_dict,
    load_config,
    read_sweep_csv,
    resolve_config,
    run_mc_validation,
    run_single,
    run_sweep,
    save_config,
    write_sweep_csv,
)
from .planner import (
    AuditReport,
    DpTable,
    Endpoint,
    GeometryCache,
    HandoffChoice,
    Hop,
    PlaneASegment,
    PlaneBSegment,
    PowerTables,
    RoutePlan,
    SolverOptions,
    audit_route,
    brute_force_plan,
    compute_dp_table,
    compute_power_tables,
    load_plan,
    plan_plane_a,
    plan_plane_b,
    plan_with_vehicle,
    plan_without_vehicle,
    plan_from_dict,
    plan_to_dict,
    save_plan,
    select_handoff,
)
from .power import (
    MessageSpec,
    PowerSolveResult,
    link_energy,
    min_power_for_outage,
    per_link_target,
)
from .topology import (
    Jammer,
    Node,
    Point,
    RoadLine,
    Topology,
    TopologyConfig,
    discretize_road,
    distance,
    generate_topology,
    handoff_candidates,
    load_topology,
    nearest_plane_b_ids,
    plane_of,
    save_topology,
    topology_from_dict,
    topology_to_dict,
)

__version__ = "0.1.0"
