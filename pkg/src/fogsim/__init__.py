"""Hierarchical fog/cloud orchestration simulator with an airport workload.

The library layers bottom-up: seeded randomness, the agent tree, recursive
service placement, response-time prediction and dispatch, radio positioning,
floor analytics, recommendations, workload generation, and the event-driven
engine that ties them together. A FastAPI service and a thin CLI sit on top.
"""

from .analytics import (
    Advice,
    AdviceKind,
    Cluster,
    HeatMap,
    VirtualQueue,
    Zone,
    advise,
    detect_clusters,
    heatmap_csv_text,
    heatmap_ingest,
    heatmap_pgm_text,
    occupancy,
    queue_pop_on_space,
    zone_contains,
)
from .errors import FogsimError
from .harness import ExperimentResult, compare, run_experiment
from .placement import (
    PlacementDecision,
    PlacementOutcome,
    ServiceRequest,
    place,
    release,
    try_local,
)
from .positioning import (
    AccessPoint,
    PathLossParams,
    Position,
    RssiObservation,
    rssi_to_distance,
    serving_ap,
    trilaterate,
)
from .presets import PRESETS, SWEEP_RATES, build_preset_topology, resolve_preset
from .qos import QosPredictor, Sla, ViolationRecord, dispatch, qos_report
from .recommender import (
    Poi,
    ProfileStore,
    Recommendation,
    UserProfile,
    favorites,
    notifications,
    recommend,
    similarity,
)
from .rng import Stream
from .simnet import EventKind, MetricsReport, latency, latency_us, run
from .topology import (
    AgentKind,
    AgentNode,
    NodeSpec,
    Topology,
    TopologySpec,
    add_node,
    build_topology,
    elect_leader,
    remove_node,
    tree_path,
)
from .workload import (
    FlightEvent,
    FlightFeed,
    FlightStatus,
    Scenario,
    ScenarioParams,
    Traveler,
    default_terminal_map,
    emit_rssi,
    generate_scenario,
    new_uuid,
    poll_flights,
    position_at,
    reinstall,
    step_traveler,
)

__version__ = "0.1.0"
