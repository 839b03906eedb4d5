"""Airport proximity workload generation.

A scenario is a pure function of (params, seed): travelers with waypoint
itineraries and seeded installation uuids, a flight schedule, and a Poisson
request arrival stream. Travelers walk entrance -> security -> optional poi
detours -> gate and absorb at the gate. Devices hear every access point
within radio range through a log-distance model with Gaussian noise.
"""
from __future__ import annotations

import json
import math
import uuid as uuid_module
from dataclasses import dataclass, field, replace
from enum import Enum

from .analytics import Zone
from .errors import InvalidParams
from .positioning import AccessPoint, PathLossParams, Position, RssiObservation, distance_to_rssi
from .qos import Sla
from .recommender import Poi
from .rng import Stream
from .topology import NodeId, NodeSpec

US_PER_S = 1_000_000


# -- flights -------------------------------------------------------------------


class FlightStatus(Enum):
    SCHEDULED = "scheduled"
    BOARDING = "boarding"
    GATE_CHANGE = "gate_change"
    DELAYED = "delayed"
    DEPARTED = "departed"


@dataclass(frozen=True)
class FlightEvent:
    flight_id: str
    status: FlightStatus
    gate: str
    at: int  # microseconds of sim time


class FlightFeed:
    """Time-ordered flight events supporting idempotent incremental polls."""

    def __init__(self, events: list[FlightEvent]):
        self.events = sorted(events, key=lambda e: (e.at, e.flight_id, e.status.value))

    def initial_gate(self, flight_id: str) -> str | None:
        for event in self.events:
            if event.flight_id == flight_id:
                return event.gate
        return None


def poll_flights(feed: FlightFeed, since: int, now: int) -> list[FlightEvent]:
    """Events with timestamps in (since, now]; same window, same answer."""
    return [e for e in feed.events if since < e.at <= now]


# -- travelers -------------------------------------------------------------------


@dataclass(frozen=True)
class Waypoint:
    x: float
    y: float
    dwell_s: float = 0.0
    poi_id: str | None = None


@dataclass(frozen=True)
class Traveler:
    uuid: uuid_module.UUID
    itinerary: tuple  # Waypoints; the final one absorbs
    speed_m_s: float
    flight_id: str | None
    selected_topics: frozenset
    install_generation: int = 0
    clock_s: float = 0.0


def new_uuid(rng: Stream) -> uuid_module.UUID:
    """Random installation uuid drawn from the seeded stream only."""
    return uuid_module.UUID(int=rng.bits(128), version=4)


def position_at(traveler: Traveler, t_s: float) -> Position:
    """Where the traveler stands at time t: walk, dwell, then absorb."""
    wps = traveler.itinerary
    if not wps:
        raise InvalidParams("traveler has an empty itinerary")
    remaining = max(0.0, t_s)
    for i, wp in enumerate(wps):
        if remaining <= wp.dwell_s or i == len(wps) - 1:
            return Position(wp.x, wp.y)
        remaining -= wp.dwell_s
        nxt = wps[i + 1]
        dist = math.hypot(nxt.x - wp.x, nxt.y - wp.y)
        travel = dist / traveler.speed_m_s if dist > 0 else 0.0
        if remaining < travel:
            f = remaining / travel
            return Position(wp.x + f * (nxt.x - wp.x), wp.y + f * (nxt.y - wp.y))
        remaining -= travel
    return Position(wps[-1].x, wps[-1].y)


def step_traveler(traveler: Traveler, dt_s: float) -> tuple[Traveler, Position]:
    """Advance the traveler's clock by dt seconds and report the new position."""
    if dt_s < 0:
        raise InvalidParams("dt must be non-negative")
    stepped = replace(traveler, clock_s=traveler.clock_s + dt_s)
    return stepped, position_at(stepped, stepped.clock_s)


def reinstall(traveler: Traveler, rng: Stream) -> Traveler:
    """App reinstall: a fresh uuid and session; prior history stays orphaned."""
    return replace(traveler, uuid=new_uuid(rng), install_generation=traveler.install_generation + 1)


# -- terminal map ------------------------------------------------------------------


@dataclass(frozen=True)
class PoiSite:
    """Static point of interest on the terminal floor."""

    id: str
    name: str
    category: str
    topics: frozenset
    x: float
    y: float
    zone_radius_m: float
    capacity: int

    def as_poi(self) -> Poi:
        return Poi(
            id=self.id,
            name=self.name,
            category=self.category,
            topics=self.topics,
            position=Position(self.x, self.y),
        )

    def zone(self) -> Zone:
        return Zone.circle(self.id, self.capacity, Position(self.x, self.y), self.zone_radius_m)


@dataclass(frozen=True)
class TerminalMap:
    width_m: float
    height_m: float
    entrance: tuple
    security: tuple
    gates: dict  # gate id -> (x, y)
    aps: tuple  # AccessPoints
    sites: tuple  # PoiSites
    radio_range_m: float = 60.0

    def topic_pool(self) -> list[str]:
        pool = set()
        for site in self.sites:
            pool.update(site.topics)
        return sorted(pool)

    def contains(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.width_m and 0.0 <= y <= self.height_m


DEFAULT_SITES = (
    PoiSite("bookstore", "Concourse Books", "shop", frozenset({"books", "gifts"}), 40.0, 18.0, 6.0, 12),
    PoiSite("cafe-east", "East Espresso", "cafe", frozenset({"coffee", "food"}), 85.0, 20.0, 5.0, 10),
    PoiSite("cafe-west", "West Espresso", "cafe", frozenset({"coffee", "food"}), 35.0, 42.0, 5.0, 10),
    PoiSite("duty-free", "Duty Free Hall", "shop", frozenset({"gifts", "fashion"}), 60.0, 38.0, 8.0, 25),
    PoiSite("info-desk", "Information", "service", frozenset({"help"}), 25.0, 28.0, 3.0, 4),
    PoiSite("lounge", "Sky Lounge", "lounge", frozenset({"rest", "food"}), 95.0, 45.0, 7.0, 18),
    PoiSite("newsstand", "Gate News", "shop", frozenset({"books", "snacks"}), 70.0, 15.0, 4.0, 8),
    PoiSite("restaurant", "Runway Grill", "restaurant", frozenset({"food"}), 55.0, 50.0, 7.0, 20),
)

DEFAULT_GATES = {
    "A1": (116.0, 12.0),
    "A2": (116.0, 26.0),
    "A3": (116.0, 40.0),
    "A4": (116.0, 52.0),
}

# access-layer node ids the eight access points hang off, west to east
DEFAULT_AP_NODE_IDS = (10, 11, 12, 13, 14, 15, 16, 17)


def default_terminal_map() -> TerminalMap:
    """120 m x 60 m hall with eight access points on a regular 4x2 grid."""
    xs = (15.0, 45.0, 75.0, 105.0)
    ys = (15.0, 45.0)
    aps = []
    idx = 0
    for y in ys:
        for x in xs:
            aps.append(AccessPoint(id=idx, x=x, y=y, attached_node=DEFAULT_AP_NODE_IDS[idx]))
            idx += 1
    return TerminalMap(
        width_m=120.0,
        height_m=60.0,
        entrance=(4.0, 30.0),
        security=(22.0, 30.0),
        gates=dict(DEFAULT_GATES),
        aps=tuple(aps),
        sites=DEFAULT_SITES,
    )


def coverage_gaps(terminal: TerminalMap, grid_step_m: float = 5.0) -> list[tuple]:
    """Map points that cannot hear three non-collinear access points in range.

    An empty result means every sampled point can be trilaterated.
    """
    gaps: list[tuple] = []
    steps_x = int(terminal.width_m / grid_step_m) + 1
    steps_y = int(terminal.height_m / grid_step_m) + 1
    for iy in range(steps_y):
        for ix in range(steps_x):
            px = min(ix * grid_step_m, terminal.width_m)
            py = min(iy * grid_step_m, terminal.height_m)
            hearable = [
                ap
                for ap in terminal.aps
                if math.hypot(ap.x - px, ap.y - py) <= terminal.radio_range_m
            ]
            if len(hearable) < 3 or not _has_noncollinear_triple(hearable):
                gaps.append((px, py))
    return gaps


def _has_noncollinear_triple(aps: list[AccessPoint]) -> bool:
    n = len(aps)
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                area2 = abs(
                    (aps[j].x - aps[i].x) * (aps[k].y - aps[i].y)
                    - (aps[k].x - aps[i].x) * (aps[j].y - aps[i].y)
                )
                if area2 > 1e-6:
                    return True
    return False


# -- rssi emission ------------------------------------------------------------------


def emit_rssi(
    position: Position,
    aps,
    params: PathLossParams,
    noise_sigma_db: float,
    rng: Stream | None,
    range_m: float = 60.0,
    at: int = 0,
) -> list[RssiObservation]:
    """Observations a device at the position would report, one per in-range ap.

    Access points beyond range_m are absent from the output. Noise draws come
    only from the supplied stream, in ascending ap id order.
    """
    if isinstance(aps, dict):
        aps = [aps[k] for k in sorted(aps)]
    out: list[RssiObservation] = []
    for ap in sorted(aps, key=lambda a: a.id):
        dist = math.hypot(ap.x - position.x, ap.y - position.y)
        if dist > range_m:
            continue
        rssi = distance_to_rssi(dist, params)
        if noise_sigma_db > 0.0 and rng is not None:
            rssi += rng.gauss(0.0, noise_sigma_db)
        out.append(RssiObservation(ap_id=ap.id, rssi_dbm=rssi, at=at))
    return out


# -- scenario -------------------------------------------------------------------------


class RoutingPolicy(Enum):
    FIXED = "fixed"
    QOS = "qos"
    PLACEMENT = "placement"


@dataclass(frozen=True)
class RoutingSpec:
    config_name: str
    policy: RoutingPolicy
    fixed_target: NodeId | None = None
    candidates: tuple = ()  # dispatch candidate node ids, ascending


@dataclass(frozen=True)
class SamplingSpec:
    position_hz: float = 1.0
    heatmap: bool = False
    heatmap_cell_m: float = 2.0
    clusters: bool = False
    clusters_eps_m: float = 2.0
    clusters_min_size: int = 2
    clusters_interval_s: float = 5.0


@dataclass(frozen=True)
class NodeChange:
    at: int  # microseconds
    action: str  # "add" or "remove"
    node_spec: NodeSpec | None = None
    node_id: NodeId | None = None


@dataclass(frozen=True)
class ScenarioParams:
    terminal: TerminalMap
    routing: RoutingSpec
    traveler_count: int = 60
    request_rate_per_s: float = 50.0
    duration_s: float = 20.0
    demand_units: float = 1.0
    service_class: str = "proximity"
    sla: Sla = Sla("proximity", 100.0)
    predictor_alpha: float = 0.2
    path_loss: PathLossParams = PathLossParams()
    noise_sigma_db: float = 2.0
    flight_count: int = 6
    sampling: SamplingSpec = SamplingSpec()
    max_events: int = 5_000_000


@dataclass(frozen=True)
class Arrival:
    at: int  # microseconds
    traveler_index: int


def _terminal_to_dict(t: TerminalMap) -> dict:
    return {
        "width_m": t.width_m,
        "height_m": t.height_m,
        "entrance": list(t.entrance),
        "security": list(t.security),
        "gates": {g: list(xy) for g, xy in sorted(t.gates.items())},
        "radio_range_m": t.radio_range_m,
        "aps": [
            {"id": ap.id, "x": ap.x, "y": ap.y, "attached_node": ap.attached_node}
            for ap in t.aps
        ],
        "sites": [
            {
                "id": s.id,
                "name": s.name,
                "category": s.category,
                "topics": sorted(s.topics),
                "x": s.x,
                "y": s.y,
                "zone_radius_m": s.zone_radius_m,
                "capacity": s.capacity,
            }
            for s in t.sites
        ],
    }


def _terminal_from_dict(doc: dict) -> TerminalMap:
    return TerminalMap(
        width_m=doc["width_m"],
        height_m=doc["height_m"],
        entrance=tuple(doc["entrance"]),
        security=tuple(doc["security"]),
        gates={g: tuple(xy) for g, xy in doc["gates"].items()},
        radio_range_m=doc["radio_range_m"],
        aps=tuple(AccessPoint(**ap) for ap in doc["aps"]),
        sites=tuple(
            PoiSite(
                id=s["id"],
                name=s["name"],
                category=s["category"],
                topics=frozenset(s["topics"]),
                x=s["x"],
                y=s["y"],
                zone_radius_m=s["zone_radius_m"],
                capacity=s["capacity"],
            )
            for s in doc["sites"]
        ),
    )


def _params_to_dict(p: ScenarioParams) -> dict:
    return {
        "terminal": _terminal_to_dict(p.terminal),
        "routing": {
            "config_name": p.routing.config_name,
            "policy": p.routing.policy.value,
            "fixed_target": p.routing.fixed_target,
            "candidates": list(p.routing.candidates),
        },
        "traveler_count": p.traveler_count,
        "request_rate_per_s": p.request_rate_per_s,
        "duration_s": p.duration_s,
        "demand_units": p.demand_units,
        "service_class": p.service_class,
        "sla_max_response_ms": p.sla.max_response_ms,
        "predictor_alpha": p.predictor_alpha,
        "path_loss": {
            "p0_dbm": p.path_loss.p0_dbm,
            "d0_m": p.path_loss.d0_m,
            "exponent": p.path_loss.exponent,
        },
        "noise_sigma_db": p.noise_sigma_db,
        "flight_count": p.flight_count,
        "sampling": {
            "position_hz": p.sampling.position_hz,
            "heatmap": p.sampling.heatmap,
            "heatmap_cell_m": p.sampling.heatmap_cell_m,
            "clusters": p.sampling.clusters,
            "clusters_eps_m": p.sampling.clusters_eps_m,
            "clusters_min_size": p.sampling.clusters_min_size,
            "clusters_interval_s": p.sampling.clusters_interval_s,
        },
        "max_events": p.max_events,
    }


def _params_from_dict(doc: dict) -> ScenarioParams:
    routing = doc["routing"]
    return ScenarioParams(
        terminal=_terminal_from_dict(doc["terminal"]),
        routing=RoutingSpec(
            config_name=routing["config_name"],
            policy=RoutingPolicy(routing["policy"]),
            fixed_target=routing["fixed_target"],
            candidates=tuple(routing["candidates"]),
        ),
        traveler_count=doc["traveler_count"],
        request_rate_per_s=doc["request_rate_per_s"],
        duration_s=doc["duration_s"],
        demand_units=doc["demand_units"],
        service_class=doc["service_class"],
        sla=Sla(doc["service_class"], doc["sla_max_response_ms"]),
        predictor_alpha=doc["predictor_alpha"],
        path_loss=PathLossParams(**doc["path_loss"]),
        noise_sigma_db=doc["noise_sigma_db"],
        flight_count=doc["flight_count"],
        sampling=SamplingSpec(**doc["sampling"]),
        max_events=doc["max_events"],
    )


@dataclass
class Scenario:
    params: ScenarioParams
    seed: int
    travelers: list[Traveler]
    flights: FlightFeed
    arrivals: list[Arrival]
    node_changes: list[NodeChange] = field(default_factory=list)

    def to_json(self) -> str:
        """Canonical self-contained serialization; loadable by from_json."""
        doc = {
            "seed": self.seed,
            "params": _params_to_dict(self.params),
            "travelers": [
                {
                    "uuid": str(t.uuid),
                    "speed_m_s": t.speed_m_s,
                    "flight_id": t.flight_id,
                    "topics": sorted(t.selected_topics),
                    "install_generation": t.install_generation,
                    "itinerary": [[w.x, w.y, w.dwell_s, w.poi_id] for w in t.itinerary],
                }
                for t in self.travelers
            ],
            "flights": [
                {"flight_id": e.flight_id, "status": e.status.value, "gate": e.gate, "at": e.at}
                for e in self.flights.events
            ],
            "arrivals": [[a.at, a.traveler_index] for a in self.arrivals],
            "node_changes": [
                {
                    "at": c.at,
                    "action": c.action,
                    "node_spec": c.node_spec.to_dict() if c.node_spec else None,
                    "node_id": c.node_id,
                }
                for c in self.node_changes
            ],
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @staticmethod
    def from_json(text: str) -> "Scenario":
        doc = json.loads(text)
        travelers = [
            Traveler(
                uuid=uuid_module.UUID(t["uuid"]),
                itinerary=tuple(Waypoint(x, y, dwell, poi) for x, y, dwell, poi in t["itinerary"]),
                speed_m_s=t["speed_m_s"],
                flight_id=t["flight_id"],
                selected_topics=frozenset(t["topics"]),
                install_generation=t["install_generation"],
            )
            for t in doc["travelers"]
        ]
        flights = FlightFeed(
            [
                FlightEvent(e["flight_id"], FlightStatus(e["status"]), e["gate"], e["at"])
                for e in doc["flights"]
            ]
        )
        return Scenario(
            params=_params_from_dict(doc["params"]),
            seed=doc["seed"],
            travelers=travelers,
            flights=flights,
            arrivals=[Arrival(at, idx) for at, idx in doc["arrivals"]],
            node_changes=[
                NodeChange(
                    at=c["at"],
                    action=c["action"],
                    node_spec=NodeSpec.from_dict(c["node_spec"]) if c["node_spec"] else None,
                    node_id=c["node_id"],
                )
                for c in doc.get("node_changes", [])
            ],
        )


def _validate_params(params: ScenarioParams) -> None:
    if params.traveler_count < 0:
        raise InvalidParams("traveler_count must be >= 0")
    if params.request_rate_per_s < 0:
        raise InvalidParams("request_rate_per_s must be >= 0")
    if params.duration_s <= 0:
        raise InvalidParams("duration_s must be positive")
    if params.demand_units <= 0:
        raise InvalidParams("demand_units must be positive")
    if not 0.0 <= params.predictor_alpha <= 1.0:
        raise InvalidParams("predictor_alpha must lie in [0, 1]")
    if params.flight_count < 0:
        raise InvalidParams("flight_count must be >= 0")
    terminal = params.terminal
    for wp_name, (x, y) in (("entrance", terminal.entrance), ("security", terminal.security)):
        if not terminal.contains(x, y):
            raise InvalidParams(f"{wp_name} lies outside the terminal")
    for gate, (x, y) in terminal.gates.items():
        if not terminal.contains(x, y):
            raise InvalidParams(f"gate {gate} lies outside the terminal")
    for site in terminal.sites:
        if not terminal.contains(site.x, site.y):
            raise InvalidParams(f"site {site.id} lies outside the terminal")
    gaps = coverage_gaps(terminal)
    if gaps:
        raise InvalidParams(f"{len(gaps)} map points lack trilateration coverage, e.g. {gaps[0]}")


def _generate_flights(params: ScenarioParams, rng: Stream) -> FlightFeed:
    events: list[FlightEvent] = []
    gate_ids = sorted(params.terminal.gates)
    for i in range(params.flight_count):
        fs = rng.derive("flight", i)
        flight_id = f"FL{100 + i}"
        gate = gate_ids[i % len(gate_ids)] if gate_ids else "A1"
        departure_s = fs.uniform(900.0, 7200.0)
        boarding_s = departure_s - 600.0
        events.append(FlightEvent(flight_id, FlightStatus.SCHEDULED, gate, 0))
        if fs.random() < 0.3 and len(gate_ids) > 1:
            at = fs.uniform(1.0, boarding_s * 0.5)
            gate = gate_ids[(gate_ids.index(gate) + 1) % len(gate_ids)]
            events.append(FlightEvent(flight_id, FlightStatus.GATE_CHANGE, gate, round(at * US_PER_S)))
        if fs.random() < 0.25:
            at = fs.uniform(boarding_s * 0.5, boarding_s * 0.9)
            events.append(FlightEvent(flight_id, FlightStatus.DELAYED, gate, round(at * US_PER_S)))
        events.append(FlightEvent(flight_id, FlightStatus.BOARDING, gate, round(boarding_s * US_PER_S)))
        events.append(FlightEvent(flight_id, FlightStatus.DEPARTED, gate, round(departure_s * US_PER_S)))
    return FlightFeed(events)


def _generate_traveler(params: ScenarioParams, flights: FlightFeed, rng: Stream, index: int) -> Traveler:
    ts = rng.derive("traveler", index)
    terminal = params.terminal
    topic_pool = terminal.topic_pool()
    topics = frozenset(ts.sample(topic_pool, 1 + ts.randrange(3))) if topic_pool else frozenset()
    flight_id = f"FL{100 + ts.randrange(params.flight_count)}" if params.flight_count else None
    gate_pos = None
    if flight_id is not None:
        gate = flights.initial_gate(flight_id)
        gate_pos = terminal.gates.get(gate)
    if gate_pos is None:
        gate_pos = next(iter(sorted(terminal.gates.items())))[1] if terminal.gates else (terminal.width_m / 2, terminal.height_m / 2)

    waypoints = [Waypoint(terminal.entrance[0], terminal.entrance[1], ts.uniform(0.0, 10.0))]
    waypoints.append(Waypoint(terminal.security[0], terminal.security[1], ts.uniform(15.0, 45.0)))
    detours = ts.randrange(4)
    for site in ts.sample(list(terminal.sites), detours):
        waypoints.append(Waypoint(site.x, site.y, ts.uniform(20.0, 90.0), poi_id=site.id))
    waypoints.append(Waypoint(gate_pos[0], gate_pos[1], 0.0))
    return Traveler(
        uuid=new_uuid(ts),
        itinerary=tuple(waypoints),
        speed_m_s=ts.uniform(0.9, 1.4),
        flight_id=flight_id,
        selected_topics=topics,
    )


def generate_scenario(params: ScenarioParams, seed: int) -> Scenario:
    """Deterministic scenario for (params, seed); see module docstring."""
    _validate_params(params)
    root = Stream(seed)
    flights = _generate_flights(params, root.derive("flights"))
    travelers = [
        _generate_traveler(params, flights, root, i) for i in range(params.traveler_count)
    ]
    arrivals: list[Arrival] = []
    if params.traveler_count > 0 and params.request_rate_per_s > 0:
        arr = root.derive("arrivals")
        t = 0.0
        while True:
            t += arr.expovariate(params.request_rate_per_s)
            if t >= params.duration_s:
                break
            arrivals.append(Arrival(at=round(t * US_PER_S), traveler_index=arr.randrange(params.traveler_count)))
    return Scenario(params=params, seed=seed, travelers=travelers, flights=flights, arrivals=arrivals)
