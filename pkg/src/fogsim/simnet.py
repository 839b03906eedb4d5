"""Deterministic discrete-event simulation of requests over the agent tree.

Time is an integer microsecond clock. The pre-generated arrival stream is
co-iterated with the event heap: heap events at or before an arrival's
timestamp are processed first, then the routing decision runs. Each node
serves requests one at a time from a FIFO queue. A completed request costs
one-way latency out, queue wait, service time, and one-way latency back.

Routing supports a fixed target, predicted-response dispatch over a
candidate set, and recursive admission placement. Capacity is reserved and
released only under placement; the fixed and dispatch policies model
unconditional forwarding and absorb load in queues instead.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from enum import Enum

from .analytics import HeatMap, detect_clusters, heatmap_ingest
from .errors import ScenarioOverflow
from .placement import PlacementDecision, PlacementOutcome, ServiceRequest, place, release
from .positioning import Position, serving_ap, trilaterate
from .qos import QosPredictor, dispatch
from .rng import Stream
from .topology import NodeId, Topology, add_node, latency, latency_us, remove_node
from .workload import RoutingPolicy, Scenario, emit_rssi, position_at

__all__ = [
    "EventKind",
    "MetricsReport",
    "run",
    "latency",
    "latency_us",
    "percentile",
]

US_PER_S = 1_000_000


class EventKind(Enum):
    REQUEST_ARRIVAL = "request_arrival"
    SERVICE_START = "service_start"
    SERVICE_END = "service_end"
    RESPONSE_DELIVERED = "response_delivered"
    NODE_CHANGE = "node_change"
    SAMPLE = "sample"


def percentile(sorted_values: list, p: float) -> float:
    """Nearest-rank percentile of an ascending list; 0.0 when empty."""
    if not sorted_values:
        return 0.0
    rank = math.ceil(p / 100.0 * len(sorted_values))
    return sorted_values[max(0, min(len(sorted_values), rank) - 1)]


@dataclass(frozen=True)
class RequestRecord:
    id: int
    created_at: int
    target: NodeId
    response_us: int
    violated: bool


@dataclass
class MetricsReport:
    config: str
    seed: int
    rate_per_s: float
    duration_s: float
    sla_max_response_ms: float = 0.0
    predictor_alpha: float = 0.0
    requests_created: int = 0
    completions: int = 0
    rejections: int = 0
    violations: int = 0
    predicted_violations: int = 0
    rejected_by_reason: dict = field(default_factory=dict)
    records: list = field(default_factory=list)
    response_mean_ms: float = 0.0
    response_p50_ms: float = 0.0
    response_p95_ms: float = 0.0
    response_p99_ms: float = 0.0
    response_max_ms: float = 0.0
    target_counts: dict = field(default_factory=dict)
    utilization: dict = field(default_factory=dict)
    concurrency_samples: list = field(default_factory=list)
    mean_concurrency: float = 0.0
    qos_estimates: dict = field(default_factory=dict)
    heatmap: HeatMap | None = None
    cluster_snapshots: list = field(default_factory=list)
    events_processed: int = 0

    def to_dict(self) -> dict:
        """JSON-safe summary; per-request records stay out of it."""
        return {
            "config": self.config,
            "seed": self.seed,
            "rate_per_s": self.rate_per_s,
            "duration_s": self.duration_s,
            "sla_max_response_ms": self.sla_max_response_ms,
            "predictor_alpha": self.predictor_alpha,
            "requests_created": self.requests_created,
            "completions": self.completions,
            "rejections": self.rejections,
            "rejected_by_reason": dict(sorted(self.rejected_by_reason.items())),
            "violations": self.violations,
            "predicted_violations": self.predicted_violations,
            "response_ms": {
                "mean": round(self.response_mean_ms, 3),
                "p50": round(self.response_p50_ms, 3),
                "p95": round(self.response_p95_ms, 3),
                "p99": round(self.response_p99_ms, 3),
                "max": round(self.response_max_ms, 3),
            },
            "target_counts": {str(k): v for k, v in sorted(self.target_counts.items())},
            "utilization": {str(k): round(v, 6) for k, v in sorted(self.utilization.items())},
            "mean_concurrency": round(self.mean_concurrency, 6),
            "qos_estimates_ms": {str(k): round(v, 6) for k, v in sorted(self.qos_estimates.items())},
            "events_processed": self.events_processed,
        }


@dataclass
class _NodeState:
    pending: list = field(default_factory=list)  # deque via index; see _pop_pending
    head: int = 0
    current: int | None = None  # serving request id
    busy_until: int = 0
    start_scheduled: bool = False

    def queue_len(self) -> int:
        return len(self.pending) - self.head

    def push_pending(self, request_id: int) -> None:
        self.pending.append(request_id)

    def pop_pending(self) -> int:
        rid = self.pending[self.head]
        self.head += 1
        if self.head > 64 and self.head * 2 > len(self.pending):
            del self.pending[: self.head]
            self.head = 0
        return rid

    def drain_pending(self) -> list:
        out = self.pending[self.head :]
        self.pending = []
        self.head = 0
        return out


@dataclass
class _Flight:
    request: ServiceRequest
    target: NodeId
    decision: PlacementDecision | None
    one_way_us: int
    service_us: int
    dropped: bool = False


def run(scenario: Scenario, topology: Topology, seed: int) -> MetricsReport:
    """Simulate the scenario on the topology and return aggregate metrics.

    The scenario seed fixed the workload; this seed drives only radio noise,
    so every routing configuration sees an identical request stream.
    """
    params = scenario.params
    routing = params.routing
    sla = params.sla
    terminal = params.terminal
    duration_us = round(params.duration_s * US_PER_S)
    rng = Stream(seed)
    request_noise = {}
    sample_noise = {}
    aps_by_id = {ap.id: ap for ap in terminal.aps}

    report = MetricsReport(
        config=routing.config_name,
        seed=seed,
        rate_per_s=params.request_rate_per_s,
        duration_s=params.duration_s,
        sla_max_response_ms=sla.max_response_ms,
        predictor_alpha=params.predictor_alpha,
    )

    node_states: dict[NodeId, _NodeState] = {}
    flights: dict[int, _Flight] = {}
    in_flight: set[int] = set()
    busy_us: dict[NodeId, int] = {}
    latest_end_us = 0
    responses_ms: list[float] = []

    def node_state(node: NodeId) -> _NodeState:
        if node not in node_states:
            node_states[node] = _NodeState()
        return node_states[node]

    def queue_delay_ms(node: NodeId, now: int = 0) -> float:
        ns = node_states.get(node)
        if ns is None:
            return 0.0
        wait_us = max(0, ns.busy_until - now) if ns.current is not None else 0
        for rid in ns.pending[ns.head :]:
            wait_us += flights[rid].service_us
        return wait_us / 1000.0

    clock = 0

    predictor = QosPredictor(
        topology,
        alpha=params.predictor_alpha,
        queue_delay_ms=lambda node: queue_delay_ms(node, clock),
    )

    heap: list = []
    seq = 0

    def push(at: int, kind: EventKind, payload) -> None:
        nonlocal seq
        heapq.heappush(heap, (at, seq, kind, payload))
        seq += 1

    def reject(reason: str) -> None:
        report.rejections += 1
        report.rejected_by_reason[reason] = report.rejected_by_reason.get(reason, 0) + 1

    sampling = params.sampling
    if sampling.position_hz > 0:
        step_us = round(US_PER_S / sampling.position_hz)
        at = step_us
        tick = 1
        while at <= duration_us:
            push(at, EventKind.SAMPLE, tick)
            at += step_us
            tick += 1
    for change in scenario.node_changes:
        push(change.at, EventKind.NODE_CHANGE, change)

    heatmap = None
    if sampling.heatmap:
        heatmap = HeatMap(
            origin=(0.0, 0.0),
            cell_size_m=sampling.heatmap_cell_m,
            width=math.ceil(terminal.width_m / sampling.heatmap_cell_m),
            height=math.ceil(terminal.height_m / sampling.heatmap_cell_m),
        )
    cluster_every_ticks = max(1, round(sampling.clusters_interval_s * sampling.position_hz))

    def estimated_positions(now: int) -> list:
        out = []
        for idx, traveler in enumerate(scenario.travelers):
            if idx not in sample_noise:
                sample_noise[idx] = rng.derive("sample-rssi", idx)
            pos = position_at(traveler, now / US_PER_S)
            obs = emit_rssi(
                pos,
                terminal.aps,
                params.path_loss,
                params.noise_sigma_db,
                sample_noise[idx],
                range_m=terminal.radio_range_m,
                at=now,
            )
            if len(obs) < 3:
                continue
            try:
                est = trilaterate(obs, aps_by_id, params.path_loss, now=now)
            except Exception:
                continue
            # noisy fixes can land outside the hall; clamp just inside
            x = min(max(est.x, 0.0), math.nextafter(terminal.width_m, 0.0))
            y = min(max(est.y, 0.0), math.nextafter(terminal.height_m, 0.0))
            out.append((idx, x, y))
        return out

    def start_service(node: NodeId, now: int) -> None:
        ns = node_state(node)
        ns.start_scheduled = False
        if ns.current is not None or ns.queue_len() == 0:
            return
        rid = ns.pop_pending()
        fl = flights[rid]
        ns.current = rid
        ns.busy_until = now + fl.service_us
        push(ns.busy_until, EventKind.SERVICE_END, (node, rid))

    def end_service(node: NodeId, rid: int, now: int) -> None:
        nonlocal latest_end_us
        fl = flights[rid]
        if fl.dropped:
            return
        ns = node_state(node)
        ns.current = None
        busy_us[node] = busy_us.get(node, 0) + fl.service_us
        latest_end_us = max(latest_end_us, now)
        if fl.decision is not None and not fl.decision.released:
            if fl.decision.target in topology.nodes:
                release(topology, fl.decision)
        push(now + fl.one_way_us, EventKind.RESPONSE_DELIVERED, rid)
        if ns.queue_len() > 0 and not ns.start_scheduled:
            ns.start_scheduled = True
            push(now, EventKind.SERVICE_START, node)

    def drop_node_work(node: NodeId) -> None:
        ns = node_states.pop(node, None)
        if ns is None:
            return
        doomed = ns.drain_pending()
        if ns.current is not None:
            doomed.append(ns.current)
        for rid in doomed:
            fl = flights[rid]
            if fl.dropped:
                continue
            fl.dropped = True
            in_flight.discard(rid)
            reject("node_removed")

    def apply_node_change(change) -> None:
        if change.action == "add":
            add_node(topology, change.node_spec)
            return
        doomed = topology.subtree(change.node_id)
        for node in doomed:
            drop_node_work(node)
        remove_node(topology, change.node_id)

    def decide(arrival_at: int, traveler_index: int) -> None:
        traveler = scenario.travelers[traveler_index]
        if traveler_index not in request_noise:
            request_noise[traveler_index] = rng.derive("request-rssi", traveler_index)
        pos = position_at(traveler, arrival_at / US_PER_S)
        obs = emit_rssi(
            pos,
            terminal.aps,
            params.path_loss,
            params.noise_sigma_db,
            request_noise[traveler_index],
            range_m=terminal.radio_range_m,
            at=arrival_at,
        )
        report.requests_created += 1
        rid = report.requests_created - 1
        if not obs:
            reject("origin_unreachable")
            return
        origin = aps_by_id[serving_ap(obs)].attached_node
        if origin not in topology.nodes:
            reject("origin_unreachable")
            return
        request = ServiceRequest(
            id=rid,
            service_class=params.service_class,
            demand=params.demand_units,
            origin=origin,
            created_at=arrival_at,
        )
        decision = None
        if routing.policy is RoutingPolicy.FIXED:
            target = routing.fixed_target
            if target not in topology.nodes:
                reject("origin_unreachable")
                return
        elif routing.policy is RoutingPolicy.QOS:
            candidates = [c for c in routing.candidates if c in topology.nodes]
            if not candidates:
                reject("origin_unreachable")
                return
            target = dispatch(predictor, candidates, request, sla)
            if predictor.predict(target, request) > sla.max_response_ms:
                report.predicted_violations += 1
        else:
            decision = place(topology, request)
            if decision.outcome is PlacementOutcome.REJECTED:
                reject("admission")
                return
            target = decision.target
        node = topology.nodes[target]
        service_us = round(request.demand / node.service_rate * US_PER_S)
        one_way = latency_us(topology, origin, target)
        flights[rid] = _Flight(request, target, decision, one_way, service_us)
        in_flight.add(rid)
        push(arrival_at + one_way, EventKind.REQUEST_ARRIVAL, rid)

    def handle_arrival(rid: int, now: int) -> None:
        fl = flights[rid]
        if fl.dropped:
            return
        if fl.target not in topology.nodes:
            fl.dropped = True
            in_flight.discard(rid)
            reject("node_removed")
            return
        ns = node_state(fl.target)
        ns.push_pending(rid)
        if ns.current is None and not ns.start_scheduled:
            ns.start_scheduled = True
            push(now, EventKind.SERVICE_START, fl.target)

    def handle_delivery(rid: int, now: int) -> None:
        fl = flights[rid]
        if fl.dropped:
            return
        in_flight.discard(rid)
        response_us = now - fl.request.created_at
        response_ms = response_us / 1000.0
        violated = response_ms > sla.max_response_ms
        if fl.target in topology.nodes:
            predictor.record(fl.target, response_ms, sla, request_id=rid, at=now)
        report.completions += 1
        if violated:
            report.violations += 1
        responses_ms.append(response_ms)
        report.target_counts[fl.target] = report.target_counts.get(fl.target, 0) + 1
        report.records.append(
            RequestRecord(
                id=rid,
                created_at=fl.request.created_at,
                target=fl.target,
                response_us=response_us,
                violated=violated,
            )
        )

    def handle_sample(tick: int, now: int) -> None:
        report.concurrency_samples.append((now, len(in_flight)))
        if heatmap is None and not sampling.clusters:
            return
        positions = estimated_positions(now)
        if heatmap is not None:
            for _, x, y in positions:
                heatmap_ingest(heatmap, Position(x, y))
        if sampling.clusters and tick % cluster_every_ticks == 0:
            labelled = [(idx, Position(x, y)) for idx, x, y in positions]
            clusters = detect_clusters(
                labelled, sampling.clusters_eps_m, sampling.clusters_min_size
            )
            report.cluster_snapshots.append((now, clusters))

    arrivals = scenario.arrivals
    ai = 0
    events = 0
    while heap or ai < len(arrivals):
        events += 1
        if events > params.max_events:
            raise ScenarioOverflow(
                f"event budget {params.max_events} exhausted at t={clock}us"
            )
        next_heap = heap[0][0] if heap else None
        next_arrival = arrivals[ai].at if ai < len(arrivals) else None
        if next_heap is not None and (next_arrival is None or next_heap <= next_arrival):
            at, _, kind, payload = heapq.heappop(heap)
            clock = at
            if kind is EventKind.REQUEST_ARRIVAL:
                handle_arrival(payload, at)
            elif kind is EventKind.SERVICE_START:
                start_service(payload, at)
            elif kind is EventKind.SERVICE_END:
                end_service(payload[0], payload[1], at)
            elif kind is EventKind.RESPONSE_DELIVERED:
                handle_delivery(payload, at)
            elif kind is EventKind.NODE_CHANGE:
                apply_node_change(payload)
            elif kind is EventKind.SAMPLE:
                handle_sample(payload, at)
        else:
            clock = next_arrival
            decide(next_arrival, arrivals[ai].traveler_index)
            ai += 1

    report.events_processed = events
    responses_ms.sort()
    if responses_ms:
        report.response_mean_ms = sum(responses_ms) / len(responses_ms)
        report.response_p50_ms = percentile(responses_ms, 50)
        report.response_p95_ms = percentile(responses_ms, 95)
        report.response_p99_ms = percentile(responses_ms, 99)
        report.response_max_ms = responses_ms[-1]
    horizon_us = max(duration_us, latest_end_us, 1)
    for node, total in sorted(busy_us.items()):
        report.utilization[node] = total / horizon_us
    if report.concurrency_samples:
        report.mean_concurrency = sum(n for _, n in report.concurrency_samples) / len(
            report.concurrency_samples
        )
    report.qos_estimates = dict(predictor.estimates)
    report.heatmap = heatmap
    # every created request must end up completed or rejected once the heap drains
    assert report.requests_created == report.completions + report.rejections
    assert not in_flight
    return report
