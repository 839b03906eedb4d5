"""Response-time prediction, QoS-aware dispatch, and SLA enforcement.

Each node carries an exponentially weighted moving average of observed
response times. Before the first observation the predictor falls back to an
analytic estimate: round-trip path latency plus deterministic service time
plus the node's current queue backlog. Dispatch picks the candidate with the
lowest prediction (ties broken by lowest node id) and never rejects; when
every candidate predicts above the SLA limit the choice is merely flagged.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .errors import NoCandidates, UnknownNode
from .placement import ServiceRequest
from .topology import NodeId, Topology, latency


@dataclass(frozen=True)
class Sla:
    service_class: str
    max_response_ms: float

    def __post_init__(self) -> None:
        if self.max_response_ms <= 0:
            raise ValueError("max_response_ms must be positive")


@dataclass(frozen=True)
class ViolationRecord:
    request_id: int
    node: NodeId
    observed_ms: float
    limit_ms: float
    at: int  # microseconds of sim time
    service_class: str


DEFAULT_ALPHA = 0.2


class QosPredictor:
    """Per-node EWMA of observed response times with an analytic cold start."""

    def __init__(
        self,
        topology: Topology,
        alpha: float = DEFAULT_ALPHA,
        queue_delay_ms: Callable[[NodeId], float] | None = None,
    ):
        if not 0.0 <= alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        self.topology = topology
        self.alpha = alpha
        self.estimates: dict[NodeId, float] = {}
        self.sample_counts: dict[NodeId, int] = {}
        self._queue_delay_ms = queue_delay_ms

    def sample_count(self, node: NodeId) -> int:
        return self.sample_counts.get(node, 0)

    def predict(self, node: NodeId, request: ServiceRequest) -> float:
        """Predicted response in ms for serving the request at the node."""
        target = self.topology.node(node)
        if self.sample_count(node) == 0:
            one_way_ms = latency(self.topology, request.origin, node)
            service_ms = request.demand / target.service_rate * 1000.0
            queue_ms = self._queue_delay_ms(node) if self._queue_delay_ms else 0.0
            return 2.0 * one_way_ms + service_ms + queue_ms
        return self.estimates[node]

    def record(
        self,
        node: NodeId,
        observed_ms: float,
        sla: Sla,
        request_id: int = -1,
        at: int = 0,
    ) -> ViolationRecord | None:
        """Fold one observed response into the node's estimate.

        The first sample initialises the estimate directly. Returns a
        ViolationRecord when the observation exceeds the SLA limit.
        """
        if node not in self.topology.nodes:
            raise UnknownNode(f"node {node} not in topology")
        count = self.sample_count(node)
        if count == 0:
            self.estimates[node] = observed_ms
        else:
            prev = self.estimates[node]
            self.estimates[node] = self.alpha * observed_ms + (1.0 - self.alpha) * prev
        self.sample_counts[node] = count + 1
        if observed_ms > sla.max_response_ms:
            return ViolationRecord(
                request_id=request_id,
                node=node,
                observed_ms=observed_ms,
                limit_ms=sla.max_response_ms,
                at=at,
                service_class=sla.service_class,
            )
        return None


def dispatch(
    predictor: QosPredictor,
    candidates: list[NodeId],
    request: ServiceRequest,
    sla: Sla,
) -> NodeId:
    """Choose the candidate with the lowest predicted response.

    Callers must pass only candidates that could admit the demand. Ties break
    toward the lowest node id; the choice is invariant under any positive
    scaling of all predictions.
    """
    if not candidates:
        raise NoCandidates("dispatch requires at least one candidate")
    best: NodeId | None = None
    best_pred = 0.0
    for nid in sorted(candidates):
        pred = predictor.predict(nid, request)
        if best is None or pred < best_pred:
            best = nid
            best_pred = pred
    return best


def predicted_violation(
    predictor: QosPredictor,
    chosen: NodeId,
    request: ServiceRequest,
    sla: Sla,
) -> bool:
    """True when even the chosen (minimal) prediction exceeds the SLA limit."""
    return predictor.predict(chosen, request) > sla.max_response_ms


@dataclass
class QosReport:
    service_class: str
    estimates_ms: dict[NodeId, float]
    free_capacity: dict[NodeId, float]
    violations: list[ViolationRecord]


def qos_report(
    predictor: QosPredictor,
    topology: Topology,
    violations: list[ViolationRecord],
    service_class: str,
) -> QosReport:
    """Snapshot of estimates, free capacity, and violations for one class.

    Pure read; consecutive calls with no intervening records are identical.
    """
    return QosReport(
        service_class=service_class,
        estimates_ms={nid: predictor.estimates[nid] for nid in sorted(predictor.estimates)},
        free_capacity={nid: topology.nodes[nid].free_capacity for nid in sorted(topology.nodes)},
        violations=[v for v in violations if v.service_class == service_class],
    )
