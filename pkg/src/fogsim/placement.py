"""Recursive service placement over the agent hierarchy.

A request is first tried where it arrives. A node that cannot admit it
searches its own subtree (children in ascending node id order, skipping the
branch the request arrived from), then forwards: a non-leader agent goes to
its cluster leader, a leader goes to the leader one layer up (the parent if
the parent is a leader, otherwise the leader of the parent's cluster), and a
microagent goes straight to its parent. A node is never admission-checked
twice within one placement. If the search reaches the root and still finds
nothing the request is rejected and no capacity changes anywhere.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import DoubleRelease, UnknownNode, UnknownTarget
from .topology import AgentKind, NodeId, Topology, tree_path


class PlacementOutcome(Enum):
    LOCAL = "local"
    DELEGATED = "delegated"
    REJECTED = "rejected"


@dataclass
class ServiceRequest:
    id: int
    service_class: str
    demand: float
    origin: NodeId
    created_at: int  # microseconds of sim time
    deadline_ms: float | None = None


@dataclass
class PlacementDecision:
    request_id: int
    target: NodeId | None
    path: list[NodeId]
    hops_up: int
    outcome: PlacementOutcome
    demand: float = 0.0
    released: bool = field(default=False, repr=False)


def try_local(topology: Topology, node: NodeId, request: ServiceRequest) -> bool:
    """True when the node could admit the request right now; no state change."""
    return topology.node(node).free_capacity >= request.demand


def _next_hop(topology: Topology, node_id: NodeId) -> tuple[NodeId | None, bool]:
    """Where a full node forwards a request: (next node, crosses a layer up)."""
    node = topology.nodes[node_id]
    if node.kind is AgentKind.MICROAGENT:
        return node.parent, True
    leader = topology.cluster_leader_of(node_id)
    if leader is not None and leader != node_id:
        return leader, False
    if node.parent is None:
        return None, False
    parent = topology.nodes[node.parent]
    if parent.is_leader:
        return parent.id, True
    return topology.cluster_leader_of(parent.id), True


def place(
    topology: Topology,
    request: ServiceRequest,
    trace: list[NodeId] | None = None,
) -> PlacementDecision:
    """Place one request; reserves capacity at the chosen target on success.

    The optional trace list collects every node admission-checked, in order,
    for tests that assert no node is visited twice.
    """
    origin = request.origin
    if origin not in topology.nodes:
        raise UnknownNode(f"origin {origin} not in topology")
    demand = request.demand
    visited: set[NodeId] = set()

    def check(nid: NodeId) -> bool:
        visited.add(nid)
        if trace is not None:
            trace.append(nid)
        return topology.nodes[nid].free_capacity >= demand

    def search(nid: NodeId, exclude_child: NodeId | None) -> NodeId | None:
        # check the node itself, then its subtree depth-first; already-checked
        # nodes are skipped but their children are still explored
        if nid not in visited and check(nid):
            return nid
        for child in topology.nodes[nid].children:
            if child == exclude_child:
                continue
            found = search(child, None)
            if found is not None:
                return found
        return None

    current: NodeId = origin
    arrived_from: NodeId | None = None
    hops_up = 0
    while True:
        found = search(current, arrived_from)
        if found is not None:
            topology.nodes[found].free_capacity -= demand
            outcome = PlacementOutcome.LOCAL if found == origin else PlacementOutcome.DELEGATED
            return PlacementDecision(
                request_id=request.id,
                target=found,
                path=tree_path(topology, origin, found),
                hops_up=hops_up,
                outcome=outcome,
                demand=demand,
            )
        nxt, went_up = _next_hop(topology, current)
        if nxt is None:
            return PlacementDecision(
                request_id=request.id,
                target=None,
                path=[origin],
                hops_up=hops_up,
                outcome=PlacementOutcome.REJECTED,
                demand=demand,
            )
        if went_up:
            hops_up += 1
        # exclude the arrival branch only when we forwarded to the parent;
        # a sideways hop to a cluster leader enters a fresh subtree
        arrived_from = current if topology.nodes[current].parent == nxt else None
        current = nxt


def release(topology: Topology, decision: PlacementDecision) -> Topology:
    """Return a placed request's capacity to its target node.

    Raises DoubleRelease on a second call for the same decision and
    UnknownTarget when the target vanished with a removed subtree (that
    capacity is gone; nothing is restored elsewhere).
    """
    if decision.outcome is PlacementOutcome.REJECTED or decision.target is None:
        raise ValueError("cannot release a rejected placement")
    if decision.released:
        raise DoubleRelease(f"decision for request {decision.request_id} already released")
    node = topology.nodes.get(decision.target)
    if node is None:
        decision.released = True
        raise UnknownTarget(f"target {decision.target} no longer exists")
    node.free_capacity = min(node.capacity, node.free_capacity + decision.demand)
    decision.released = True
    return topology
