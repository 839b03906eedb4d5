"""Layered agent hierarchy with leader-based clusters.

The topology is a tree rooted at a single cloud agent (layer 0). Interior
nodes are agents; microagents are leaves that never manage other nodes.
Agent siblings under a common parent form a cluster with exactly one leader
and, when the cluster has at least two members, one backup. Leaders are
sticky: adding a stronger node never displaces the current leader, only
removal triggers promotion.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    CannotRemoveRoot,
    CycleDetected,
    DuplicateNode,
    EmptyCluster,
    InvalidCapacity,
    MicroagentWithChildren,
    MissingCloudAgent,
    ParentIsMicroagent,
    UnknownNode,
    UnknownParent,
)

NodeId = int

US_PER_MS = 1000


class AgentKind(Enum):
    CLOUD_AGENT = "cloud_agent"
    AGENT = "agent"
    MICROAGENT = "microagent"


@dataclass
class NodeSpec:
    """Declarative description of one node, as parsed from scenario config."""

    id: NodeId
    kind: AgentKind
    parent: NodeId | None
    service_rate: float
    capacity: float
    link_latency_up_ms: float = 0.0

    @classmethod
    def from_dict(cls, raw: dict) -> "NodeSpec":
        return cls(
            id=int(raw["id"]),
            kind=AgentKind(raw["kind"]),
            parent=None if raw.get("parent") is None else int(raw["parent"]),
            service_rate=float(raw["service_rate"]),
            capacity=float(raw["capacity"]),
            link_latency_up_ms=float(raw.get("link_latency_up_ms", 0.0)),
        )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "parent": self.parent,
            "service_rate": self.service_rate,
            "capacity": self.capacity,
            "link_latency_up_ms": self.link_latency_up_ms,
        }


@dataclass
class TopologySpec:
    nodes: list[NodeSpec]

    @classmethod
    def from_dicts(cls, raw: list[dict]) -> "TopologySpec":
        return cls(nodes=[NodeSpec.from_dict(r) for r in raw])

    def to_dicts(self) -> list[dict]:
        return [n.to_dict() for n in self.nodes]


@dataclass
class AgentNode:
    id: NodeId
    kind: AgentKind
    layer: int
    parent: NodeId | None
    children: list[NodeId] = field(default_factory=list)
    service_rate: float = 1.0
    capacity: float = 1.0
    free_capacity: float = 1.0
    link_latency_up_ms: float = 0.0
    is_leader: bool = False
    backup_of: NodeId | None = None
    # integer microseconds, precomputed so path sums stay exact
    link_latency_up_us: int = 0


class Topology:
    """Mutable tree of agents; single-writer, no internal locking."""

    def __init__(self) -> None:
        self.nodes: dict[NodeId, AgentNode] = {}
        self.root: NodeId = -1
        # leader id -> sorted member ids (agent siblings sharing a parent)
        self.clusters: dict[NodeId, list[NodeId]] = {}
        self._leader_of: dict[NodeId, NodeId] = {}

    def node(self, node_id: NodeId) -> AgentNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNode(f"node {node_id} not in topology") from None

    def cluster_leader_of(self, node_id: NodeId) -> NodeId | None:
        """Leader of the cluster this agent belongs to (None for microagents)."""
        return self._leader_of.get(node_id)

    def agent_siblings(self, node_id: NodeId) -> list[NodeId]:
        node = self.node(node_id)
        if node.parent is None:
            return [node_id]
        parent = self.nodes[node.parent]
        return [c for c in parent.children if self.nodes[c].kind is not AgentKind.MICROAGENT]

    def subtree(self, node_id: NodeId) -> list[NodeId]:
        """Node ids of the subtree rooted at node_id, depth first."""
        out: list[NodeId] = []
        stack = [self.node(node_id).id]
        while stack:
            nid = stack.pop()
            out.append(nid)
            stack.extend(reversed(self.nodes[nid].children))
        return out

    # -- cluster bookkeeping -------------------------------------------------

    def _register_cluster(self, members: list[NodeId], leader: NodeId, backup: NodeId | None) -> None:
        members = sorted(members)
        self.clusters[leader] = members
        for m in members:
            self._leader_of[m] = leader
            node = self.nodes[m]
            node.is_leader = m == leader
            node.backup_of = leader if (backup is not None and m == backup) else None

    def _drop_cluster(self, leader: NodeId) -> None:
        for m in self.clusters.pop(leader, []):
            self._leader_of.pop(m, None)

    # -- invariants ----------------------------------------------------------

    def validate(self) -> None:
        """Raise ValueError if a structural invariant is broken."""
        root = self.nodes.get(self.root)
        if root is None or root.kind is not AgentKind.CLOUD_AGENT or root.layer != 0:
            raise ValueError("root must be the layer-0 cloud agent")
        seen = set()
        stack = [self.root]
        while stack:
            nid = stack.pop()
            if nid in seen:
                raise ValueError(f"node {nid} reached twice")
            seen.add(nid)
            node = self.nodes[nid]
            if node.children != sorted(node.children):
                raise ValueError(f"children of {nid} not sorted")
            for c in node.children:
                child = self.nodes[c]
                if child.parent != nid:
                    raise ValueError(f"parent link of {c} inconsistent")
                if child.layer != node.layer + 1:
                    raise ValueError(f"layer of {c} is not parent layer + 1")
                stack.append(c)
            if node.kind is AgentKind.MICROAGENT:
                if node.children:
                    raise ValueError(f"microagent {nid} has children")
                if node.is_leader:
                    raise ValueError(f"microagent {nid} is a leader")
            if not 0.0 <= node.free_capacity <= node.capacity:
                raise ValueError(f"free capacity of {nid} out of range")
        if seen != set(self.nodes):
            raise ValueError("unreachable nodes present")
        for leader, members in self.clusters.items():
            if self.nodes[leader].kind is AgentKind.MICROAGENT:
                raise ValueError(f"cluster leader {leader} is a microagent")
            if leader not in members:
                raise ValueError(f"leader {leader} not a member of its cluster")
            backups = [m for m in members if self.nodes[m].backup_of == leader]
            if len(backups) > 1:
                raise ValueError(f"cluster {leader} has more than one backup")
            if len(members) >= 2 and not backups:
                raise ValueError(f"cluster {leader} is missing a backup")


def elect_leader(members: list[AgentNode]) -> tuple[NodeId, NodeId | None]:
    """Pick (leader, backup) from cluster members.

    Highest service_rate wins, ties broken by lowest node id; the backup is
    the runner-up by the same ordering when the cluster has two or more
    members. Pure function of the member set.
    """
    if not members:
        raise EmptyCluster("cannot elect a leader from an empty cluster")
    for m in members:
        if m.kind is AgentKind.MICROAGENT:
            raise ValueError(f"microagent {m.id} cannot take part in leader election")
    ranked = sorted(members, key=lambda m: (-m.service_rate, m.id))
    leader = ranked[0].id
    backup = ranked[1].id if len(ranked) >= 2 else None
    return leader, backup


def _check_spec_numbers(spec: NodeSpec) -> None:
    if spec.capacity <= 0:
        raise InvalidCapacity(f"node {spec.id}: capacity must be positive")
    if spec.service_rate <= 0:
        raise InvalidCapacity(f"node {spec.id}: service_rate must be positive")
    if spec.kind is AgentKind.CLOUD_AGENT:
        if spec.link_latency_up_ms != 0.0:
            raise InvalidCapacity("cloud agent has no uplink; latency must be 0")
    elif spec.link_latency_up_ms <= 0:
        raise InvalidCapacity(f"node {spec.id}: link_latency_up_ms must be positive")


def _make_node(spec: NodeSpec, layer: int) -> AgentNode:
    return AgentNode(
        id=spec.id,
        kind=spec.kind,
        layer=layer,
        parent=spec.parent,
        children=[],
        service_rate=spec.service_rate,
        capacity=spec.capacity,
        free_capacity=spec.capacity,
        link_latency_up_ms=spec.link_latency_up_ms,
        link_latency_up_us=round(spec.link_latency_up_ms * US_PER_MS),
    )


def build_topology(spec: TopologySpec) -> Topology:
    """Construct and validate a topology from a declarative spec."""
    by_id: dict[NodeId, NodeSpec] = {}
    for ns in spec.nodes:
        if ns.id in by_id:
            raise DuplicateNode(f"node id {ns.id} used twice")
        by_id[ns.id] = ns

    clouds = [ns for ns in spec.nodes if ns.kind is AgentKind.CLOUD_AGENT]
    if len(clouds) != 1:
        raise MissingCloudAgent(f"expected exactly one cloud agent, found {len(clouds)}")
    root_spec = clouds[0]
    if root_spec.parent is not None:
        raise MissingCloudAgent("the cloud agent must be the root (no parent)")

    children_of: dict[NodeId, list[NodeId]] = {ns.id: [] for ns in spec.nodes}
    for ns in spec.nodes:
        _check_spec_numbers(ns)
        if ns.kind is AgentKind.CLOUD_AGENT:
            continue
        if ns.parent is None:
            raise UnknownParent(f"node {ns.id} has no parent and is not the cloud agent")
        if ns.parent not in by_id:
            raise UnknownParent(f"node {ns.id} references missing parent {ns.parent}")
        if by_id[ns.parent].kind is AgentKind.MICROAGENT:
            raise MicroagentWithChildren(f"microagent {ns.parent} cannot have children")
        children_of[ns.parent].append(ns.id)

    topo = Topology()
    topo.root = root_spec.id
    # breadth-first from the root assigns layers and catches cycles
    frontier = [root_spec.id]
    layer = 0
    while frontier:
        nxt: list[NodeId] = []
        for nid in frontier:
            node = _make_node(by_id[nid], layer)
            node.children = sorted(children_of[nid])
            topo.nodes[nid] = node
            nxt.extend(node.children)
        frontier = nxt
        layer += 1
    if len(topo.nodes) != len(spec.nodes):
        raise CycleDetected("parent references contain a cycle; not all nodes reach the root")

    # the root forms its own singleton cluster so escalation can terminate there
    topo._register_cluster([topo.root], topo.root, None)
    for nid, node in topo.nodes.items():
        members = [
            topo.nodes[c]
            for c in node.children
            if topo.nodes[c].kind is not AgentKind.MICROAGENT
        ]
        if members:
            leader, backup = elect_leader(members)
            topo._register_cluster([m.id for m in members], leader, backup)
    return topo


def add_node(topology: Topology, node_spec: NodeSpec) -> Topology:
    """Insert one node under an existing parent.

    Cluster membership is updated, but a sitting leader is never displaced;
    only the backup slot is re-derived from the election ordering.
    """
    if node_spec.id in topology.nodes:
        raise DuplicateNode(f"node id {node_spec.id} already present")
    if node_spec.kind is AgentKind.CLOUD_AGENT:
        raise MissingCloudAgent("a topology has exactly one cloud agent")
    _check_spec_numbers(node_spec)
    if node_spec.parent is None:
        raise UnknownParent(f"node {node_spec.id} needs a parent")
    if node_spec.parent not in topology.nodes:
        raise UnknownParent(f"parent {node_spec.parent} not in topology")
    parent = topology.nodes[node_spec.parent]
    if parent.kind is AgentKind.MICROAGENT:
        raise ParentIsMicroagent(f"cannot attach node under microagent {parent.id}")

    node = _make_node(node_spec, parent.layer + 1)
    topology.nodes[node.id] = node
    bisect.insort(parent.children, node.id)

    if node.kind is AgentKind.MICROAGENT:
        return topology

    siblings = topology.agent_siblings(node.id)
    existing = [s for s in siblings if s != node.id]
    if not existing:
        topology._register_cluster([node.id], node.id, None)
        return topology
    leader = topology._leader_of[existing[0]]
    members = sorted(siblings)
    rest = [topology.nodes[m] for m in members if m != leader]
    backup = elect_leader(rest)[0] if rest else None
    topology._register_cluster(members, leader, backup)
    return topology


def remove_node(topology: Topology, node_id: NodeId) -> Topology:
    """Remove a node and its whole subtree.

    If a cluster leader goes away its backup is promoted (or a fresh election
    runs when no backup exists) and a new backup is derived from the election
    ordering. Capacity held by removed nodes disappears with them.
    """
    node = topology.node(node_id)
    if node_id == topology.root:
        raise CannotRemoveRoot("the cloud agent cannot be removed")

    doomed = topology.subtree(node_id)
    doomed_set = set(doomed)

    parent = topology.nodes[node.parent]
    parent.children.remove(node_id)

    # clusters led from inside the subtree vanish wholesale; the removed
    # node's own sibling cluster survives and may need a promotion
    own_leader = topology._leader_of.get(node_id)
    for nid in doomed:
        led = topology.clusters.get(nid)
        if led is not None and nid != own_leader:
            topology._drop_cluster(nid)
    for nid in doomed:
        topology.nodes.pop(nid, None)
        if topology._leader_of.get(nid) == own_leader:
            continue
        topology._leader_of.pop(nid, None)

    if own_leader is not None:
        members = [m for m in topology.clusters[own_leader] if m != node_id]
        topology._drop_cluster(own_leader)
        topology._leader_of.pop(node_id, None)
        if members:
            member_nodes = [topology.nodes[m] for m in members]
            if node_id == own_leader:
                backups = [m for m in member_nodes if m.backup_of == own_leader]
                new_leader = backups[0].id if backups else elect_leader(member_nodes)[0]
            else:
                new_leader = own_leader
            rest = [m for m in member_nodes if m.id != new_leader]
            backup = elect_leader(rest)[0] if rest else None
            topology._register_cluster(members, new_leader, backup)
    return topology


def tree_path(topology: Topology, a: NodeId, b: NodeId) -> list[NodeId]:
    """The unique tree path from a to b, inclusive of both endpoints."""
    na = topology.node(a)
    nb = topology.node(b)
    up_a: list[NodeId] = [a]
    up_b: list[NodeId] = [b]
    while na.layer > nb.layer:
        na = topology.nodes[na.parent]
        up_a.append(na.id)
    while nb.layer > na.layer:
        nb = topology.nodes[nb.parent]
        up_b.append(nb.id)
    while na.id != nb.id:
        na = topology.nodes[na.parent]
        nb = topology.nodes[nb.parent]
        up_a.append(na.id)
        up_b.append(nb.id)
    up_b.pop()  # drop the shared ancestor; it is already the tail of up_a
    return up_a + list(reversed(up_b))


def latency_us(topology: Topology, a: NodeId, b: NodeId) -> int:
    """One-way latency in integer microseconds along the unique tree path."""
    path = tree_path(topology, a, b)
    total = 0
    for i in range(len(path) - 1):
        lo, hi = path[i], path[i + 1]
        # each hop traverses exactly one node's uplink
        if topology.nodes[lo].parent == hi:
            total += topology.nodes[lo].link_latency_up_us
        else:
            total += topology.nodes[hi].link_latency_up_us
    return total


def latency(topology: Topology, a: NodeId, b: NodeId) -> float:
    """One-way latency in milliseconds along the unique tree path."""
    return latency_us(topology, a, b) / 1000.0
