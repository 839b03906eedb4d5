"""Shared fixtures and independent reference implementations (oracles).

The oracles here deliberately re-derive results from first principles
(brute force, closed formulas) without calling into the library internals
they check, so a bug cannot hide on both sides of an assertion.
"""
from __future__ import annotations

import math
import uuid as uuid_module
from dataclasses import replace

from fogsim.placement import PlacementOutcome, ServiceRequest, place, release
from fogsim.positioning import Position, RssiObservation, distance_to_rssi
from fogsim.presets import PRESETS, preset_params
from fogsim.recommender import RECENCY_TAU_US, Poi, UserProfile
from fogsim.rng import Stream
from fogsim.topology import AgentKind, NodeSpec, Topology, TopologySpec, build_topology
from fogsim.workload import Arrival, FlightFeed, SamplingSpec, Scenario, Traveler, Waypoint


# -- random topologies and the placement oracle ---------------------------------


def random_topology(rng: Stream, max_nodes: int = 20) -> Topology:
    """Random valid agent tree: node 0 is the cloud, microagents stay leaves."""
    n = 2 + rng.randrange(max_nodes - 1)
    specs = [NodeSpec(0, AgentKind.CLOUD_AGENT, None, float(1 + rng.randrange(8)), float(1 + rng.randrange(5)), 0.0)]
    attachable = [0]
    for nid in range(1, n):
        parent = attachable[rng.randrange(len(attachable))]
        micro = rng.random() < 0.4
        specs.append(
            NodeSpec(
                nid,
                AgentKind.MICROAGENT if micro else AgentKind.AGENT,
                parent,
                float(1 + rng.randrange(8)),
                float(1 + rng.randrange(5)),
                0.1 + rng.random(),
            )
        )
        if not micro:
            attachable.append(nid)
    return build_topology(TopologySpec(specs))


def exercise_placement(topology: Topology, rng: Stream, requests: int = 30) -> None:
    """Drive random place/release traffic and check it against brute force.

    A placement must be rejected iff no node system-wide could admit the
    demand, must never over-allocate, and releasing everything must restore
    every node's capacity exactly.
    """
    capacities = {nid: node.capacity for nid, node in topology.nodes.items()}
    ids = sorted(topology.nodes)
    outstanding = []
    for k in range(requests):
        demand = float(1 + rng.randrange(6))
        origin = ids[rng.randrange(len(ids))]
        before = {nid: node.free_capacity for nid, node in topology.nodes.items()}
        anyone_fits = any(free >= demand for free in before.values())
        request = ServiceRequest(id=k, service_class="c", demand=demand, origin=origin, created_at=0)
        trace: list[int] = []
        decision = place(topology, request, trace=trace)
        assert len(trace) == len(set(trace)), "a node was admission-checked twice"
        if decision.outcome is PlacementOutcome.REJECTED:
            assert not anyone_fits, "rejected although some node could admit"
            after = {nid: node.free_capacity for nid, node in topology.nodes.items()}
            assert after == before, "a rejected placement changed capacity"
        else:
            assert anyone_fits
            assert before[decision.target] >= demand, "target lacked capacity before placement"
            assert topology.nodes[decision.target].free_capacity == before[decision.target] - demand
            outstanding.append(decision)
        for nid, node in topology.nodes.items():
            assert 0.0 <= node.free_capacity <= node.capacity
        if outstanding and rng.random() < 0.3:
            release(topology, outstanding.pop(rng.randrange(len(outstanding))))
    for decision in outstanding:
        release(topology, decision)
    for nid, node in topology.nodes.items():
        assert node.free_capacity == capacities[nid], f"capacity of node {nid} not restored"


# -- clustering oracle -----------------------------------------------------------


def brute_force_clusters(positions, eps_m, min_size):
    """Transitive closure over all pairwise links; returns {members: centroid}."""
    n = len(positions)
    adjacent = [[] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if positions[i][1].distance_to(positions[j][1]) <= eps_m:
                adjacent[i].append(j)
                adjacent[j].append(i)
    seen = [False] * n
    components = {}
    for start in range(n):
        if seen[start]:
            continue
        seen[start] = True
        comp = [start]
        frontier = [start]
        while frontier:
            for nxt in adjacent[frontier.pop()]:
                if not seen[nxt]:
                    seen[nxt] = True
                    comp.append(nxt)
                    frontier.append(nxt)
        if len(comp) >= min_size:
            members = tuple(sorted(positions[i][0] for i in comp))
            cx = sum(positions[i][1].x for i in comp) / len(comp)
            cy = sum(positions[i][1].y for i in comp) / len(comp)
            components[members] = (cx, cy)
    return components


def random_cluster_instance(rng: Stream, max_points: int = 200):
    n = 2 + rng.randrange(max_points - 1)
    positions = [(i, Position(rng.uniform(0.0, 40.0), rng.uniform(0.0, 40.0))) for i in range(n)]
    eps = rng.uniform(0.5, 4.0)
    min_size = 2 + rng.randrange(3)
    return positions, eps, min_size


# -- recommender oracle ------------------------------------------------------------


def brute_force_recommend(user, all_users, pois, now, k, tau_us=RECENCY_TAU_US):
    """Independent scorer: returns [(poi_id, score)] in ranked order."""

    def cosine(a: UserProfile, b: UserProfile) -> float:
        keys = set(a.ratings) | set(b.ratings)
        dot = sum(a.ratings.get(p, 0) * b.ratings.get(p, 0) for p in keys)
        na = math.sqrt(sum(v * v for v in a.ratings.values()))
        nb = math.sqrt(sum(v * v for v in b.ratings.values()))
        if na == 0.0 or nb == 0.0:
            return 0.0
        return min(1.0, max(0.0, dot / (na * nb)))

    by_id = {p.id: p for p in pois}
    recent = {pid for pid, at in user.visits if at <= now and now - at <= tau_us}
    candidates = sorted((p for p in pois if p.id not in recent), key=lambda p: p.id)
    rows = []
    for poi in candidates:
        topic = len(poi.topics & user.selected_topics) / max(1, len(user.selected_topics)) if user.selected_topics else 0.0
        wsum = vsum = 0.0
        for other in all_users:
            if other.uuid == user.uuid or poi.id not in other.ratings:
                continue
            sim = cosine(user, other)
            wsum += sim
            vsum += sim * (other.ratings[poi.id] - 1) / 4
        collab = vsum / wsum if wsum > 0.0 else 0.0
        last = None
        for pid, at in user.visits:
            seen = by_id.get(pid)
            if seen is None or seen.category != poi.category or at > now:
                continue
            if last is None or at > last:
                last = at
        recency = math.exp(-(now - last) / tau_us) if last is not None else 0.0
        rows.append((poi.id, 0.4 * topic + 0.4 * collab + 0.2 * recency))

    if rows and all(score == 0.0 for _, score in rows):
        rated = [p for p in candidates if len(p.ratings) >= 1]
        rated.sort(key=lambda p: (-p.rating_mean(), -p.rating_count(), p.id))
        order = [p.id for p in rated] + [p.id for p in candidates if p.rating_count() < 1]
        scores = dict(rows)
        return [(pid, scores[pid]) for pid in order][:k]
    rows.sort(key=lambda row: (-row[1], row[0]))
    return rows[:k]


def random_recommender_fixture(rng: Stream, cold_user: bool = False):
    """Up to 10 users and 20 pois with random topics, ratings, and visits."""
    topics = ["coffee", "food", "books", "gifts", "fashion", "rest", "help", "snacks"]
    categories = ["cafe", "shop", "lounge", "restaurant", "service"]
    n_pois = 3 + rng.randrange(18)
    pois = [
        Poi(
            id=f"p{i:02d}",
            name=f"poi {i}",
            category=categories[rng.randrange(len(categories))],
            topics=frozenset(rng.sample(topics, 1 + rng.randrange(3))),
            position=Position(rng.uniform(0, 100), rng.uniform(0, 50)),
        )
        for i in range(n_pois)
    ]
    n_users = 2 + rng.randrange(9)
    users = []
    for u in range(n_users):
        ratings = {}
        for poi in pois:
            if rng.random() < 0.3:
                ratings[poi.id] = 1 + rng.randrange(5)
        visits = []
        at = 0
        for poi in pois:
            if rng.random() < 0.2:
                at += 1 + rng.randrange(3_600_000_000)
                visits.append((poi.id, at))
        users.append(
            UserProfile(
                uuid=f"u{u}",
                selected_topics=frozenset(rng.sample(topics, rng.randrange(4))),
                visits=visits,
                ratings=ratings,
            )
        )
    for poi in pois:
        for user in users:
            score = user.ratings.get(poi.id)
            if score is not None:
                poi.ratings.append((user.uuid, score))
    subject = users[0]
    if cold_user:
        subject = UserProfile(uuid="cold", selected_topics=frozenset(), visits=[], ratings={})
        users = [subject] + users[1:]
    now = 50_000_000_000 + rng.randrange(10_000_000_000)
    k = 1 + rng.randrange(n_pois)
    return subject, users, pois, now, k


# -- trilateration fixtures ---------------------------------------------------------


def noiseless_observations(point: Position, aps, params, at: int = 0):
    """Exact forward-model observations from every access point."""
    out = []
    for ap in sorted(aps, key=lambda a: a.id):
        dist = math.hypot(ap.x - point.x, ap.y - point.y)
        out.append(RssiObservation(ap_id=ap.id, rssi_dbm=distance_to_rssi(dist, params), at=at))
    return out


# -- miniature single-server scenarios ------------------------------------------------


def stationary_traveler(x: float, y: float, ident: int = 1) -> Traveler:
    return Traveler(
        uuid=uuid_module.UUID(int=ident),
        itinerary=(Waypoint(x, y, 0.0),),
        speed_m_s=1.0,
        flight_id=None,
        selected_topics=frozenset(),
    )


def single_server_scenario(arrival_offsets_us, preset_name: str = "Fog1") -> Scenario:
    """All requests originate at one spot and hit the preset's fixed target."""
    offsets = sorted(int(v) for v in arrival_offsets_us)
    duration_s = max(1.0, (offsets[-1] if offsets else 0) / 1_000_000 + 1.0)
    params = preset_params(PRESETS[preset_name], rate_per_s=1.0, duration_s=duration_s, traveler_count=1)
    params = replace(
        params,
        noise_sigma_db=0.0,
        sampling=SamplingSpec(position_hz=0.0),
    )
    return Scenario(
        params=params,
        seed=0,
        travelers=[stationary_traveler(4.0, 30.0)],
        flights=FlightFeed([]),
        arrivals=[Arrival(at=off, traveler_index=0) for off in offsets],
    )
