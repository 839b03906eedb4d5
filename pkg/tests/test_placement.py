"""Recursive placement: local first, subtree next, then up the hierarchy."""
import pytest

from fogsim.errors import DoubleRelease, UnknownNode, UnknownTarget
from fogsim.placement import PlacementOutcome, ServiceRequest, place, release, try_local
from fogsim.rng import Stream
from fogsim.topology import AgentKind, NodeSpec, TopologySpec, build_topology, remove_node

from helpers import exercise_placement, random_topology


def request(demand, origin, rid=0):
    return ServiceRequest(id=rid, service_class="c", demand=demand, origin=origin, created_at=0)


def build(specs):
    return build_topology(TopologySpec(specs))


def small_tree(fog_capacity=5.0, leaf_capacity=5.0):
    return build(
        [
            NodeSpec(0, AgentKind.CLOUD_AGENT, None, 100.0, 50.0, 0.0),
            NodeSpec(1, AgentKind.AGENT, 0, 10.0, fog_capacity, 1.0),
            NodeSpec(10, AgentKind.MICROAGENT, 1, 5.0, leaf_capacity, 0.5),
            NodeSpec(11, AgentKind.MICROAGENT, 1, 5.0, leaf_capacity, 0.5),
        ]
    )


def test_try_local_boundary():
    topo = small_tree()
    assert try_local(topo, 1, request(5.0, 1))  # free == demand admits
    assert try_local(topo, 1, request(10.0, 1)) is False
    topo.nodes[1].free_capacity = 0.0
    assert try_local(topo, 1, request(5.0, 1)) is False


def test_local_admission_reserves_at_origin():
    topo = small_tree()
    decision = place(topo, request(3.0, 10))
    assert decision.outcome is PlacementOutcome.LOCAL
    assert decision.target == 10
    assert decision.path == [10]
    assert decision.hops_up == 0
    assert topo.nodes[10].free_capacity == 2.0


def test_full_origin_delegates_to_sibling_one_layer_up():
    topo = small_tree()
    topo.nodes[10].free_capacity = 0.0
    topo.nodes[1].free_capacity = 0.0
    decision = place(topo, request(2.0, 10))
    assert decision.outcome is PlacementOutcome.DELEGATED
    assert decision.target == 11
    assert decision.hops_up == 1
    assert decision.path == [10, 1, 11]
    assert topo.nodes[11].free_capacity == 3.0


def test_first_escalation_of_a_microagent_is_its_parent():
    topo = small_tree()
    topo.nodes[10].free_capacity = 0.0
    trace = []
    place(topo, request(2.0, 10), trace=trace)
    assert trace[0] == 10
    assert trace[1] == 1


def test_exhausted_tree_rejects_without_side_effects():
    topo = small_tree()
    for node in topo.nodes.values():
        node.free_capacity = 0.0
    decision = place(topo, request(1.0, 10))
    assert decision.outcome is PlacementOutcome.REJECTED
    assert decision.target is None
    assert all(node.free_capacity == 0.0 for node in topo.nodes.values())


def test_oversized_demand_rejected_everywhere():
    topo = small_tree()
    decision = place(topo, request(1000.0, 11))
    assert decision.outcome is PlacementOutcome.REJECTED


def test_unknown_origin_raises():
    with pytest.raises(UnknownNode):
        place(small_tree(), request(1.0, 99))


def test_subtree_search_ascends_node_ids_and_skips_arrival_branch():
    topo = build(
        [
            NodeSpec(0, AgentKind.CLOUD_AGENT, None, 100.0, 50.0, 0.0),
            NodeSpec(1, AgentKind.AGENT, 0, 10.0, 5.0, 1.0),
            NodeSpec(2, AgentKind.AGENT, 1, 10.0, 5.0, 1.0),
            NodeSpec(3, AgentKind.AGENT, 1, 10.0, 5.0, 1.0),
            NodeSpec(4, AgentKind.AGENT, 1, 10.0, 5.0, 1.0),
        ]
    )
    topo.nodes[2].free_capacity = 0.0
    topo.nodes[1].free_capacity = 0.0
    trace = []
    decision = place(topo, request(1.0, 2), trace=trace)
    # search above never re-checks the branch it came from (node 2) and
    # visits the remaining children lowest id first, so 3 wins over 4
    assert decision.outcome is PlacementOutcome.DELEGATED
    assert decision.target == 3
    assert decision.hops_up == 1
    assert trace == [2, 1, 3]


def test_non_leader_forwards_sideways_before_going_up():
    topo = build(
        [
            NodeSpec(0, AgentKind.CLOUD_AGENT, None, 100.0, 50.0, 0.0),
            NodeSpec(1, AgentKind.AGENT, 0, 20.0, 5.0, 1.0),
            NodeSpec(2, AgentKind.AGENT, 0, 10.0, 5.0, 1.0),
        ]
    )
    assert topo.nodes[1].is_leader
    topo.nodes[2].free_capacity = 0.0
    trace = []
    decision = place(topo, request(2.0, 2), trace=trace)
    # sideways hop to the cluster leader does not count as going up
    assert decision.target == 1
    assert decision.hops_up == 0
    assert trace == [2, 1]


def test_rejection_consumes_no_capacity_then_leaves_tree_usable():
    topo = small_tree()
    for node in topo.nodes.values():
        node.free_capacity = 0.0
    place(topo, request(1.0, 10))
    topo.nodes[11].free_capacity = 1.0
    decision = place(topo, request(1.0, 10))
    assert decision.outcome is PlacementOutcome.DELEGATED
    assert decision.target == 11


def test_release_restores_exactly_once():
    topo = small_tree()
    decision = place(topo, request(4.0, 10))
    assert topo.nodes[10].free_capacity == 1.0
    release(topo, decision)
    assert topo.nodes[10].free_capacity == 5.0
    with pytest.raises(DoubleRelease):
        release(topo, decision)
    assert topo.nodes[10].free_capacity == 5.0


def test_release_clamps_at_capacity():
    topo = small_tree()
    decision = place(topo, request(4.0, 10))
    topo.nodes[10].free_capacity = 4.0  # somebody freed out of band
    release(topo, decision)
    assert topo.nodes[10].free_capacity == 5.0


def test_release_after_node_removal():
    topo = small_tree()
    decision = place(topo, request(2.0, 10))
    remove_node(topo, 1)  # takes microagents 10 and 11 with it
    with pytest.raises(UnknownTarget):
        release(topo, decision)
    with pytest.raises(DoubleRelease):
        release(topo, decision)


def test_release_of_rejection_is_an_error():
    topo = small_tree()
    decision = place(topo, request(1000.0, 10))
    with pytest.raises(ValueError):
        release(topo, decision)


def test_hops_up_bounded_by_origin_layer():
    rng = Stream(501)
    for trial in range(100):
        topo = random_topology(rng.derive("t", trial))
        ids = sorted(topo.nodes)
        origin = ids[rng.randrange(len(ids))]
        decision = place(topo, request(float(1 + rng.randrange(5)), origin, rid=trial))
        assert decision.hops_up <= topo.nodes[origin].layer


def test_random_traffic_matches_brute_force():
    rng = Stream(777)
    for trial in range(150):
        topo = random_topology(rng.derive("topo", trial))
        exercise_placement(topo, rng.derive("traffic", trial))
