"""EWMA response prediction, lowest-prediction dispatch, violation records."""
import pytest
from hypothesis import given, strategies as st

from fogsim.errors import NoCandidates, UnknownNode
from fogsim.placement import ServiceRequest
from fogsim.qos import DEFAULT_ALPHA, QosPredictor, Sla, dispatch, predicted_violation, qos_report
from fogsim.topology import AgentKind, NodeSpec, TopologySpec, build_topology


def pair_topology(cloud_rate=100.0, fog_rate=100.0):
    return build_topology(
        TopologySpec(
            [
                NodeSpec(0, AgentKind.CLOUD_AGENT, None, cloud_rate, 100.0, 0.0),
                NodeSpec(1, AgentKind.AGENT, 0, fog_rate, 100.0, 30.0),
            ]
        )
    )


def request(demand=1.0, origin=1):
    return ServiceRequest(id=0, service_class="c", demand=demand, origin=origin, created_at=0)


SLA = Sla("c", 100.0)


def test_cold_start_is_round_trip_plus_service():
    predictor = QosPredictor(pair_topology())
    # one-way 30 ms each direction, 1 unit at 100 units/s is 10 ms
    assert predictor.predict(0, request()) == pytest.approx(70.0)


def test_cold_start_adds_current_queue_delay():
    predictor = QosPredictor(pair_topology(), queue_delay_ms=lambda nid: 5.0)
    assert predictor.predict(0, request()) == pytest.approx(75.0)


def test_first_sample_initialises_estimate():
    predictor = QosPredictor(pair_topology())
    predictor.record(0, 80.0, SLA)
    assert predictor.estimates[0] == 80.0
    assert predictor.sample_count(0) == 1
    assert predictor.predict(0, request()) == 80.0


def test_ewma_update():
    predictor = QosPredictor(pair_topology(), alpha=0.2)
    predictor.record(0, 50.0, SLA)
    predictor.record(0, 100.0, SLA)
    assert predictor.estimates[0] == pytest.approx(0.2 * 100.0 + 0.8 * 50.0)
    assert predictor.estimates[0] == 60.0


def test_alpha_zero_freezes_estimate():
    predictor = QosPredictor(pair_topology(), alpha=0.0)
    predictor.record(0, 50.0, SLA)
    for obs in (10.0, 500.0, 90.0):
        predictor.record(0, obs, SLA)
    assert predictor.estimates[0] == 50.0


def test_alpha_bounds_checked():
    with pytest.raises(ValueError):
        QosPredictor(pair_topology(), alpha=1.5)
    with pytest.raises(ValueError):
        QosPredictor(pair_topology(), alpha=-0.1)
    with pytest.raises(ValueError):
        Sla("c", 0.0)


def test_violation_iff_observed_exceeds_limit():
    predictor = QosPredictor(pair_topology())
    assert predictor.record(0, 40.0, SLA) is None
    assert predictor.record(0, 100.0, SLA) is None  # boundary is compliant
    violation = predictor.record(0, 120.0, SLA, request_id=7, at=123)
    assert violation is not None
    assert violation.request_id == 7
    assert violation.node == 0
    assert violation.observed_ms == 120.0
    assert violation.limit_ms == 100.0
    assert violation.at == 123
    assert violation.service_class == "c"


def test_record_unknown_node_raises():
    predictor = QosPredictor(pair_topology())
    with pytest.raises(UnknownNode):
        predictor.record(9, 10.0, SLA)
    with pytest.raises(UnknownNode):
        predictor.predict(9, request())


def test_dispatch_prefers_lowest_prediction():
    predictor = QosPredictor(pair_topology())
    predictor.estimates = {0: 70.0, 1: 12.0}
    predictor.sample_counts = {0: 1, 1: 1}
    assert dispatch(predictor, [0, 1], request(), SLA) == 1


def test_dispatch_tie_breaks_to_lowest_id():
    predictor = QosPredictor(pair_topology())
    predictor.estimates = {0: 12.0, 1: 12.0}
    predictor.sample_counts = {0: 1, 1: 1}
    assert dispatch(predictor, [1, 0], request(), SLA) == 0


def test_dispatch_never_rejects_but_flags():
    predictor = QosPredictor(pair_topology())
    predictor.estimates = {0: 120.0, 1: 150.0}
    predictor.sample_counts = {0: 1, 1: 1}
    chosen = dispatch(predictor, [0, 1], request(), SLA)
    assert chosen == 0
    assert predicted_violation(predictor, chosen, request(), SLA)
    predictor.estimates[0] = 90.0
    assert not predicted_violation(predictor, 0, request(), SLA)


def test_dispatch_requires_candidates():
    predictor = QosPredictor(pair_topology())
    with pytest.raises(NoCandidates):
        dispatch(predictor, [], request(), SLA)


@given(st.floats(min_value=0.01, max_value=1000.0), st.permutations([0, 1]))
def test_dispatch_invariant_under_positive_scaling(scale, order):
    predictor = QosPredictor(pair_topology())
    predictor.estimates = {0: 70.0, 1: 12.0}
    predictor.sample_counts = {0: 1, 1: 1}
    baseline = dispatch(predictor, list(order), request(), SLA)
    predictor.estimates = {nid: est * scale for nid, est in predictor.estimates.items()}
    assert dispatch(predictor, list(order), request(), SLA) == baseline


@given(st.lists(st.floats(min_value=0.0, max_value=10_000.0), min_size=1, max_size=50))
def test_estimate_stays_within_observed_range(observations):
    predictor = QosPredictor(pair_topology(), alpha=DEFAULT_ALPHA)
    for obs in observations:
        predictor.record(0, obs, SLA)
    assert min(observations) - 1e-9 <= predictor.estimates[0] <= max(observations) + 1e-9


def test_violation_log_is_ordered_and_complete():
    predictor = QosPredictor(pair_topology())
    observations = [50.0, 150.0, 80.0, 120.0, 101.0, 100.0]
    log = []
    for i, obs in enumerate(observations):
        violation = predictor.record(0, obs, SLA, request_id=i, at=i * 10)
        if violation is not None:
            log.append(violation)
    assert [v.observed_ms for v in log] == [150.0, 120.0, 101.0]
    assert [v.at for v in log] == sorted(v.at for v in log)


def test_qos_report_snapshot_and_purity():
    topo = pair_topology()
    predictor = QosPredictor(topo)
    log = []
    fresh = qos_report(predictor, topo, log, "c")
    assert fresh.estimates_ms == {}
    assert fresh.violations == []
    assert fresh.free_capacity == {0: 100.0, 1: 100.0}
    violation = predictor.record(1, 130.0, SLA, request_id=3)
    log.append(violation)
    log.append(predictor.record(1, 140.0, Sla("other", 100.0), request_id=4))
    first = qos_report(predictor, topo, log, "c")
    second = qos_report(predictor, topo, log, "c")
    assert first == second
    assert first.violations == [violation]  # other service classes filtered out
    assert list(first.estimates_ms) == sorted(first.estimates_ms)
