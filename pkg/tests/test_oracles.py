"""Termination oracles and their conjunction."""

from noregress.cluster import FaultSpec, inject_fault, reconcile
from noregress.health import HealthReport, health_report, severity
from noregress.oracles import (
    alert_oracle,
    combined_validate,
    health_oracle,
    workload_oracle,
)
from noregress.workload import WorkloadReport, run_workload

from conftest import make_state


def probe(state, n=117, seed=0):
    wl = run_workload(state, n, seed)
    return wl, health_report(state, wl)


class TestAlertOracle:
    def test_empty_alerts_pass(self):
        assert alert_oracle(HealthReport()).passed

    def test_pending_pvc_alert_fails_with_identifier(self, hotel_state):
        hotel_state.storage_classes.clear()
        state = reconcile(hotel_state)
        _, report = probe(state, n=0)
        verdict = alert_oracle(report)
        assert not verdict.passed
        assert any("geo-pvc" in issue for issue in verdict.issues)

    def test_crashed_state_fails(self):
        state = make_state()
        state.crashed = True
        verdict = health_oracle(state)
        assert not verdict.passed


class TestWorkloadOracle:
    def test_zero_failures_pass(self):
        assert workload_oracle(WorkloadReport(117, 0)).passed

    def test_115_failures_issue_format(self):
        verdict = workload_oracle(WorkloadReport(115, 115))
        assert not verdict.passed
        assert verdict.issues == ("  Non-2xx or 3xx responses: 115",)

    def test_117_failures_fail(self):
        assert not workload_oracle(WorkloadReport(117, 117)).passed


class TestHealthOracle:
    def test_all_running_and_bound_pass(self, hotel_state):
        assert health_oracle(hotel_state).passed

    def test_crashloop_issue_uses_container_name(self, hotel_state):
        hotel_state.deployment("geo").image = "hotel/geo:broken"
        state = reconcile(hotel_state)
        verdict = health_oracle(state)
        assert not verdict.passed
        assert "Container hotel-reserv-geo is in CrashLoopBackOff" in verdict.issues

    def test_pending_pod_issue_names_pod(self, hotel_state):
        hotel_state.storage_classes.clear()
        state = reconcile(hotel_state)
        verdict = health_oracle(state)
        (geo_pod,) = state.pods_of("geo")
        assert f"Pod {geo_pod.name} is in Pending state" in verdict.issues

    def test_cordoned_node_fails(self, hotel_state):
        hotel_state.node("node-1").schedulable = False
        verdict = health_oracle(reconcile(hotel_state))
        assert not verdict.passed
        assert "Node node-1 is unschedulable" in verdict.issues


class TestCombined:
    def test_healthy_clean_success(self, hotel_state):
        wl, report = probe(hotel_state)
        assert combined_validate(hotel_state, wl, report).success

    def test_healthy_pods_failing_workload(self, hotel_state):
        # the functional-failure witness: orchestration healthy, HTTP broken
        broken = inject_fault(
            hotel_state, FaultSpec("TargetPortMisconfig", "geo", {"target_port": 8089})
        )
        wl, report = probe(broken, n=115)
        assert health_oracle(broken).passed
        assert not workload_oracle(wl).passed
        result = combined_validate(broken, wl, report)
        assert not result.success
        assert "  Non-2xx or 3xx responses: 115" in result.issues

    def test_composite_failure_concatenates_issues(self, hotel_state):
        hotel_state.deployment("search").image = "hotel/search:broken"
        hotel_state.storage_classes.clear()
        state = reconcile(hotel_state)
        wl, report = probe(state)
        result = combined_validate(state, wl, report)
        assert not result.success
        assert any("Non-2xx" in i for i in result.issues)
        assert any("CrashLoopBackOff" in i for i in result.issues)
        assert any("Pending" in i for i in result.issues)

    def test_conjunction_soundness_success_implies_zero_severity(self, hotel_state):
        wl, report = probe(hotel_state)
        result = combined_validate(hotel_state, wl, report)
        assert result.success
        assert severity(report, crashed=hotel_state.crashed) == 0

    def test_purity_none_of_the_oracles_mutate(self, hotel_state):
        from noregress.cluster import states_equal

        twin = make_state()
        wl, report = probe(hotel_state)
        alert_oracle(report)
        workload_oracle(wl)
        health_oracle(hotel_state)
        combined_validate(hotel_state, wl, report)
        assert states_equal(hotel_state, twin)


class TestWeakOracleWitnesses:
    """Each oracle passes on some state where the conjunction fails."""

    def test_health_passes_combined_fails(self, hotel_state):
        broken = inject_fault(
            hotel_state, FaultSpec("TargetPortMisconfig", "geo", {"target_port": 8089})
        )
        wl, report = probe(broken)
        assert health_oracle(broken).passed
        assert not combined_validate(broken, wl, report).success

    def test_alert_passes_combined_fails(self, hotel_state):
        # scale-to-zero: no pods means no alerts, yet requests fail
        broken = inject_fault(hotel_state, FaultSpec("ScaleToZero", "geo"))
        wl, report = probe(broken)
        assert alert_oracle(report).passed
        assert not combined_validate(broken, wl, report).success

    def test_workload_passes_combined_fails(self):
        # a crashlooping deployment that no request path touches
        from noregress.cluster import Deployment

        state = make_state(
            extra_deployments=[
                Deployment(
                    "memcached-rate", "test-hotel-reservation", 1, "hotel/memcached:v1", 11211
                )
            ]
        )
        state.truth.correct_images["memcached-rate"] = "hotel/memcached:v1"
        state.deployment("memcached-rate").image = "hotel/memcached:broken"
        state = reconcile(state)
        wl, report = probe(state)
        assert workload_oracle(wl).passed
        assert not combined_validate(state, wl, report).success
