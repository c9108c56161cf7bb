"""Cluster model: reconciliation, faults, snapshots, deep equality."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noregress.cluster import (
    CRASHLOOP,
    ERROR,
    PENDING,
    PVC_BOUND,
    PVC_PENDING,
    RUNNING,
    Deployment,
    FaultSpec,
    InvalidTarget,
    Node,
    canonical_form,
    check_invariants,
    inject_fault,
    reconcile,
    restore,
    snapshot,
    states_equal,
)

from conftest import NS, make_state


class TestReconcile:
    def test_absent_storage_class_leaves_pvc_and_pod_pending(self):
        state = make_state()
        state.storage_classes = []
        out = reconcile(state)
        assert out.pvc("geo-pvc").status == PVC_PENDING
        (geo_pod,) = out.pods_of("geo")
        assert geo_pod.phase == PENDING
        assert geo_pod.node is None

    def test_restoring_storage_class_binds_and_runs(self):
        state = make_state()
        state.storage_classes = []
        broken = reconcile(state)
        fixed = make_state()
        fixed.pods = broken.pods
        fixed.pod_serial = broken.pod_serial
        out = reconcile(fixed)
        assert out.pvc("geo-pvc").status == PVC_BOUND
        assert out.pods_of("geo")[0].phase == RUNNING

    def test_idempotent_on_consistent_state(self, hotel_state):
        again = reconcile(hotel_state)
        assert states_equal(again, hotel_state)
        assert [p.name for p in again.pods] == [p.name for p in hotel_state.pods]

    def test_pod_count_matches_desired(self):
        state = make_state(geo_replicas=3)
        assert len(state.pods_of("geo")) == 3
        state.deployment("geo").desired_replicas = 1
        out = reconcile(state)
        assert len(out.pods_of("geo")) == 1
        assert not check_invariants(out)

    def test_wrong_image_crashloops(self, hotel_state):
        hotel_state.deployment("search").image = "hotel/search:broken"
        out = reconcile(hotel_state)
        assert all(p.phase == CRASHLOOP for p in out.pods_of("search"))

    def test_missing_selector_node_pends(self, hotel_state):
        hotel_state.deployment("search").node_selector = "node-ghost"
        out = reconcile(hotel_state)
        assert all(p.phase == PENDING for p in out.pods_of("search"))

    def test_unprovisionable_class_keeps_pvc_pending(self, hotel_state):
        hotel_state.storage_classes[0].provisioner = "kubernetes.io/aws-ebs"
        out = reconcile(hotel_state)
        assert out.pvc("geo-pvc").status == PVC_PENDING

    @given(st.integers(min_value=0, max_value=5), st.booleans(), st.booleans())
    @settings(max_examples=40, deadline=None)
    def test_reconcile_idempotence_randomized(self, replicas, drop_class, cordon):
        state = make_state(geo_replicas=replicas)
        if drop_class:
            state.storage_classes = []
        if cordon:
            for node in state.nodes:
                node.schedulable = False
        once = reconcile(state)
        twice = reconcile(once)
        assert canonical_form(once) == canonical_form(twice)
        assert not check_invariants(once)


class TestSnapshot:
    def test_round_trip_deep_equal(self, hotel_state):
        snap = snapshot(hotel_state)
        assert states_equal(restore(snap), hotel_state)

    def test_mutation_after_snapshot_does_not_leak(self, hotel_state):
        snap = snapshot(hotel_state)
        hotel_state.deployment("geo").desired_replicas = 9
        hotel_state.pods.clear()
        back = restore(snap)
        assert back.deployment("geo").desired_replicas == 1
        assert len(back.pods) == 3

    def test_crashed_state_round_trips(self, hotel_state):
        hotel_state.crashed = True
        back = restore(snapshot(hotel_state))
        assert back.crashed is True


class TestFaults:
    def test_missing_storage_class(self, hotel_state):
        out = inject_fault(hotel_state, FaultSpec("MissingStorageClass", "geo-storage"))
        assert out.storage_class("geo-storage") is None
        assert out.pvc("geo-pvc").status == PVC_PENDING
        assert out.pods_of("geo")[0].phase == PENDING

    def test_noop_is_identity(self, hotel_state):
        out = inject_fault(hotel_state, FaultSpec("NoOp"))
        assert states_equal(out, hotel_state)

    def test_transient_pod_kill_clears_on_recreate(self, hotel_state):
        out = inject_fault(
            hotel_state, FaultSpec("PodKillTransient", "geo/0", persistent=False)
        )
        (geo_pod,) = out.pods_of("geo")
        assert geo_pod.phase == ERROR
        assert geo_pod.poisoned
        assert geo_pod.restarts == 1
        # recreate: drop the pod, reconcile brings a clean replacement
        out.pods.remove(geo_pod)
        healed = reconcile(out)
        (fresh,) = healed.pods_of("geo")
        assert fresh.name != geo_pod.name
        assert fresh.phase == RUNNING
        assert not fresh.poisoned

    def test_persistent_transient_kill_rejected(self, hotel_state):
        with pytest.raises(InvalidTarget):
            inject_fault(hotel_state, FaultSpec("PodKillTransient", "geo/0", persistent=True))

    def test_invalid_target_rejected(self, hotel_state):
        with pytest.raises(InvalidTarget):
            inject_fault(hotel_state, FaultSpec("ScaleToZero", "no-such-deployment"))

    def test_wrong_image_fault(self, hotel_state):
        out = inject_fault(
            hotel_state,
            FaultSpec("WrongImage", "geo", {"image": "hotel/geo:broken"}),
        )
        assert out.pods_of("geo")[0].phase == CRASHLOOP

    def test_scale_to_zero_removes_pods_silently(self, hotel_state):
        out = inject_fault(hotel_state, FaultSpec("ScaleToZero", "geo"))
        assert out.pods_of("geo") == []


class TestCanonicalEquality:
    def test_recreated_pod_compares_equal(self, hotel_state):
        twin = make_state()
        (geo_pod,) = twin.pods_of("geo")
        twin.pods.remove(geo_pod)
        twin = reconcile(twin)  # replacement has a fresh name
        assert twin.pods_of("geo")[0].name != geo_pod.name
        assert states_equal(twin, hotel_state)

    def test_phase_difference_breaks_equality(self, hotel_state):
        twin = make_state()
        twin.pods_of("geo")[0].poisoned = True
        twin = reconcile(twin)
        assert not states_equal(twin, hotel_state)

    def test_collection_order_is_irrelevant(self, hotel_state):
        twin = make_state()
        twin.deployments.reverse()
        twin.services.reverse()
        twin.nodes.reverse()
        assert states_equal(twin, hotel_state)

    def test_cordoned_node_breaks_equality(self, hotel_state):
        twin = make_state()
        twin.node("node-1").schedulable = False
        assert not states_equal(reconcile(twin), hotel_state)
