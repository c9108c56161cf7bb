"""Walk through the simulated cluster: reconciliation, faults, severity.

Run with:  python3 demos/01_cluster_and_severity.py
"""

from noregress.cluster import (
    ClusterState,
    Deployment,
    FaultSpec,
    GroundTruth,
    Node,
    Pvc,
    Service,
    StorageClass,
    inject_fault,
    reconcile,
)
from noregress.health import health_report, severity
from noregress.workload import run_workload

NS = "test-hotel-reservation"

# Declare a small hotel-reservation style cluster. The declared images double
# as the ground truth of what actually runs; the request mix is the traffic
# the workload generator replays.
state = ClusterState(
    nodes=[Node("node-1"), Node("node-2")],
    namespaces={NS},
    deployments=[
        Deployment("frontend", NS, 1, "hotel/frontend:v1", 5000),
        Deployment("search", NS, 1, "hotel/search:v1", 8082),
        Deployment("geo", NS, 1, "hotel/geo:v1", 8083,
                    pvc_refs=["geo-pvc"], container_name="hotel-reserv-geo"),
    ],
    services=[
        Service("frontend", NS, 5000, 5000, "frontend"),
        Service("search", NS, 8082, 8082, "search"),
        Service("geo", NS, 8083, 8083, "geo"),
    ],
    pvcs=[Pvc("geo-pvc", NS, "geo-storage")],
    storage_classes=[StorageClass("geo-storage", "rancher.io/local-path")],
    truth=GroundTruth(
        correct_images={"frontend": "hotel/frontend:v1",
                        "search": "hotel/search:v1",
                        "geo": "hotel/geo:v1"},
        working_provisioners=["rancher.io/local-path"],
        request_mix=[{"name": "search-hotel",
                      "path": ["frontend", "search", "geo"], "weight": 1}],
    ),
)

state = reconcile(state)
print("== healthy cluster ==")
for pod in state.pods:
    print(f"  {pod.name:14s} {pod.phase:9s} node={pod.node}")
wl = run_workload(state, 117, seed=0)
mu = severity(health_report(state, wl), crashed=state.crashed)
print(f"  workload: {wl.failed_requests}/{wl.total_requests} failed, severity = {mu}")

# Remove the storage class, exactly the shape of a redeploy that lost it.
print("\n== inject: storage class removed ==")
broken = inject_fault(state, FaultSpec("MissingStorageClass", "geo-storage"))
for pod in broken.pods:
    print(f"  {pod.name:14s} {pod.phase:9s}")
print(f"  geo-pvc: {broken.pvc('geo-pvc').status}")
wl = run_workload(broken, 117, seed=0)
report = health_report(broken, wl)
mu = severity(report, crashed=broken.crashed)
print(f"  alerts={sorted(report.alerts)}")
print(f"  workload: {wl.failed_requests}/117 failed, severity = {mu}")

# The reconciler recreates deleted pods; a transient fault pinned to a pod
# dies with it.
print("\n== inject: transient pod fault, cleared by recreation ==")
wedged = inject_fault(state, FaultSpec("PodKillTransient", "geo/0", persistent=False))
(geo_pod,) = wedged.pods_of("geo")
print(f"  {geo_pod.name}: {geo_pod.phase} (restarts={geo_pod.restarts})")
wedged.pods.remove(geo_pod)
healed = reconcile(wedged)
(fresh,) = healed.pods_of("geo")
print(f"  after delete+reconcile: {fresh.name}: {fresh.phase}")
