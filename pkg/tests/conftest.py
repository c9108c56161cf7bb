import pytest

from noregress.cluster import (
    ClusterState,
    Deployment,
    GroundTruth,
    Node,
    Pvc,
    Service,
    StorageClass,
    reconcile,
)

NS = "test-hotel-reservation"


def make_state(
    *,
    geo_replicas: int = 1,
    with_pvc: bool = True,
    extra_deployments: list[Deployment] | None = None,
    request_mix: list[dict] | None = None,
) -> ClusterState:
    """Small hotel-style cluster used across the unit tests, reconciled."""
    deployments = [
        Deployment("frontend", NS, 1, "hotel/frontend:v1", 5000),
        Deployment("search", NS, 1, "hotel/search:v1", 8082),
        Deployment(
            "geo",
            NS,
            geo_replicas,
            "hotel/geo:v1",
            8083,
            pvc_refs=["geo-pvc"] if with_pvc else [],
            container_name="hotel-reserv-geo",
        ),
    ]
    if extra_deployments:
        deployments.extend(extra_deployments)
    state = ClusterState(
        nodes=[Node("node-1"), Node("node-2")],
        namespaces={NS},
        deployments=deployments,
        services=[
            Service("frontend", NS, 5000, 5000, "frontend"),
            Service("search", NS, 8082, 8082, "search"),
            Service("geo", NS, 8083, 8083, "geo"),
        ],
        pvcs=[Pvc("geo-pvc", NS, "geo-storage")] if with_pvc else [],
        storage_classes=[StorageClass("geo-storage", "rancher.io/local-path")]
        if with_pvc
        else [],
        truth=GroundTruth(
            correct_images={d.name: d.image for d in deployments},
            working_provisioners=["rancher.io/local-path"],
            request_mix=request_mix
            if request_mix is not None
            else [{"name": "search-hotel", "path": ["frontend", "search", "geo"], "weight": 1}],
        ),
    )
    return reconcile(state)


@pytest.fixture
def hotel_state() -> ClusterState:
    return make_state()
