"""Simulated cluster environment: resources, reconciliation, and fault injection.

The environment is a value type: every operation takes a state and returns a
new state, leaving the input untouched. A crashed environment is represented
by an empty state with ``crashed=True``; readers must treat every resource
collection as unavailable in that case.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field, replace

PENDING = "Pending"
RUNNING = "Running"
ERROR = "Error"
CRASHLOOP = "CrashLoopBackOff"

POD_PHASES = (PENDING, RUNNING, ERROR, CRASHLOOP)

PVC_PENDING = "Pending"
PVC_BOUND = "Bound"


class InvalidTarget(Exception):
    """Fault injection named a resource that does not exist."""


class UnknownTarget(Exception):
    """A write command named a resource that does not exist."""


class ImmutableFieldConflict(Exception):
    """An apply attempted to change an immutable field of a live resource."""


@dataclass
class Node:
    name: str
    schedulable: bool = True
    healthy: bool = True


@dataclass
class Deployment:
    name: str
    namespace: str
    desired_replicas: int
    image: str
    container_port: int
    node_selector: str | None = None
    pvc_refs: list[str] = field(default_factory=list)
    container_name: str | None = None

    def container(self) -> str:
        return self.container_name or self.name


@dataclass
class Pod:
    name: str
    owner_deployment: str
    namespace: str
    phase: str = PENDING
    restarts: int = 0
    node: str | None = None
    # A transient fault pinned to this pod; cleared only when the pod is
    # recreated under a fresh name.
    poisoned: bool = False


@dataclass
class Service:
    name: str
    namespace: str
    port: int
    target_port: int
    selector: str


@dataclass
class Pvc:
    name: str
    namespace: str
    storage_class: str
    status: str = PVC_PENDING


@dataclass
class StorageClass:
    name: str
    provisioner: str
    binding_mode: str = "Immediate"


@dataclass
class GroundTruth:
    """Facts the environment knows but agents can only discover by observation.

    ``correct_images`` captures which image actually runs for each deployment;
    ``working_provisioners`` captures which storage provisioners can actually
    provision volumes; ``crashing_commands`` lists (verb, kind, name) triples
    that take the whole environment down; ``request_mix`` is the traffic the
    workload generator replays over the service call graph.
    """

    correct_images: dict[str, str] = field(default_factory=dict)
    working_provisioners: list[str] = field(default_factory=list)
    crashing_commands: list[tuple[str, str, str]] = field(default_factory=list)
    request_mix: list[dict] = field(default_factory=list)


@dataclass
class ClusterState:
    crashed: bool = False
    nodes: list[Node] = field(default_factory=list)
    namespaces: set[str] = field(default_factory=set)
    deployments: list[Deployment] = field(default_factory=list)
    pods: list[Pod] = field(default_factory=list)
    services: list[Service] = field(default_factory=list)
    pvcs: list[Pvc] = field(default_factory=list)
    storage_classes: list[StorageClass] = field(default_factory=list)
    truth: GroundTruth = field(default_factory=GroundTruth)
    # Monotone counter used to mint unique pod names. Not part of the
    # observable state (see canonical_form).
    pod_serial: int = 0

    def clone(self) -> "ClusterState":
        return copy.deepcopy(self)

    def deployment(self, name: str) -> Deployment | None:
        for dep in self.deployments:
            if dep.name == name:
                return dep
        return None

    def service(self, name: str) -> Service | None:
        for svc in self.services:
            if svc.name == name:
                return svc
        return None

    def pvc(self, name: str) -> Pvc | None:
        for claim in self.pvcs:
            if claim.name == name:
                return claim
        return None

    def storage_class(self, name: str) -> StorageClass | None:
        for cls in self.storage_classes:
            if cls.name == name:
                return cls
        return None

    def node(self, name: str) -> Node | None:
        for node in self.nodes:
            if node.name == name:
                return node
        return None

    def pod(self, name: str) -> Pod | None:
        for pod in self.pods:
            if pod.name == name:
                return pod
        return None

    def pods_of(self, deployment: str) -> list[Pod]:
        owned = [p for p in self.pods if p.owner_deployment == deployment]
        owned.sort(key=_pod_serial_key)
        return owned


@dataclass(frozen=True)
class Snapshot:
    """Immutable value copy of a cluster state."""

    _state: ClusterState

    def restore(self) -> ClusterState:
        return copy.deepcopy(self._state)


def snapshot(state: ClusterState) -> Snapshot:
    return Snapshot(copy.deepcopy(state))


def restore(snap: Snapshot) -> ClusterState:
    return snap.restore()


def crash(state: ClusterState) -> ClusterState:
    """Transition to the fully-unavailable state.

    Resource collections are emptied so that no reader can accidentally keep
    consuming stale data from a dead environment.
    """
    return ClusterState(crashed=True, truth=copy.deepcopy(state.truth))


def _pod_serial_key(pod: Pod) -> int:
    # Pod names are "<owner>-<serial>"; the serial gives creation order.
    return int(pod.name.rsplit("-", 1)[1])


def _eligible_nodes(state: ClusterState, dep: Deployment) -> list[str]:
    if dep.node_selector is not None:
        node = state.node(dep.node_selector)
        if node is None or not (node.schedulable and node.healthy):
            return []
        return [node.name]
    return sorted(n.name for n in state.nodes if n.schedulable and n.healthy)


def reconcile(state: ClusterState) -> ClusterState:
    """Drive the actual state toward the declared desired state.

    Deterministic and idempotent: pod counts are matched to desired replica
    counts (newest pods trimmed first), PVC binding is recomputed, and pod
    phase/node assignment is a pure function of the surrounding state.
    """
    if state.crashed:
        return state.clone()

    out = state.clone()

    # PVC binding: a claim binds when its storage class exists and that
    # class's provisioner can actually provision volumes.
    for claim in out.pvcs:
        cls = out.storage_class(claim.storage_class)
        bound = cls is not None and cls.provisioner in out.truth.working_provisioners
        claim.status = PVC_BOUND if bound else PVC_PENDING

    # Drop pods whose owner no longer exists.
    owners = {d.name for d in out.deployments}
    out.pods = [p for p in out.pods if p.owner_deployment in owners]

    for dep in sorted(out.deployments, key=lambda d: (d.namespace, d.name)):
        owned = out.pods_of(dep.name)
        while len(owned) > dep.desired_replicas:
            victim = owned.pop()  # trim newest first
            out.pods.remove(victim)
        while len(owned) < dep.desired_replicas:
            pod = Pod(
                name=f"{dep.name}-{out.pod_serial}",
                owner_deployment=dep.name,
                namespace=dep.namespace,
            )
            out.pod_serial += 1
            out.pods.append(pod)
            owned.append(pod)

        pending = False
        if any(
            (claim := out.pvc(ref)) is None or claim.status != PVC_BOUND
            for ref in dep.pvc_refs
        ):
            pending = True
        eligible = _eligible_nodes(out, dep)
        if not eligible:
            pending = True

        wrong_image = dep.image != out.truth.correct_images.get(dep.name, dep.image)

        for i, pod in enumerate(owned):
            if pod.poisoned:
                pod.phase = ERROR
                pod.node = eligible[i % len(eligible)] if eligible else None
            elif pending:
                pod.phase = PENDING
                pod.node = None
            elif wrong_image:
                pod.phase = CRASHLOOP
                pod.node = eligible[i % len(eligible)]
            else:
                pod.phase = RUNNING
                pod.node = eligible[i % len(eligible)]

    return out


@dataclass
class FaultSpec:
    kind: str
    target: str = ""
    params: dict = field(default_factory=dict)
    persistent: bool = True


FAULT_KINDS = (
    "MissingStorageClass",
    "WrongImage",
    "TargetPortMisconfig",
    "ScaleToZero",
    "AssignNonexistentNode",
    "PodKillTransient",
    "NoOp",
)


def inject_fault(state: ClusterState, spec: FaultSpec) -> ClusterState:
    """Apply a fault to the environment and reconcile.

    Persistent faults mutate declared state and survive pod recreation;
    the transient pod kill poisons one live pod and clears once that pod is
    recreated under a fresh name.
    """
    if spec.kind not in FAULT_KINDS:
        raise InvalidTarget(f"unknown fault kind: {spec.kind}")
    if spec.kind == "NoOp":
        return state.clone()

    out = state.clone()
    if spec.kind == "MissingStorageClass":
        cls = out.storage_class(spec.target)
        if cls is None:
            raise InvalidTarget(f"storage class not found: {spec.target}")
        out.storage_classes.remove(cls)
    elif spec.kind == "WrongImage":
        dep = out.deployment(spec.target)
        if dep is None:
            raise InvalidTarget(f"deployment not found: {spec.target}")
        dep.image = spec.params.get("image", dep.image + "-broken")
    elif spec.kind == "TargetPortMisconfig":
        svc = out.service(spec.target)
        if svc is None:
            raise InvalidTarget(f"service not found: {spec.target}")
        svc.target_port = int(spec.params["target_port"])
    elif spec.kind == "ScaleToZero":
        dep = out.deployment(spec.target)
        if dep is None:
            raise InvalidTarget(f"deployment not found: {spec.target}")
        dep.desired_replicas = 0
    elif spec.kind == "AssignNonexistentNode":
        dep = out.deployment(spec.target)
        if dep is None:
            raise InvalidTarget(f"deployment not found: {spec.target}")
        dep.node_selector = spec.params.get("node", "no-such-node")
    elif spec.kind == "PodKillTransient":
        if spec.persistent:
            raise InvalidTarget("PodKillTransient must be declared persistent=false")
        pod = _resolve_pod_target(out, spec.target)
        if pod is None:
            raise InvalidTarget(f"pod not found: {spec.target}")
        pod.poisoned = True
        pod.restarts += 1
    return reconcile(out)


def _resolve_pod_target(state: ClusterState, target: str) -> Pod | None:
    """Resolve a pod either by exact name or by "<deployment>/<ordinal>"."""
    pod = state.pod(target)
    if pod is not None:
        return pod
    if "/" in target:
        owner, _, ordinal = target.partition("/")
        owned = state.pods_of(owner)
        idx = int(ordinal)
        if 0 <= idx < len(owned):
            return owned[idx]
    return None


# ---------------------------------------------------------------------------
# Deep equality
# ---------------------------------------------------------------------------

def canonical_form(state: ClusterState) -> tuple:
    """Canonical value of a state, used for deep equality.

    Collections are sorted; pods are identified by (owner, ordinal) rather
    than by their minted names, so a pod recreated by the reconciler compares
    equal to the one it replaced. The pod-name serial counter and per-pod
    restart counters are bookkeeping/telemetry and excluded.
    """
    if state.crashed:
        return ("crashed",)
    pods = []
    by_owner: dict[str, list[Pod]] = {}
    for pod in state.pods:
        by_owner.setdefault(pod.owner_deployment, []).append(pod)
    for owner in sorted(by_owner):
        owned = sorted(by_owner[owner], key=_pod_serial_key)
        for ordinal, pod in enumerate(owned):
            pods.append((owner, ordinal, pod.namespace, pod.phase, pod.node, pod.poisoned))
    return (
        tuple(sorted((n.name, n.schedulable, n.healthy) for n in state.nodes)),
        tuple(sorted(state.namespaces)),
        tuple(
            sorted(
                (
                    d.name,
                    d.namespace,
                    d.desired_replicas,
                    d.image,
                    d.container_port,
                    d.node_selector,
                    tuple(sorted(d.pvc_refs)),
                    d.container(),
                )
                for d in state.deployments
            )
        ),
        tuple(pods),
        tuple(
            sorted(
                (s.name, s.namespace, s.port, s.target_port, s.selector)
                for s in state.services
            )
        ),
        tuple(sorted((p.name, p.namespace, p.storage_class, p.status) for p in state.pvcs)),
        tuple(
            sorted(
                (c.name, c.provisioner, c.binding_mode) for c in state.storage_classes
            )
        ),
    )


def states_equal(a: ClusterState, b: ClusterState) -> bool:
    return canonical_form(a) == canonical_form(b)


def check_invariants(state: ClusterState) -> list[str]:
    """Structural invariant audit; returns a list of violations (empty = ok)."""
    problems = []
    if state.crashed:
        return problems
    names = [p.name for p in state.pods]
    if len(names) != len(set(names)):
        problems.append("duplicate pod names")
    owners = {d.name for d in state.deployments}
    for pod in state.pods:
        if pod.owner_deployment not in owners:
            problems.append(f"pod {pod.name} has unknown owner {pod.owner_deployment}")
    for claim in state.pvcs:
        if claim.status == PVC_BOUND and state.storage_class(claim.storage_class) is None:
            problems.append(f"pvc {claim.name} bound without storage class")
    for dep in state.deployments:
        if len(state.pods_of(dep.name)) != dep.desired_replicas:
            problems.append(
                f"deployment {dep.name} has {len(state.pods_of(dep.name))} pods, "
                f"wants {dep.desired_replicas}"
            )
    return problems


__all__ = [
    "CRASHLOOP",
    "ERROR",
    "FAULT_KINDS",
    "PENDING",
    "POD_PHASES",
    "PVC_BOUND",
    "PVC_PENDING",
    "RUNNING",
    "ClusterState",
    "Deployment",
    "FaultSpec",
    "GroundTruth",
    "ImmutableFieldConflict",
    "InvalidTarget",
    "Node",
    "Pod",
    "Pvc",
    "Service",
    "Snapshot",
    "StorageClass",
    "UnknownTarget",
    "canonical_form",
    "check_invariants",
    "crash",
    "inject_fault",
    "reconcile",
    "restore",
    "snapshot",
    "states_equal",
]
