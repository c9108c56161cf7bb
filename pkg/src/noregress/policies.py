"""Pluggable decision-makers driving detection and mitigation.

Policies consume an observation bundle assembled purely from read-class
operations and return concrete command plans. Scripted policies replay
playbook data files keyed by evidence patterns and attempt number; the random
policy fuzzes lint-passing writes for safety testing; the external adapter
forwards observations to another process over a framed wire protocol.
"""

from __future__ import annotations

import json
import random
import select
from dataclasses import dataclass, field

from .cluster import RUNNING, ClusterState
from .commands import Command, Role, vet
from .health import HealthReport
from .workload import Trace, WorkloadReport

ANOMALOUS = "Anomalous"
HEALTHY = "Healthy"


class PlaybookExhausted(Exception):
    """The playbook has no further candidate plan for this evidence."""


class ProtocolTimeout(Exception):
    """The external policy did not answer within its deadline."""


class MalformedPlan(Exception):
    """An external plan failed schema, parse, or confinement checks."""


@dataclass
class ReflectionNote:
    issues: list[str]
    prior_plan_summary: str
    hypothesis: str


@dataclass
class MitigationPlan:
    intent: str
    commands: list[str]
    expected_effect: str = ""

    def lint_all(self) -> list[str]:
        """Confinement problems for the whole plan; empty means clean."""
        problems = []
        for text in self.commands:
            _, verdict = vet(text, Role.WRITER)
            if not verdict.allowed:
                problems.append(f"{text!r}: {verdict.reason}")
        return problems


@dataclass
class ObservationBundle:
    alerts: list[str] = field(default_factory=list)
    pod_table: list[dict] = field(default_factory=list)
    log_excerpts: dict[str, list[str]] = field(default_factory=dict)
    trace_analysis: list[dict] = field(default_factory=list)
    prior_reflection: ReflectionNote | None = None
    failed_requests: int = 0
    inventory: dict[str, list[str]] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Observation building (read-only)
# ---------------------------------------------------------------------------

_ERROR_MARKERS = ("error", "panic", "fatal", "fail")


def synthesize_logs(state: ClusterState, deployment_name: str) -> list[str]:
    """Recent log lines for a deployment, pre-filtered to error-class lines."""
    dep = state.deployment(deployment_name)
    if dep is None:
        return []
    lines: list[str] = []
    for pod in state.pods_of(deployment_name):
        if pod.phase == "CrashLoopBackOff":
            lines.append(
                f'{pod.name}: error: container "{dep.container()}" with image '
                f'"{dep.image}" exited before becoming ready'
            )
            lines.append(f"{pod.name}: back-off restarting failed container")
        elif pod.phase == "Error":
            lines.append(f"{pod.name}: panic: container terminated unexpectedly")
    return [l for l in lines if any(m in l.lower() for m in _ERROR_MARKERS)]


def bootstrap_localize(traces: list[Trace]) -> list[dict]:
    """Rank fault suspects from failing traces.

    For each failing request, the suspect is the last service it reached
    before the error together with the downstream operation that service was
    invoking. Suspects are deduplicated and ranked by error frequency, ties
    broken lexicographically.
    """
    counts: dict[tuple[str, str], int] = {}
    for trace in traces:
        for span in trace.spans:
            if span.error:
                key = (span.service, span.operation)
                counts[key] = counts.get(key, 0) + 1
                break
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [
        {"service": service, "operation": operation, "count": count}
        for (service, operation), count in ranked
    ]


def build_observation(
    state: ClusterState,
    wl: WorkloadReport,
    report: HealthReport,
    reflection: ReflectionNote | None = None,
) -> ObservationBundle:
    """Assemble the observation bundle; never mutates the state."""
    pod_table = [
        {"name": p.name, "phase": p.phase, "restarts": p.restarts}
        for p in sorted(state.pods, key=lambda p: p.name)
    ]
    logs = {
        d.name: lines
        for d in state.deployments
        if (lines := synthesize_logs(state, d.name))
    }
    return ObservationBundle(
        alerts=sorted(report.alerts),
        pod_table=pod_table,
        log_excerpts=logs,
        trace_analysis=bootstrap_localize(wl.traces),
        prior_reflection=reflection,
        failed_requests=wl.failed_requests,
        inventory={
            "deployments": sorted(d.name for d in state.deployments),
            "services": sorted(s.name for s in state.services),
            "nodes": sorted(n.name for n in state.nodes),
            "storage_classes": sorted(c.name for c in state.storage_classes),
            "pvcs": sorted(p.name for p in state.pvcs),
            "pods": sorted(p.name for p in state.pods),
        },
    )


def evidence_tags(obs: ObservationBundle) -> set[str]:
    """Deterministic evidence pattern a playbook rule can match against."""
    tags: set[str] = set()
    if not obs.alerts:
        tags.add("no-alerts")
    for alert in obs.alerts:
        if alert.startswith("alert:pvc/"):
            name = alert.split("/", 1)[1].split(":", 1)[0]
            tags.add("pvc-pending")
            tags.add(f"pvc-pending:{name}")
    for row in obs.pod_table:
        if row["phase"] != RUNNING:
            owner = row["name"].rsplit("-", 1)[0]
            tags.add(f"pod-phase:{owner}:{row['phase']}")
            tags.add("pods-unhealthy")
    if obs.failed_requests > 0:
        tags.add("workload-failing")
    for suspect in obs.trace_analysis:
        tags.add(f"suspect:{suspect['service']}->{suspect['operation']}")
    return tags


def reflect(issues: list[str], plan: MitigationPlan) -> ReflectionNote:
    """Summarize a failed validation round for the next attempt."""
    if not issues:
        raise ValueError("reflection requires at least one oracle issue")
    summary = f"{plan.intent}: {len(plan.commands)} commands ({'; '.join(plan.commands)})"
    return ReflectionNote(
        issues=list(issues),
        prior_plan_summary=summary,
        hypothesis=f"The previous plan did not clear: {issues[0].strip()}",
    )


# ---------------------------------------------------------------------------
# Policies
# ---------------------------------------------------------------------------

class Policy:
    """Base decision-maker; subclasses override proposal logic."""

    name = "policy"

    def detect(self, obs: ObservationBundle) -> str:
        if obs.alerts or obs.failed_requests > 0:
            return ANOMALOUS
        return HEALTHY

    def propose(
        self, obs: ObservationBundle, attempt: int, reflection: ReflectionNote | None
    ) -> MitigationPlan:
        raise NotImplementedError

    def drop_thoughts(self) -> None:
        """Clear internal memory; only the reflection note survives rounds."""


class ScriptedPolicy(Policy):
    """Replays playbook data: evidence pattern -> ordered list of plans.

    Attempt numbers start at 1 and select plans[attempt-1] of the first rule
    whose tags are all present in the observed evidence, so a second attempt
    can differ once reflection exists.
    """

    name = "scripted"

    def __init__(self, playbook: dict):
        self.playbook = playbook
        self._memory: list[str] = []

    def propose(
        self, obs: ObservationBundle, attempt: int, reflection: ReflectionNote | None
    ) -> MitigationPlan:
        tags = evidence_tags(obs)
        for rule in self.playbook.get("rules", []):
            if all(tag in tags for tag in rule.get("when", [])):
                plans = rule["plans"]
                if attempt > len(plans):
                    raise PlaybookExhausted(
                        f"no plan for attempt {attempt} under rule {rule.get('when')}"
                    )
                entry = plans[attempt - 1]
                self._memory.append(f"attempt {attempt}")
                return MitigationPlan(
                    intent=entry.get("intent", f"attempt {attempt}"),
                    commands=list(entry["commands"]),
                    expected_effect=entry.get("expected_effect", ""),
                )
        raise PlaybookExhausted("no playbook rule matches the observed evidence")

    def drop_thoughts(self) -> None:
        self._memory.clear()


class RandomPolicy(Policy):
    """Samples lint-passing writes; used to fuzz the safety guarantees."""

    name = "random"

    def __init__(self, seed: int, max_commands: int = 6):
        self.rng = random.Random(seed)
        self.max_commands = max_commands

    def propose(
        self, obs: ObservationBundle, attempt: int, reflection: ReflectionNote | None
    ) -> MitigationPlan:
        inv = obs.inventory
        commands: list[str] = []
        for _ in range(self.rng.randint(1, self.max_commands)):
            text = self._random_command(inv)
            if text is not None:
                commands.append(text)
        if not commands:
            commands = ["kubectl get pods"]
        plan = MitigationPlan(intent="random exploration", commands=commands)
        assert not plan.lint_all()
        return plan

    def _random_command(self, inv: dict[str, list[str]]) -> str | None:
        rng = self.rng
        choices = []
        if inv.get("deployments"):
            choices += ["scale", "image", "restart", "deldep"]
        if inv.get("services"):
            choices.append("port")
        if inv.get("pods"):
            choices.append("delpod")
        if inv.get("nodes"):
            choices.append("cordon")
            if len(inv["nodes"]) > 1:
                choices.append("delnode")
        if inv.get("storage_classes"):
            choices.append("delsc")
        choices += ["applysc", "read"]
        kind = rng.choice(choices)
        if kind == "scale":
            dep = rng.choice(inv["deployments"])
            return f"kubectl scale deployment {dep} --replicas={rng.randint(0, 3)}"
        if kind == "image":
            dep = rng.choice(inv["deployments"])
            tag = rng.choice(["v1", "v2", "broken", "latest"])
            return f"kubectl patch deployment {dep} --image=fuzz/{dep}:{tag}"
        if kind == "restart":
            dep = rng.choice(inv["deployments"])
            return f"kubectl rollout restart deployment {dep}"
        if kind == "deldep":
            dep = rng.choice(inv["deployments"])
            return f"kubectl delete deployment {dep}"
        if kind == "port":
            svc = rng.choice(inv["services"])
            return f"kubectl patch service {svc} --target-port={rng.randint(7000, 7004)}"
        if kind == "delpod":
            pod = rng.choice(inv["pods"])
            return f"kubectl delete pod {pod}"
        if kind == "cordon":
            node = rng.choice(inv["nodes"])
            verb = rng.choice(["cordon", "uncordon"])
            return f"kubectl {verb} {node}"
        if kind == "delnode":
            return f"kubectl delete node {rng.choice(inv['nodes'])}"
        if kind == "delsc":
            cls = rng.choice(inv["storage_classes"])
            return f"kubectl delete storageclass {cls}"
        if kind == "applysc":
            name = f"fuzz-storage-{rng.randint(0, 3)}"
            provisioner = rng.choice(
                ["rancher.io/local-path", "kubernetes.io/aws-ebs", "fuzz.io/none"]
            )
            return (
                f"kubectl apply -f - <<EOF\n"
                f"apiVersion: storage.k8s.io/v1\n"
                f"kind: StorageClass\n"
                f"metadata:\n"
                f"  name: {name}\n"
                f"provisioner: {provisioner}\n"
                f"EOF"
            )
        return "kubectl get pods"


# ---------------------------------------------------------------------------
# External policy wire protocol
# ---------------------------------------------------------------------------

def write_frame(stream, payload: dict) -> None:
    """One frame: the payload byte length in ASCII decimal, a newline, then
    that many bytes of UTF-8 JSON."""
    data = json.dumps(payload, sort_keys=True).encode("utf-8")
    stream.write(f"{len(data)}\n".encode("ascii"))
    stream.write(data)
    stream.flush()


def read_frame(stream, timeout: float) -> dict:
    header = _read_until_newline(stream, timeout)
    try:
        length = int(header)
    except ValueError:
        raise MalformedPlan(f"bad frame header: {header!r}")
    body = _read_exact(stream, length, timeout)
    try:
        return json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedPlan(f"bad frame payload: {exc}")


def _wait_readable(stream, timeout: float) -> None:
    ready, _, _ = select.select([stream], [], [], timeout)
    if not ready:
        raise ProtocolTimeout(f"no response within {timeout}s")


def _read_until_newline(stream, timeout: float) -> bytes:
    buf = bytearray()
    while True:
        _wait_readable(stream, timeout)
        ch = stream.read(1)
        if not ch:
            raise MalformedPlan("stream closed mid-frame")
        if ch == b"\n":
            return bytes(buf)
        buf += ch
        if len(buf) > 20:
            raise MalformedPlan("frame header too long")


def _read_exact(stream, n: int, timeout: float) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        _wait_readable(stream, timeout)
        chunk = stream.read(n - len(buf))
        if not chunk:
            raise MalformedPlan("stream closed mid-frame")
        buf += chunk
    return bytes(buf)


def observation_document(obs: ObservationBundle, attempt: int) -> dict:
    doc = {
        "attempt": attempt,
        "alerts": obs.alerts,
        "pod_table": obs.pod_table,
        "log_excerpts": obs.log_excerpts,
        "trace_analysis": obs.trace_analysis,
        "failed_requests": obs.failed_requests,
        "inventory": obs.inventory,
    }
    if obs.prior_reflection is not None:
        doc["reflection"] = {
            "issues": obs.prior_reflection.issues,
            "prior_plan_summary": obs.prior_reflection.prior_plan_summary,
            "hypothesis": obs.prior_reflection.hypothesis,
        }
    return doc


class ExternalPolicyAdapter(Policy):
    """Bridges to an external decision process, one exchange per round.

    The observation document goes out as a single frame; the response frame
    must carry {"intent", "commands", "expected_effect"?}. Responses are
    vetted with the same parse and confinement checks as internal policies.
    """

    name = "external"

    def __init__(self, reader, writer, timeout: float = 5.0):
        self.reader = reader
        self.writer = writer
        self.timeout = timeout

    def propose(
        self, obs: ObservationBundle, attempt: int, reflection: ReflectionNote | None
    ) -> MitigationPlan:
        write_frame(self.writer, observation_document(obs, attempt))
        doc = read_frame(self.reader, self.timeout)
        if not isinstance(doc, dict) or not isinstance(doc.get("commands"), list):
            raise MalformedPlan("plan document must carry a command list")
        plan = MitigationPlan(
            intent=str(doc.get("intent", "external plan")),
            commands=[str(c) for c in doc["commands"]],
            expected_effect=str(doc.get("expected_effect", "")),
        )
        problems = plan.lint_all()
        if problems:
            raise MalformedPlan("; ".join(problems))
        return plan


__all__ = [
    "ANOMALOUS",
    "HEALTHY",
    "ExternalPolicyAdapter",
    "MalformedPlan",
    "MitigationPlan",
    "ObservationBundle",
    "PlaybookExhausted",
    "Policy",
    "ProtocolTimeout",
    "RandomPolicy",
    "ReflectionNote",
    "ScriptedPolicy",
    "bootstrap_localize",
    "build_observation",
    "evidence_tags",
    "observation_document",
    "read_frame",
    "reflect",
    "synthesize_logs",
    "write_frame",
]
