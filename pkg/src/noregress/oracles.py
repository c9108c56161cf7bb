"""Termination oracles: alert clearance, workload success, component health.

Each oracle is weak on its own; termination requires all three to pass. The
issue strings double as reflection input for the next mitigation round, so
their formats are fixed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cluster import CRASHLOOP, PENDING, PVC_BOUND, RUNNING, ClusterState
from .health import HealthReport
from .workload import WorkloadReport

WORKLOAD_ISSUE = "  Non-2xx or 3xx responses: {count}"


@dataclass(frozen=True)
class OracleVerdict:
    name: str
    passed: bool
    issues: tuple[str, ...] = ()


@dataclass(frozen=True)
class ValidationResult:
    success: bool
    issues: tuple[str, ...] = ()
    verdicts: tuple[OracleVerdict, ...] = ()


def alert_oracle(report: HealthReport) -> OracleVerdict:
    issues = tuple(sorted(report.alerts))
    return OracleVerdict("Alert", not issues, issues)


def workload_oracle(wl: WorkloadReport) -> OracleVerdict:
    if wl.failed_requests == 0:
        return OracleVerdict("Workload", True)
    return OracleVerdict(
        "Workload", False, (WORKLOAD_ISSUE.format(count=wl.failed_requests),)
    )


def health_oracle(state: ClusterState) -> OracleVerdict:
    """Pass only when every pod runs, every claim is bound, and every node is
    healthy and schedulable."""
    issues: list[str] = []
    if state.crashed:
        return OracleVerdict("Health", False, ("Cluster is unavailable",))
    for pod in state.pods:
        if pod.phase == RUNNING:
            continue
        if pod.phase == CRASHLOOP:
            dep = state.deployment(pod.owner_deployment)
            container = dep.container() if dep else pod.owner_deployment
            issues.append(f"Container {container} is in CrashLoopBackOff")
        else:
            issues.append(f"Pod {pod.name} is in {pod.phase} state")
    for claim in state.pvcs:
        if claim.status != PVC_BOUND:
            issues.append(f"PersistentVolumeClaim {claim.name} is in {PENDING} state")
    for node in state.nodes:
        if not node.healthy:
            issues.append(f"Node {node.name} is not healthy")
        elif not node.schedulable:
            issues.append(f"Node {node.name} is unschedulable")
    return OracleVerdict("Health", not issues, tuple(issues))


def combined_validate(
    state: ClusterState, wl: WorkloadReport, report: HealthReport
) -> ValidationResult:
    """Conjunction of the three oracles; issues are aggregated for reflection."""
    verdicts = (workload_oracle(wl), health_oracle(state), alert_oracle(report))
    issues: list[str] = []
    for verdict in verdicts:
        issues.extend(verdict.issues)
    success = all(v.passed for v in verdicts)
    return ValidationResult(success, tuple(issues), verdicts)


__all__ = [
    "OracleVerdict",
    "ValidationResult",
    "WORKLOAD_ISSUE",
    "alert_oracle",
    "combined_validate",
    "health_oracle",
    "workload_oracle",
]
