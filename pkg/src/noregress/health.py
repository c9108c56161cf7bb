"""Health reporting and the severity metric.

Severity is the weighted sum of three disjoint issue sets: alerts (unhealthy
pods and unbound claims), SLA violations (failed requests), and capacity
losses (degraded nodes). A crashed environment has infinite severity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .cluster import PVC_BOUND, RUNNING, ClusterState
from .workload import WorkloadReport

Severity = Fraction | float  # float only ever carries math.inf

INFINITE = math.inf


@dataclass
class HealthReport:
    alerts: set[str] = field(default_factory=set)
    sla_violations: set[str] = field(default_factory=set)
    capacity_losses: set[str] = field(default_factory=set)

    def empty(self) -> bool:
        return not (self.alerts or self.sla_violations or self.capacity_losses)


@dataclass(frozen=True)
class SeverityWeights:
    w1: Fraction = Fraction(1)
    w2: Fraction = Fraction(1)
    w3: Fraction = Fraction(1)

    def __post_init__(self):
        for w in (self.w1, self.w2, self.w3):
            if w <= 0:
                raise ValueError("severity weights must be strictly positive")

    @classmethod
    def parse(cls, text: str) -> "SeverityWeights":
        """Parse "w1,w2,w3"; each component accepts integer or p/q form."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError("expected three comma-separated weights")
        return cls(*(Fraction(p) for p in parts))


DEFAULT_WEIGHTS = SeverityWeights()


def health_report(state: ClusterState, wl: WorkloadReport) -> HealthReport:
    """Derive the alert/violation/capacity-loss sets from the environment.

    One alert per pod that is not Running, one per Pending claim; one SLA
    violation per failed request; one capacity loss per node that is
    unhealthy or unschedulable. On a crashed environment no telemetry is
    available, so the sets stay empty and the crash flag alone drives
    severity.
    """
    report = HealthReport()
    if state.crashed:
        return report
    for pod in state.pods:
        if pod.phase != RUNNING:
            report.alerts.add(f"alert:pod/{pod.name}:{pod.phase}")
    for claim in state.pvcs:
        if claim.status != PVC_BOUND:
            report.alerts.add(f"alert:pvc/{claim.name}:Pending")
    for request_id in wl.failed_ids:
        report.sla_violations.add(f"sla:{request_id}")
    for node in state.nodes:
        if not (node.healthy and node.schedulable):
            report.capacity_losses.add(f"capacity:node/{node.name}")
    return report


def severity(
    report: HealthReport,
    weights: SeverityWeights = DEFAULT_WEIGHTS,
    crashed: bool = False,
) -> Severity:
    if crashed:
        return INFINITE
    return (
        weights.w1 * len(report.alerts)
        + weights.w2 * len(report.sla_violations)
        + weights.w3 * len(report.capacity_losses)
    )


def severity_repr(value: Severity) -> str:
    """Exact, JSON-safe rendering: "12", "3/2", or "inf"."""
    if value == INFINITE:
        return "inf"
    frac = Fraction(value)
    return str(frac.numerator) if frac.denominator == 1 else str(frac)


__all__ = [
    "DEFAULT_WEIGHTS",
    "HealthReport",
    "INFINITE",
    "Severity",
    "SeverityWeights",
    "health_report",
    "severity",
    "severity_repr",
]
