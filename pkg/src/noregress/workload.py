"""Synthetic request workload over the declared service call graph.

Each request replays one entry of the environment's request mix: an ordered
path of services. The request fails at the first service on the path that has
no working backend, and the trace records the last service reached before
that error together with the downstream operation it was invoking.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .cluster import RUNNING, ClusterState


@dataclass(frozen=True)
class Span:
    service: str
    operation: str
    error: bool


@dataclass
class Trace:
    request_id: str
    spans: list[Span]

    @property
    def failed(self) -> bool:
        return any(s.error for s in self.spans)


@dataclass
class WorkloadReport:
    total_requests: int
    failed_requests: int
    failed_ids: list[str] = field(default_factory=list)
    traces: list[Trace] = field(default_factory=list)


def service_is_serving(state: ClusterState, service_name: str) -> bool:
    """True when the service has at least one Running pod reachable on the
    port it forwards to."""
    svc = state.service(service_name)
    if svc is None:
        return False
    dep = state.deployment(svc.selector)
    if dep is None:
        return False
    if svc.target_port != dep.container_port:
        return False
    return any(p.phase == RUNNING for p in state.pods_of(dep.name))


def _walk_path(state: ClusterState, path: list[str]) -> list[Span]:
    """Spans for one request over ``path``; empty when the entry hop is dead."""
    spans: list[Span] = []
    for i, service in enumerate(path):
        if not service_is_serving(state, service):
            # The previous hop observed the error while calling this one.
            if spans:
                last = spans.pop()
                spans.append(Span(last.service, service, True))
            return spans
        downstream = path[i + 1] if i + 1 < len(path) else "respond"
        spans.append(Span(service, downstream, False))
    return spans


def run_workload(
    state: ClusterState,
    n: int,
    seed: int,
    collect_traces: bool = True,
) -> WorkloadReport:
    """Simulate ``n`` requests sampled from the request mix under ``seed``.

    Deterministic: the same (state value, n, seed) always produces the same
    report. With ``collect_traces=False`` only counts and failed-request ids
    are produced, which keeps high-frequency severity probes cheap.
    """
    if n < 0:
        raise ValueError("request count must be non-negative")
    mix = state.truth.request_mix
    if state.crashed:
        failed = [f"request-{i}" for i in range(n)]
        return WorkloadReport(n, n, failed, [])
    if not mix or n == 0:
        return WorkloadReport(0, 0, [], [])

    rng = random.Random(seed)
    weights = [entry.get("weight", 1) for entry in mix]
    # One verdict per mix entry; requests only sample which entry they replay.
    spans_by_entry = [_walk_path(state, entry["path"]) for entry in mix]
    failed_by_entry = [
        (not spans) or any(s.error for s in spans) for spans in spans_by_entry
    ]

    failed_ids: list[str] = []
    traces: list[Trace] = []
    choices = rng.choices(range(len(mix)), weights=weights, k=n)
    for i, entry_idx in enumerate(choices):
        request_id = f"request-{i}"
        if failed_by_entry[entry_idx]:
            failed_ids.append(request_id)
        if collect_traces:
            traces.append(Trace(request_id, list(spans_by_entry[entry_idx])))
    return WorkloadReport(n, len(failed_ids), failed_ids, traces)


__all__ = ["Span", "Trace", "WorkloadReport", "run_workload", "service_is_serving"]
