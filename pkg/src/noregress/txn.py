"""Transaction lifecycle: checkpoint, bounded execution, commit-or-undo.

A transaction is a bounded sequence of linted commands executed while holding
the writer side of the agent lock. The engine records the severity after
every step (the hidden path); at finalize it commits only when the endpoint
is no worse than the entry severity, and otherwise rolls the stack segment
back and verifies the checkpointed entry state was restored exactly. Only
the entry severity and, on commit, the exit severity become part of the
externally visible trajectory.
"""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field

from . import commands as cmdmod
from .cluster import ClusterState, Snapshot, snapshot, states_equal
from .commands import Command, NoInverse, Role
from .health import (
    DEFAULT_WEIGHTS,
    INFINITE,
    Severity,
    SeverityWeights,
    health_report,
    severity,
    severity_repr,
)
from .undo import UndoStack, make_entry
from .workload import run_workload

logger = logging.getLogger(__name__)

OPEN = "Open"
COMMITTED = "Committed"
ABORTED = "Aborted"


class LockHeld(Exception):
    """Another writer currently holds the agent lock."""


class WindowExceeded(Exception):
    """The transaction reached its bounded command window."""


class LintRejected(Exception):
    """A command failed confinement linting inside a transaction."""


class UndoIncomplete(Exception):
    """Post-undo state differs from the checkpoint; a hard invariant breach."""


class ALock:
    """Readers-writer agent lock: many readers or exactly one writer."""

    def __init__(self) -> None:
        self._readers = 0
        self._writer: str | None = None

    @property
    def mode(self) -> str:
        if self._writer is not None:
            return f"Write({self._writer})"
        if self._readers:
            return f"Read({self._readers})"
        return "Free"

    @property
    def writer(self) -> str | None:
        return self._writer

    def acquire_read(self) -> None:
        if self._writer is not None:
            raise LockHeld(f"writer {self._writer} holds the lock")
        self._readers += 1

    def release_read(self) -> None:
        if self._readers <= 0:
            raise RuntimeError("release_read without acquire_read")
        self._readers -= 1

    def acquire_write(self, holder: str) -> None:
        if self._writer is not None:
            raise LockHeld(f"writer {self._writer} holds the lock")
        if self._readers:
            raise LockHeld(f"{self._readers} readers hold the lock")
        self._writer = holder

    def release_write(self, holder: str) -> None:
        if self._writer != holder:
            raise RuntimeError(f"lock not held by {holder}")
        self._writer = None


class AuditLog:
    """Append-only structured log, one record per step, JSONL-serializable."""

    def __init__(self) -> None:
        self.records: list[dict] = []

    def write(self, **record) -> None:
        self.records.append(record)

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(r, sort_keys=True) for r in self.records)

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_jsonl() + ("\n" if self.records else ""))


@dataclass
class Env:
    """Handle on the live environment shared by the engine and policies."""

    state: ClusterState
    lock: ALock = field(default_factory=ALock)
    stack: UndoStack = field(default_factory=UndoStack)
    weights: SeverityWeights = DEFAULT_WEIGHTS
    probe_requests: int = 100
    probe_seed: int = 0
    audit: AuditLog = field(default_factory=AuditLog)

    def measure(self, state: ClusterState | None = None) -> Severity:
        """Severity of a state: health probe plus a fixed-seed workload probe.

        The probe seed is fixed for the life of the environment so that the
        metric is a pure function of the state value; states that compare
        deep-equal always measure equal.
        """
        target = self.state if state is None else state
        wl = run_workload(target, self.probe_requests, self.probe_seed, collect_traces=False)
        return severity(health_report(target, wl), self.weights, target.crashed)


@dataclass
class StepObservation:
    mu: Severity
    outcome: str
    executed: bool


_txn_ids = itertools.count(1)


@dataclass
class TransactionRecord:
    id: int
    writer: str
    window: int
    s_pre: Snapshot
    hidden_path: list[Severity]
    actions: list[Command] = field(default_factory=list)
    status: str = OPEN
    segment_mark: int = 0
    s_post_severity: Severity | None = None
    visible_end: Severity | None = None

    @property
    def executed_steps(self) -> int:
        return len(self.actions)


def begin(env: Env, writer: str, window: int) -> TransactionRecord:
    """Open a transaction: acquire the writer lock and checkpoint the state."""
    if window < 1:
        raise ValueError("transaction window must be at least 1")
    env.lock.acquire_write(writer)
    txn = TransactionRecord(
        id=next(_txn_ids),
        writer=writer,
        window=window,
        s_pre=snapshot(env.state),
        hidden_path=[env.measure()],
        segment_mark=env.stack.open_segment(),
    )
    env.audit.write(
        event="begin", txn=txn.id, writer=writer, mu=severity_repr(txn.hidden_path[0])
    )
    return txn


def step(env: Env, txn: TransactionRecord, cmd: Command) -> StepObservation:
    """Run one command inside the transaction.

    Writes are dry-run first; a dry-run rejection consumes a window slot but
    leaves the state untouched. Executed writes push their inverse before the
    severity is re-probed. A crash records an infinite severity; the
    transaction can then only abort.
    """
    if txn.status != OPEN:
        raise RuntimeError(f"transaction {txn.id} is {txn.status}")
    if txn.executed_steps >= txn.window:
        raise WindowExceeded(f"transaction window of {txn.window} commands reached")

    verdict = cmdmod.lint(cmd, Role.WRITER)
    if not verdict.allowed:
        raise LintRejected(verdict.reason)

    seq = txn.executed_steps
    mu_before = txn.hidden_path[-1]

    def record(outcome: str, mu_after: Severity) -> None:
        env.audit.write(
            event="step", txn=txn.id, seq=seq, command=cmd.text,
            mu_before=severity_repr(mu_before), mu_after=severity_repr(mu_after),
            outcome=outcome,
        )

    if cmdmod.classify(cmd) == "Read":
        txn.actions.append(cmd)
        txn.hidden_path.append(mu_before)
        record("read", mu_before)
        return StepObservation(mu_before, "read", True)

    predicted = cmdmod.dry_run(env.state, cmd)
    if not predicted.ok:
        txn.actions.append(cmd)
        txn.hidden_path.append(mu_before)
        record(f"dry-run rejected: {predicted.message}", mu_before)
        return StepObservation(mu_before, predicted.message, False)

    try:
        inverse = cmdmod.synthesize_inverse(env.state, cmd)
    except NoInverse as exc:
        raise LintRejected(f"no inverse available: {exc}")
    entry = make_entry(env.state, cmd, inverse)

    new_state = cmdmod.apply_write(env.state, cmd)
    txn.actions.append(cmd)
    if new_state.crashed:
        env.state = new_state
        txn.hidden_path.append(INFINITE)
        record("crash", INFINITE)
        return StepObservation(INFINITE, "crash", True)

    env.state = new_state
    env.stack.push(entry)
    mu_after = env.measure()
    txn.hidden_path.append(mu_after)
    record("applied", mu_after)
    return StepObservation(mu_after, "applied", True)


def finalize(env: Env, txn: TransactionRecord, *, force_abort: bool = False,
             commit_regardless: bool = False) -> str:
    """Commit or abort the open transaction and release the writer lock.

    Commit requires a live endpoint no worse than the entry severity. On
    abort the stack segment is rolled back exactly once and the result is
    checked against the checkpoint. ``commit_regardless`` reproduces the
    unsafe no-undo baseline: severity regressions commit instead of aborting
    (a crash still cannot commit, but nothing is rolled back either).
    """
    if txn.status != OPEN:
        raise RuntimeError(f"transaction {txn.id} is {txn.status}")

    mu_pre = txn.hidden_path[0]
    mu_post = txn.hidden_path[-1]
    crashed = env.state.crashed

    commit = not crashed and not force_abort and mu_post <= mu_pre
    if commit_regardless and not crashed:
        commit = True

    try:
        if commit:
            txn.status = COMMITTED
            txn.s_post_severity = mu_post
            txn.visible_end = mu_post
        else:
            txn.status = ABORTED
            txn.s_post_severity = mu_post
            if commit_regardless:
                # Unsafe baseline: no undo is performed even on a crash.
                txn.visible_end = INFINITE if crashed else mu_post
            else:
                env.audit.write(
                    event="abort-undo",
                    txn=txn.id,
                    segment=env.stack.peek_summaries()[txn.segment_mark :],
                )
                if crashed:
                    # The stack's inverses assume a live control plane; a
                    # crash is recovered from the checkpoint directly.
                    env.state = txn.s_pre.restore()
                    env.stack.truncate(txn.segment_mark)
                    logger.warning("txn %d recovered from crash via checkpoint", txn.id)
                else:
                    env.state = env.stack.rollback_segment(env.state, txn.segment_mark)
                restored = txn.s_pre.restore()
                if not states_equal(env.state, restored):
                    raise UndoIncomplete(
                        f"transaction {txn.id}: post-undo state differs from checkpoint"
                    )
                mu_restored = env.measure()
                if mu_restored != mu_pre:
                    raise UndoIncomplete(
                        f"transaction {txn.id}: post-undo severity "
                        f"{severity_repr(mu_restored)} != {severity_repr(mu_pre)}"
                    )
                txn.visible_end = mu_pre
    finally:
        env.lock.release_write(txn.writer)

    env.audit.write(
        event="finalize", txn=txn.id, status=txn.status,
        mu_pre=severity_repr(mu_pre), mu_post=severity_repr(mu_post),
        visible=severity_repr(txn.visible_end),
    )
    return txn.status


def visible_trajectory(history: list[TransactionRecord], baseline: Severity) -> list[Severity]:
    """Externally visible severities: the baseline plus one endpoint per
    finalized transaction."""
    values = [baseline]
    for txn in history:
        if txn.status == OPEN:
            raise ValueError(f"transaction {txn.id} not finalized")
        values.append(txn.visible_end)
    return values


__all__ = [
    "ABORTED",
    "ALock",
    "AuditLog",
    "COMMITTED",
    "Env",
    "LintRejected",
    "LockHeld",
    "OPEN",
    "StepObservation",
    "TransactionRecord",
    "UndoIncomplete",
    "WindowExceeded",
    "begin",
    "finalize",
    "step",
    "visible_trajectory",
]
