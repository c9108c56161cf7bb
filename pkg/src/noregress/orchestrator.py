"""Episode state machine: detect, bootstrap, mitigate, validate, undo, retry.

One episode drives a single scenario from fault injection to termination.
Every state-changing command flows through the transaction engine under the
writer lock; each retry round starts by walking the undo stack until nothing
is left, so mitigation always restarts from the injected fault state. The
ablation modes reproduce the unsafe baselines: no retries at all, and naive
retry that keeps leftovers and commits severity regressions.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

from . import txn as txnmod
from .cluster import reconcile, snapshot, states_equal
from .commands import parse
from .health import (
    DEFAULT_WEIGHTS,
    Severity,
    SeverityWeights,
    health_report,
    severity_repr,
)
from .oracles import combined_validate
from .policies import (
    ANOMALOUS,
    MalformedPlan,
    MitigationPlan,
    PlaybookExhausted,
    Policy,
    ProtocolTimeout,
    ReflectionNote,
    build_observation,
    reflect,
)
from .scenarios import Scenario
from .txn import Env, TransactionRecord, UndoIncomplete, WindowExceeded
from .undo import NO_MORE_ACTIONS
from .workload import run_workload

UNDO_AGENT = "undo-agent"
MITIGATION_AGENT = "mitigation-agent"


class InvariantViolation(Exception):
    """A safety invariant (no-regression or faithful undo) was breached."""


class Phase(enum.Enum):
    INIT = "Init"
    DETECT = "Detect"
    ROLLBACK = "Rollback"
    BOOTSTRAP = "Bootstrap"
    MITIGATE = "Mitigate"
    VALIDATE = "Validate"
    REFLECT = "Reflect"
    TERMINATE = "Terminate"


class Ablation(enum.Enum):
    FULL = "full"
    NO_RETRY = "noretry"
    NAIVE_RETRY_NO_UNDO = "naive"


def machine_step(
    phase: Phase,
    *,
    detected: str | None = None,
    validated: bool | None = None,
    retries_left: int | None = None,
) -> Phase:
    """Total transition function of the control loop.

    Inputs are only consulted where the phase branches: detection verdict at
    Detect, validation outcome at Validate, remaining retry budget at
    Reflect. Terminate is absorbing.
    """
    if phase is Phase.INIT:
        return Phase.DETECT
    if phase is Phase.DETECT:
        if detected is None:
            raise ValueError("Detect requires a detection verdict")
        return Phase.ROLLBACK if detected == ANOMALOUS else Phase.TERMINATE
    if phase is Phase.ROLLBACK:
        return Phase.BOOTSTRAP
    if phase is Phase.BOOTSTRAP:
        return Phase.MITIGATE
    if phase is Phase.MITIGATE:
        return Phase.VALIDATE
    if phase is Phase.VALIDATE:
        if validated is None:
            raise ValueError("Validate requires a validation outcome")
        return Phase.TERMINATE if validated else Phase.REFLECT
    if phase is Phase.REFLECT:
        if retries_left is None:
            raise ValueError("Reflect requires the remaining retry budget")
        return Phase.ROLLBACK if retries_left > 0 else Phase.TERMINATE
    return Phase.TERMINATE


@dataclass
class RunConfig:
    window: int = 20
    retry_limit: int = 9
    step_limit: int | None = None
    ablation: Ablation = Ablation.FULL
    thought_dropout: bool = True
    seed: int = 0
    weights: SeverityWeights = DEFAULT_WEIGHTS
    probe_requests: int = 100
    validate_requests: int = 117
    settle_steps: int = 0

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be at least 1")
        if self.retry_limit < 0:
            raise ValueError("retry limit may not be negative")

    def effective_retry_limit(self) -> int:
        return 0 if self.ablation is Ablation.NO_RETRY else self.retry_limit


def ablation_mode_effects(config: RunConfig) -> dict:
    """Documented behavior deltas of the configured ablation mode."""
    mode = config.ablation
    return {
        "mode": mode.value,
        "retry_limit": config.effective_retry_limit(),
        "rollback_leftovers": mode is Ablation.FULL,
        "abort_undo": mode is not Ablation.NAIVE_RETRY_NO_UNDO,
        "commit_regardless": mode is Ablation.NAIVE_RETRY_NO_UNDO,
    }


@dataclass
class RoundRecord:
    attempt: int
    plan_intent: str = ""
    plan_commands: list[str] = field(default_factory=list)
    txn_status: str = ""
    validation_success: bool = False
    issues: list[str] = field(default_factory=list)
    reflection_hypothesis: str = ""


@dataclass
class EpisodeReport:
    scenario_id: str
    solved: bool
    baseline: Severity
    visible_trajectory: list[Severity]
    retries_used: int
    total_steps: int
    wall_time: float
    rounds: list[RoundRecord]
    regressions: list[str]
    termination: str
    audit: txnmod.AuditLog

    def to_json(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "solved": self.solved,
            "baseline": severity_repr(self.baseline),
            "visible_trajectory": [severity_repr(v) for v in self.visible_trajectory],
            "retries_used": self.retries_used,
            "total_steps": self.total_steps,
            "wall_time": self.wall_time,
            "termination": self.termination,
            "regressions": list(self.regressions),
            "rounds": [
                {
                    "attempt": r.attempt,
                    "plan_intent": r.plan_intent,
                    "plan_commands": list(r.plan_commands),
                    "txn_status": r.txn_status,
                    "validation_success": r.validation_success,
                    "issues": list(r.issues),
                    "reflection_hypothesis": r.reflection_hypothesis,
                }
                for r in self.rounds
            ],
            "audit_records": len(self.audit.records),
        }


class _StepBudgetExhausted(Exception):
    pass


class _Episode:
    """Mutable state of one episode run."""

    def __init__(self, scenario: Scenario, policy: Policy, config: RunConfig):
        self.scenario = scenario
        self.policy = policy
        self.config = config
        self.effects = ablation_mode_effects(config)
        faulty = scenario.build_faulty_state()
        self.env = Env(
            state=faulty,
            weights=config.weights,
            probe_requests=config.probe_requests,
            probe_seed=config.seed,
        )
        self.initial_snapshot = snapshot(faulty)
        self.baseline: Severity = self.env.measure()
        self.visible: list[Severity] = [self.baseline]
        self.history: list[TransactionRecord] = []
        self.rounds: list[RoundRecord] = []
        self.regressions: list[str] = []
        self.steps = 0
        self.reflection: ReflectionNote | None = None
        self.termination = ""

    # -- bookkeeping -------------------------------------------------------

    def charge(self, n: int = 1) -> None:
        limit = self.config.step_limit
        if limit is not None and self.steps + n > limit:
            raise _StepBudgetExhausted()
        self.steps += n

    def record_visible(self, value: Severity, context: str) -> None:
        self.visible.append(value)
        if value > self.baseline:
            message = (
                f"{context}: visible severity {severity_repr(value)} exceeds "
                f"baseline {severity_repr(self.baseline)}"
            )
            if self.effects["abort_undo"]:
                raise InvariantViolation(message)
            self.regressions.append(message)

    # -- phases ------------------------------------------------------------

    def observe(self, collect_traces: bool = True):
        # Observation is read-class work; it shares the lock's reader side.
        self.env.lock.acquire_read()
        try:
            wl = run_workload(
                self.env.state,
                self.config.validate_requests,
                self.config.seed,
                collect_traces=collect_traces,
            )
            report = health_report(self.env.state, wl)
            obs = build_observation(self.env.state, wl, report, self.reflection)
        finally:
            self.env.lock.release_read()
        return wl, report, obs

    def detect(self) -> str:
        self.charge()
        _, _, obs = self.observe()
        return self.policy.detect(obs)

    def rollback_leftovers(self) -> None:
        if not self.effects["rollback_leftovers"]:
            return
        # The walk never stops part-way: a half-undone stack could leave the
        # environment above the baseline, so budget exhaustion is re-raised
        # only after the stack is empty and the restore has been verified.
        budget_hit = False
        self.env.lock.acquire_write(UNDO_AGENT)
        try:
            pops = 0
            while True:
                try:
                    self.charge()
                except _StepBudgetExhausted:
                    budget_hit = True
                message, _, new_state = self.env.stack.rollback_last(self.env.state)
                self.env.audit.write(event="rollback", message=message)
                if message == NO_MORE_ACTIONS:
                    break
                self.env.state = new_state
                pops += 1
        finally:
            self.env.lock.release_write(UNDO_AGENT)
        if pops:
            if not states_equal(self.env.state, self.initial_snapshot.restore()):
                raise InvariantViolation(
                    "leftover rollback did not restore the injected fault state"
                )
            self.record_visible(self.env.measure(), "leftover rollback")
        if budget_hit:
            raise _StepBudgetExhausted()

    def bootstrap(self):
        self.charge(2)  # trace fetch + analysis
        return self.observe()

    def mitigate(self, plan: MitigationPlan, record: RoundRecord) -> None:
        problems = plan.lint_all()
        if problems:
            record.txn_status = "rejected-plan"
            record.issues = problems
            return
        if len(plan.commands) > self.config.window:
            record.txn_status = "rejected-plan"
            record.issues = [
                f"plan length {len(plan.commands)} exceeds window {self.config.window}"
            ]
            return
        txn = txnmod.begin(self.env, MITIGATION_AGENT, self.config.window)
        try:
            for text in plan.commands:
                self.charge()
                try:
                    txnmod.step(self.env, txn, parse(text))
                except WindowExceeded:
                    break
        finally:
            if txn.status == txnmod.OPEN:
                try:
                    txnmod.finalize(
                        self.env,
                        txn,
                        commit_regardless=self.effects["commit_regardless"],
                    )
                except UndoIncomplete as exc:
                    raise InvariantViolation(str(exc)) from exc
                self.history.append(txn)
                self.record_visible(txn.visible_end, f"transaction {txn.id}")
        record.txn_status = txn.status

    def validate(self, record: RoundRecord) -> bool:
        self.charge()
        for _ in range(self.config.settle_steps):
            self.env.state = reconcile(self.env.state)
        wl, report, _ = self.observe()
        result = combined_validate(self.env.state, wl, report)
        record.validation_success = result.success
        record.issues = record.issues + list(result.issues)
        return result.success

    # -- main loop ---------------------------------------------------------

    def run(self) -> EpisodeReport:
        start = time.monotonic()
        solved = False
        try:
            verdict = self.detect()
            phase = machine_step(Phase.DETECT, detected=verdict)
            if phase is Phase.TERMINATE:
                # Nothing anomalous was observed; validation decides whether
                # that call was right. Detection-only paths take no writes.
                wl, report, _ = self.observe()
                solved = combined_validate(self.env.state, wl, report).success
                self.termination = "detection-healthy"
            else:
                solved = self._retry_loop()
        except _StepBudgetExhausted:
            self.termination = "step-limit"
        except PlaybookExhausted as exc:
            self.termination = f"playbook-exhausted: {exc}"
        wall = time.monotonic() - start

        report = EpisodeReport(
            scenario_id=self.scenario.id,
            solved=solved,
            baseline=self.baseline,
            visible_trajectory=list(self.visible),
            retries_used=max(0, len(self.rounds) - 1),
            total_steps=self.steps,
            wall_time=wall,
            rounds=self.rounds,
            regressions=self.regressions,
            termination=self.termination,
            audit=self.env.audit,
        )
        return report

    def _retry_loop(self) -> bool:
        retry_limit = self.config.effective_retry_limit()
        for attempt in range(1, retry_limit + 2):
            record = RoundRecord(attempt=attempt)
            self.rounds.append(record)

            self.rollback_leftovers()
            _, _, obs = self.bootstrap()
            try:
                plan = self.policy.propose(obs, attempt, self.reflection)
            except (ProtocolTimeout, MalformedPlan) as exc:
                # The round is charged but nothing was executed.
                plan = MitigationPlan(intent=f"no plan: {exc}", commands=[])
                record.plan_intent = plan.intent
                record.txn_status = "no-plan"
                record.issues = [str(exc)]
            else:
                record.plan_intent = plan.intent
                record.plan_commands = list(plan.commands)
                self.mitigate(plan, record)

            if self.validate(record):
                self.termination = "validated"
                return True

            self.reflection = reflect(
                record.issues or ["validation failed"], plan
            )
            record.reflection_hypothesis = self.reflection.hypothesis
            if self.config.thought_dropout:
                self.policy.drop_thoughts()

            retries_left = retry_limit - (attempt - 1)
            phase = machine_step(Phase.REFLECT, retries_left=retries_left)
            if phase is Phase.TERMINATE:
                self.termination = "retries-exhausted"
                return False
        self.termination = "retries-exhausted"
        return False


def run_episode(scenario: Scenario, policy: Policy, config: RunConfig) -> EpisodeReport:
    """Run one scenario under one policy and configuration.

    Deterministic for a fixed (scenario, policy seed, config): wall time is
    the only field that varies between identical runs.
    """
    return _Episode(scenario, policy, config).run()


__all__ = [
    "Ablation",
    "EpisodeReport",
    "InvariantViolation",
    "MITIGATION_AGENT",
    "Phase",
    "RoundRecord",
    "RunConfig",
    "UNDO_AGENT",
    "ablation_mode_effects",
    "machine_step",
    "run_episode",
]
