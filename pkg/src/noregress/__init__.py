"""Transactional no-regression kernel with a simulated cluster harness.

The package provides, bottom to top: a deterministic simulated cluster with
fault injection (``cluster``, ``workload``, ``health``), a confined command
layer with inverse synthesis (``commands``), a stack-based undo mechanism
(``undo``), a checkpoint/commit/abort transaction engine (``txn``),
termination oracles (``oracles``), pluggable mitigation policies
(``policies``), the retry orchestrator (``orchestrator``), and a scenario
harness with CLI (``scenarios``, ``harness``, ``cli``).
"""

from .cluster import (
    ClusterState,
    FaultSpec,
    inject_fault,
    reconcile,
    restore,
    snapshot,
    states_equal,
)
from .commands import Command, Role, classify, dry_run, lint, parse, synthesize_inverse
from .harness import run_suite, sweep_step_limit
from .health import HealthReport, SeverityWeights, health_report, severity
from .oracles import alert_oracle, combined_validate, health_oracle, workload_oracle
from .orchestrator import Ablation, EpisodeReport, RunConfig, run_episode
from .policies import (
    ExternalPolicyAdapter,
    MitigationPlan,
    RandomPolicy,
    ScriptedPolicy,
    bootstrap_localize,
)
from .scenarios import Scenario, load_scenario
from .txn import ALock, Env, begin, finalize, step, visible_trajectory
from .undo import UndoStack
from .workload import WorkloadReport, run_workload

__version__ = "0.1.0"

__all__ = [
    "ALock",
    "Ablation",
    "ClusterState",
    "Command",
    "Env",
    "EpisodeReport",
    "ExternalPolicyAdapter",
    "FaultSpec",
    "HealthReport",
    "MitigationPlan",
    "RandomPolicy",
    "Role",
    "RunConfig",
    "Scenario",
    "ScriptedPolicy",
    "SeverityWeights",
    "UndoStack",
    "WorkloadReport",
    "alert_oracle",
    "begin",
    "bootstrap_localize",
    "classify",
    "combined_validate",
    "dry_run",
    "finalize",
    "health_oracle",
    "health_report",
    "inject_fault",
    "lint",
    "load_scenario",
    "parse",
    "reconcile",
    "restore",
    "run_episode",
    "run_suite",
    "run_workload",
    "severity",
    "snapshot",
    "states_equal",
    "step",
    "sweep_step_limit",
    "synthesize_inverse",
    "visible_trajectory",
    "workload_oracle",
]
