"""Batch runner: scenario suites, metric aggregation, and step-limit sweeps."""

from __future__ import annotations

import dataclasses
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .orchestrator import EpisodeReport, RunConfig, run_episode
from .policies import Policy, RandomPolicy, ScriptedPolicy
from .scenarios import Scenario, load_playbook, load_scenario_dir


@dataclass
class SuiteReport:
    episodes: list[EpisodeReport]
    success_rate: float | None
    mean_steps: float | None
    mean_wall_time: float | None
    retry_histogram: dict[int, int] = field(default_factory=dict)

    @property
    def solved(self) -> int:
        return sum(1 for e in self.episodes if e.solved)

    def to_json(self) -> dict:
        return {
            "episodes": [e.to_json() for e in self.episodes],
            "solved": self.solved,
            "total": len(self.episodes),
            "success_rate": self.success_rate,
            "mean_steps": self.mean_steps,
            "mean_wall_time": self.mean_wall_time,
            "retry_histogram": {str(k): v for k, v in sorted(self.retry_histogram.items())},
        }


def aggregate(episodes: list[EpisodeReport]) -> SuiteReport:
    """Reduce per-episode rows into suite metrics.

    An empty suite is flagged with ``success_rate=None`` rather than a fake
    zero.
    """
    if not episodes:
        return SuiteReport([], None, None, None, {})
    histogram = Counter(e.retries_used for e in episodes)
    n = len(episodes)
    return SuiteReport(
        episodes=episodes,
        success_rate=sum(1 for e in episodes if e.solved) / n,
        mean_steps=sum(e.total_steps for e in episodes) / n,
        mean_wall_time=sum(e.wall_time for e in episodes) / n,
        retry_histogram=dict(histogram),
    )


def policy_for(scenario: Scenario, config: RunConfig, playbook_dir: Path | None = None) -> Policy:
    """Scenario's scripted playbook when declared, a seeded fuzzer otherwise."""
    if scenario.playbook:
        return ScriptedPolicy(load_playbook(scenario.playbook, playbook_dir))
    return RandomPolicy(config.seed)


def run_suite(
    scenarios: list[Scenario],
    config: RunConfig,
    playbook_dir: Path | None = None,
) -> SuiteReport:
    episodes = []
    for scenario in scenarios:
        policy = policy_for(scenario, config, playbook_dir)
        episodes.append(run_episode(scenario, policy, config))
    return aggregate(episodes)


def run_suite_dir(directory: str | Path, config: RunConfig) -> SuiteReport:
    return run_suite(load_scenario_dir(directory), config)


def sweep_step_limit(
    scenarios: list[Scenario],
    limits: list[int],
    config: RunConfig,
    playbook_dir: Path | None = None,
) -> list[dict]:
    """One suite run per step limit; rows are ready for plotting or CSV."""
    if limits != sorted(limits):
        raise ValueError("limits must be ascending")
    rows = []
    for limit in limits:
        limited = dataclasses.replace(config, step_limit=limit)
        report = run_suite(scenarios, limited, playbook_dir)
        rows.append(
            {
                "step_limit": limit,
                "solved": report.solved,
                "total": len(report.episodes),
                "success_rate": report.success_rate,
            }
        )
    return rows


def sweep_to_csv(rows: list[dict]) -> str:
    lines = ["step_limit,solved,total,success_rate"]
    for row in rows:
        rate = "" if row["success_rate"] is None else f"{row['success_rate']:.6f}"
        lines.append(f"{row['step_limit']},{row['solved']},{row['total']},{rate}")
    return "\n".join(lines) + "\n"


__all__ = [
    "SuiteReport",
    "aggregate",
    "policy_for",
    "run_suite",
    "run_suite_dir",
    "sweep_step_limit",
    "sweep_to_csv",
]
