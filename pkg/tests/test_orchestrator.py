"""Episode orchestration: machine transitions, retries, and ablation modes."""

import pytest

from noregress.harness import policy_for
from noregress.orchestrator import (
    Ablation,
    Phase,
    RunConfig,
    ablation_mode_effects,
    machine_step,
    run_episode,
)
from noregress.policies import ANOMALOUS, HEALTHY
from noregress.scenarios import bundled_scenario_dir, load_scenario


def episode(scenario_name: str, **config_kw):
    scenario = load_scenario(bundled_scenario_dir() / f"{scenario_name}.json")
    config = RunConfig(**config_kw)
    return run_episode(scenario, policy_for(scenario, config), config)


class TestMachineStep:
    def test_validate_fail_with_retries_goes_to_reflect(self):
        assert machine_step(Phase.VALIDATE, validated=False) is Phase.REFLECT

    def test_validate_success_terminates(self):
        assert machine_step(Phase.VALIDATE, validated=True) is Phase.TERMINATE

    def test_reflect_with_exhausted_retries_terminates(self):
        assert machine_step(Phase.REFLECT, retries_left=0) is Phase.TERMINATE

    def test_reflect_with_budget_loops_to_rollback(self):
        assert machine_step(Phase.REFLECT, retries_left=3) is Phase.ROLLBACK

    def test_linear_phases(self):
        assert machine_step(Phase.INIT) is Phase.DETECT
        assert machine_step(Phase.DETECT, detected=ANOMALOUS) is Phase.ROLLBACK
        assert machine_step(Phase.DETECT, detected=HEALTHY) is Phase.TERMINATE
        assert machine_step(Phase.ROLLBACK) is Phase.BOOTSTRAP
        assert machine_step(Phase.BOOTSTRAP) is Phase.MITIGATE
        assert machine_step(Phase.MITIGATE) is Phase.VALIDATE
        assert machine_step(Phase.TERMINATE) is Phase.TERMINATE

    def test_missing_inputs_rejected(self):
        with pytest.raises(ValueError):
            machine_step(Phase.DETECT)
        with pytest.raises(ValueError):
            machine_step(Phase.VALIDATE)
        with pytest.raises(ValueError):
            machine_step(Phase.REFLECT)


class TestAblationEffects:
    def test_no_retry_forces_zero_budget(self):
        effects = ablation_mode_effects(RunConfig(ablation=Ablation.NO_RETRY))
        assert effects["retry_limit"] == 0

    def test_naive_disables_rollback_and_abort(self):
        effects = ablation_mode_effects(RunConfig(ablation=Ablation.NAIVE_RETRY_NO_UNDO))
        assert not effects["rollback_leftovers"]
        assert not effects["abort_undo"]
        assert effects["commit_regardless"]

    def test_full_enables_everything(self):
        effects = ablation_mode_effects(RunConfig(ablation=Ablation.FULL))
        assert effects["rollback_leftovers"]
        assert effects["abort_undo"]


class TestPoisonedPathScenario:
    def test_full_mode_solves_in_round_two(self):
        report = episode("poisoned-storage-provisioner")
        assert report.solved
        assert report.retries_used == 1
        assert len(report.rounds) == 2
        assert report.rounds[0].txn_status == "Committed"
        assert not report.rounds[0].validation_success
        assert report.rounds[1].validation_success

    def test_no_retry_fails(self):
        report = episode("poisoned-storage-provisioner", ablation=Ablation.NO_RETRY)
        assert not report.solved
        assert len(report.rounds) == 1

    def test_naive_retry_fails_on_immutable_conflict(self):
        report = episode(
            "poisoned-storage-provisioner", ablation=Ablation.NAIVE_RETRY_NO_UNDO
        )
        assert not report.solved
        # round 2's corrective apply is refused because round 1's class is
        # still there with a different provisioner
        round2 = report.rounds[1]
        assert round2.txn_status == "Committed"
        assert not round2.validation_success


class TestRegressionRecording:
    def test_naive_mode_records_visible_regression(self):
        report = episode("wrong-image-cascade", ablation=Ablation.NAIVE_RETRY_NO_UNDO)
        assert not report.solved
        assert report.regressions
        assert any(v > report.baseline for v in report.visible_trajectory)

    def test_full_mode_never_exceeds_baseline(self):
        report = episode("wrong-image-cascade")
        assert report.solved
        assert all(v <= report.baseline for v in report.visible_trajectory)
        assert not report.regressions


class TestNoOpPath:
    def test_detection_only_never_takes_writes(self):
        scenario = load_scenario(bundled_scenario_dir() / "noop-detection-hotel.json")
        config = RunConfig()
        report = run_episode(scenario, policy_for(scenario, config), config)
        assert report.solved
        assert report.termination == "detection-healthy"
        assert report.total_steps == 1
        assert not report.rounds
        events = [r["event"] for r in report.audit.records]
        assert "begin" not in events


class TestDeterminism:
    @pytest.mark.parametrize(
        "name", ["poisoned-storage-provisioner", "scale-to-zero", "nonexistent-node"]
    )
    def test_identical_runs_modulo_wall_time(self, name):
        a = episode(name, seed=11).to_json()
        b = episode(name, seed=11).to_json()
        a.pop("wall_time")
        b.pop("wall_time")
        assert a == b


class TestExternalFailureHandling:
    def test_timeout_counts_as_failed_attempt(self):
        from noregress.policies import Policy, MitigationPlan, ProtocolTimeout

        class FlakyPolicy(Policy):
            def propose(self, obs, attempt, reflection):
                if attempt == 1:
                    raise ProtocolTimeout("no response within 0.5s")
                return MitigationPlan(
                    "scale geo back up",
                    ["kubectl scale deployment geo --replicas=1 -n test-hotel-reservation"],
                )

        scenario = load_scenario(bundled_scenario_dir() / "scale-to-zero.json")
        report = run_episode(scenario, FlakyPolicy(), RunConfig())
        assert report.solved
        assert report.rounds[0].txn_status == "no-plan"
        assert report.retries_used == 1


class TestBounds:
    def test_rounds_bounded_by_retry_limit_plus_one(self):
        report = episode("poisoned-storage-provisioner", retry_limit=1)
        assert len(report.rounds) <= 2

    def test_step_limit_truncates(self):
        report = episode("poisoned-storage-provisioner", step_limit=3)
        assert not report.solved
        assert report.termination == "step-limit"
        assert report.total_steps <= 3

    def test_window_bounds_transaction_length(self):
        report = episode("missing-storage-class", window=1)
        # one-command plan still fits a window of one
        assert report.solved
