"""One scenario, three safety regimes.

The poisoned-path scenario: the first playbook guess recreates a missing
storage class with a provisioner this cluster does not run. The class itself
is harmless (severity is unchanged) so the transaction commits, but the fix
attempt in the next round must overwrite it, and provisioner updates are
forbidden. Only the full pipeline, which rolls leftovers back at the start of
each round, recovers.

Run with:  python3 demos/04_episode_and_ablations.py
"""

from noregress.harness import policy_for
from noregress.health import severity_repr
from noregress.orchestrator import Ablation, RunConfig, run_episode
from noregress.scenarios import bundled_scenario_dir, load_scenario

scenario = load_scenario(bundled_scenario_dir() / "poisoned-storage-provisioner.json")

for ablation in (Ablation.FULL, Ablation.NO_RETRY, Ablation.NAIVE_RETRY_NO_UNDO):
    config = RunConfig(ablation=ablation)
    report = run_episode(scenario, policy_for(scenario, config), config)
    trajectory = " -> ".join(severity_repr(v) for v in report.visible_trajectory)
    print(f"== {ablation.value} ==")
    print(f"  solved={report.solved}  rounds={len(report.rounds)}  "
          f"steps={report.total_steps}  termination={report.termination}")
    print(f"  visible severity: {trajectory}")
    for r in report.rounds:
        print(f"  round {r.attempt}: {r.plan_intent!r} -> txn {r.txn_status}, "
              f"validated={r.validation_success}")
        for issue in r.issues[:2]:
            print(f"      issue: {issue.strip()}")
    print()

# The cascade scenario shows the regression the naive mode exposes: its first
# plan fixes one deployment but breaks a bigger one, and without abort-undo
# the damage becomes externally visible.
scenario = load_scenario(bundled_scenario_dir() / "wrong-image-cascade.json")
for ablation in (Ablation.FULL, Ablation.NAIVE_RETRY_NO_UNDO):
    config = RunConfig(ablation=ablation)
    report = run_episode(scenario, policy_for(scenario, config), config)
    trajectory = " -> ".join(severity_repr(v) for v in report.visible_trajectory)
    print(f"== cascade under {ablation.value} ==")
    print(f"  solved={report.solved}  visible severity: {trajectory}")
    for regression in report.regressions:
        print(f"  REGRESSION: {regression}")
    print()
