"""Transactions: hidden severity paths, commit/abort, and the undo walk.

The externally visible trajectory only ever contains the entry severity and,
for committed transactions, the exit severity. Everything in between is
hidden, and an abort erases it entirely.

Run with:  python3 demos/03_transactions_and_undo.py
"""

from noregress.cluster import ClusterState, Deployment, GroundTruth, Node, reconcile
from noregress.commands import parse
from noregress.health import severity_repr
from noregress.txn import Env, begin, finalize, step, visible_trajectory


def degraded_env(replicas: int) -> Env:
    """Severity here is simply the number of crashlooping web pods."""
    state = ClusterState(
        nodes=[Node("node-1")],
        namespaces={"prod"},
        deployments=[Deployment("web", "prod", replicas, "web:broken", 8080)],
        truth=GroundTruth(correct_images={"web": "web:v1"}),
    )
    return Env(state=reconcile(state))


def run_plan(baseline: int, replica_steps: list[int], window: int = 20):
    env = degraded_env(baseline)
    txn = begin(env, "mitigation-agent", window)
    for n in replica_steps:
        step(env, txn, parse(f"kubectl scale deployment web --replicas={n} -n prod"))
    status = finalize(env, txn)
    hidden = " -> ".join(severity_repr(v) for v in txn.hidden_path)
    visible = " -> ".join(severity_repr(v) for v in visible_trajectory([txn], baseline))
    print(f"  hidden {hidden:18s} {status:9s} visible {visible}")
    return env


print("== four mitigation plans, hidden vs visible ==")
run_plan(12, [18, 9])        # transient spike, then better: commits
run_plan(15, [22, 11])       # same shape
run_plan(15, [24, 30])       # strictly worse: aborts, no trace remains
run_plan(15, [12], window=1) # single hot-fix within budget: commits
run_plan(15, [21], window=1) # single hot-fix that misses: aborts

# The undo stack walks in strict reverse order. Committed work stays on the
# stack so a later round can clear leftovers down to the initial state.
print("\n== walking the stack by hand ==")
env = degraded_env(6)
txn = begin(env, "mitigation-agent", 20)
step(env, txn, parse("kubectl scale deployment web --replicas=4 -n prod"))
step(env, txn, parse("kubectl cordon node-1"))
finalize(env, txn)  # 4 + cordoned node = 5 <= 6: commits

state = env.state
while True:
    message, depth, state = env.stack.rollback_last(state)
    print(f"  [{depth}] {message.splitlines()[0][:112]}")
    if message == "No more actions to rollback.":
        break
print(f"  web replicas after walk: {state.deployment('web').desired_replicas}")
print(f"  node-1 schedulable:      {state.node('node-1').schedulable}")
