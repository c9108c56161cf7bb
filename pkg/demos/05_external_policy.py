"""Drive a mitigation round from an external process over the wire protocol.

Frames are a decimal byte length, a newline, then that many bytes of UTF-8
JSON. The harness sends one observation document and expects one plan
document back; the plan is vetted with the same parse + confinement checks
as any internal policy.

Run with:  python3 demos/05_external_policy.py
"""

import subprocess
import sys
import textwrap

from noregress.health import health_report
from noregress.policies import ExternalPolicyAdapter, build_observation
from noregress.scenarios import bundled_scenario_dir, load_scenario
from noregress.workload import run_workload

# A minimal external policy: reads the observation, scales up whatever the
# trace analysis points at.
POLICY_SOURCE = textwrap.dedent(
    """
    import json, sys

    def read_frame(stream):
        header = b""
        while not header.endswith(b"\\n"):
            header += stream.read(1)
        return json.loads(stream.read(int(header.strip())).decode())

    def write_frame(stream, doc):
        data = json.dumps(doc).encode()
        stream.write(str(len(data)).encode() + b"\\n" + data)
        stream.flush()

    obs = read_frame(sys.stdin.buffer)
    suspects = obs["trace_analysis"]
    target = suspects[0]["operation"] if suspects else "frontend"
    write_frame(sys.stdout.buffer, {
        "intent": f"scale {target} back up",
        "commands": [f"kubectl scale deployment {target} --replicas=1 "
                     f"-n test-hotel-reservation"],
        "expected_effect": "requests succeed",
    })
    """
)

scenario = load_scenario(bundled_scenario_dir() / "scale-to-zero.json")
state = scenario.build_faulty_state()
wl = run_workload(state, 117, seed=0)
obs = build_observation(state, wl, health_report(state, wl))
print(f"observation: {wl.failed_requests} failed requests, "
      f"suspects={obs.trace_analysis}")

proc = subprocess.Popen(
    [sys.executable, "-c", POLICY_SOURCE],
    stdin=subprocess.PIPE,
    stdout=subprocess.PIPE,
)
try:
    adapter = ExternalPolicyAdapter(proc.stdout, proc.stdin, timeout=10.0)
    plan = adapter.propose(obs, attempt=1, reflection=None)
    print(f"external plan: {plan.intent!r}")
    for command in plan.commands:
        print(f"  {command}")
finally:
    proc.kill()
