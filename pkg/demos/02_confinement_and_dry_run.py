"""Command confinement: what the linter blocks, and what dry-run catches.

Run with:  python3 demos/02_confinement_and_dry_run.py
"""

from noregress.commands import Role, dry_run, parse, vet
from noregress.scenarios import bundled_scenario_dir, load_scenario

ATTEMPTS = [
    # blocked for every role
    "kubectl delete namespace test-hotel-reservation",
    "kubectl edit deployment/geo",
    "kubectl apply -f -",
    "kubectl exec -it geo-1 -n test-hotel-reservation -- sh",
    "kubectl get pods | grep Running",
    "kubectl get pods && echo success",
    "kubectl delete pod $(kubectl get pods -o name)",
    "for p in a b; do kubectl delete pod $p; done",
    # read-only agents cannot write
    "kubectl scale deployment geo --replicas=0",
    # fine
    "kubectl get pods -n test-hotel-reservation",
]

print("== confinement verdicts (read-only role) ==")
for text in ATTEMPTS:
    _, verdict = vet(text, Role.READ_ONLY)
    mark = "allow" if verdict.allowed else "BLOCK"
    shown = text if len(text) < 58 else text[:55] + "..."
    print(f"  [{mark}] {shown}")
    if not verdict.allowed:
        print(f"          -> {verdict.reason}")

# Dry-run catches mistakes that are syntactically clean but wrong, without
# touching the cluster, e.g. a flag kubectl create does not have.
scenario = load_scenario(bundled_scenario_dir() / "missing-storage-class.json")
state = scenario.build_faulty_state()

print("\n== dry-run ==")
bad = parse("kubectl create storageclass geo-storage --provisioner=kubernetes.io/aws-ebs")
outcome = dry_run(state, bad)
print(f"  create with unknown flag -> ok={outcome.ok}: {outcome.message}")

good = parse(
    "kubectl apply -f - -n test-hotel-reservation <<EOF\n"
    "apiVersion: storage.k8s.io/v1\n"
    "kind: StorageClass\n"
    "metadata:\n"
    "  name: geo-storage\n"
    "provisioner: rancher.io/local-path\n"
    "EOF"
)
outcome = dry_run(state, good)
print(f"  inline-manifest apply    -> ok={outcome.ok}: {outcome.message}")
