"""kubectl-style command parsing, confinement linting, dry-run, and inverses.

Only single kubectl invocations are accepted: pipelines, compound commands,
substitution, flow control, and function definitions are rejected before verb
dispatch so that every action the writer takes is one individually checkable
command. The blocked-reason strings come from the message catalog shipped in
``data/message_catalog.txt`` and are emitted byte-exactly.
"""

from __future__ import annotations

import enum
import re
import shlex
from dataclasses import dataclass, field
from importlib import resources

import yaml

from . import cluster
from .cluster import ClusterState, ImmutableFieldConflict, UnknownTarget

READ_VERBS = frozenset({"get", "describe", "logs"})
WRITE_VERBS = frozenset(
    {
        "apply",
        "delete",
        "patch",
        "scale",
        "create",
        "cordon",
        "uncordon",
        "rollout-restart",
        "exec",
        "edit",
        "debug",
        "attach",
    }
)
ALL_VERBS = READ_VERBS | WRITE_VERBS

# Flags that consume the following token as their value.
_VALUE_FLAGS = frozenset(
    {
        "-n",
        "--namespace",
        "-f",
        "-o",
        "-p",
        "-l",
        "--replicas",
        "--image",
        "--target-port",
        "--node-selector",
    }
)

_INTERACTIVE_FLAGS = ("-it", "-ti", "-i", "-t", "--stdin", "--tty")

# Per-verb flag whitelist, checked at dry-run time (mirrors kubectl's own
# "error: unknown flag" behavior).
_KNOWN_FLAGS: dict[str, frozenset[str]] = {
    "get": frozenset({"-n", "--namespace", "-o", "-l"}),
    "describe": frozenset({"-n", "--namespace"}),
    "logs": frozenset({"-n", "--namespace"}),
    "apply": frozenset({"-n", "--namespace", "-f"}),
    "delete": frozenset({"-n", "--namespace"}),
    "patch": frozenset({"-n", "--namespace", "--image", "--target-port", "--node-selector"}),
    "scale": frozenset({"-n", "--namespace", "--replicas"}),
    "create": frozenset({"-n", "--namespace"}),
    "cordon": frozenset(),
    "uncordon": frozenset(),
    "rollout-restart": frozenset({"-n", "--namespace"}),
}

_KIND_ALIASES = {
    "po": "pod",
    "pods": "pod",
    "deploy": "deployment",
    "deployments": "deployment",
    "svc": "service",
    "services": "service",
    "pvc": "pvc",
    "pvcs": "pvc",
    "persistentvolumeclaim": "pvc",
    "persistentvolumeclaims": "pvc",
    "storageclass": "storageclass",
    "storageclasses": "storageclass",
    "sc": "storageclass",
    "node": "node",
    "nodes": "node",
    "namespace": "namespace",
    "namespaces": "namespace",
    "ns": "namespace",
}

_MANIFEST_KINDS = {
    "StorageClass": "storageclass",
    "Deployment": "deployment",
    "Service": "service",
    "PersistentVolumeClaim": "pvc",
    "Node": "node",
    "Namespace": "namespace",
}


def _load_catalog() -> dict[str, str]:
    text = resources.files("noregress.data").joinpath("message_catalog.txt").read_text()
    catalog: dict[str, str] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rule, _, message = line.partition(": ")
        catalog[rule] = message
    return catalog


MESSAGE_CATALOG = _load_catalog()


def catalog_message(rule: str, **kw: str) -> str:
    return MESSAGE_CATALOG[rule].format(**kw)


class Role(enum.Enum):
    READ_ONLY = "ReadOnly"
    WRITER = "Writer"


class ParseErrorKind(enum.Enum):
    PIPE = "PipeDetected"
    COMPOUND = "CompoundDetected"
    SUBSTITUTION = "SubstitutionDetected"
    FLOW_CONTROL = "FlowControlDetected"
    FUNCTION = "FunctionDetected"
    STDIN = "StdinDetected"
    MALFORMED = "Malformed"


class ParseError(Exception):
    def __init__(self, kind: ParseErrorKind, message: str):
        super().__init__(message)
        self.kind = kind
        self.message = message


class NoInverse(Exception):
    """The command has no synthesizable inverse; lint must block it."""


class CommandRejected(Exception):
    """A write was attempted that dry-run validation would have refused."""


@dataclass
class Command:
    verb: str
    kind: str | None = None
    name: str | None = None
    namespace: str | None = None
    flags: list[tuple[str, str | None]] = field(default_factory=list)
    manifest: dict | None = None
    text: str = ""

    @property
    def kind_base(self) -> str | None:
        """Kind normalized to its singular resource name ("pods" -> "pod")."""
        if self.kind is None:
            return None
        base = self.kind.split(".")[0].lower()
        return _KIND_ALIASES.get(base, base)

    def flag(self, name: str) -> str | None:
        for flag, value in self.flags:
            if flag == name:
                return value
        return None

    def has_flag(self, name: str) -> bool:
        return any(flag == name for flag, _ in self.flags)


@dataclass(frozen=True)
class LintVerdict:
    allowed: bool
    reason: str = ""


@dataclass(frozen=True)
class PredictedOutcome:
    ok: bool
    message: str = ""


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_HEREDOC_RE = re.compile(r"<<\s*EOF\n(?P<body>.*)\nEOF\s*$", re.DOTALL)
_FUNCTION_RE = re.compile(r"\b\w+\s*\(\s*\)\s*\{")
_FLOW_KEYWORDS = frozenset({"if", "for", "while", "until", "case", "do", "then", "fi", "done", "esac"})


def _reject_shell_syntax(text: str) -> None:
    if _FUNCTION_RE.search(text):
        raise ParseError(ParseErrorKind.FUNCTION, catalog_message("function-detected"))
    if "$(" in text or "`" in text:
        raise ParseError(ParseErrorKind.SUBSTITUTION, catalog_message("substitution-detected"))
    first = text.split(None, 1)[0] if text.split() else ""
    if first in _FLOW_KEYWORDS:
        raise ParseError(ParseErrorKind.FLOW_CONTROL, catalog_message("flow-control-detected"))
    if "&&" in text or "||" in text or ";" in text or "\n" in text:
        raise ParseError(ParseErrorKind.COMPOUND, catalog_message("compound-detected"))
    if "|" in text:
        raise ParseError(ParseErrorKind.PIPE, catalog_message("pipe-detected"))


def parse(text: str) -> Command:
    """Parse one kubectl invocation, optionally carrying an inline manifest.

    The manifest form mirrors shell heredoc syntax (``apply -f - <<EOF``
    followed by a YAML body and a terminating ``EOF`` line) but is parsed
    in-process; no shell or file system is involved.
    """
    original = text
    text = text.strip()
    manifest = None
    heredoc = _HEREDOC_RE.search(text)
    if heredoc is not None:
        try:
            manifest = yaml.safe_load(heredoc.group("body"))
        except yaml.YAMLError as exc:
            raise ParseError(
                ParseErrorKind.MALFORMED,
                catalog_message("malformed", detail=f"bad manifest: {exc}"),
            )
        if not isinstance(manifest, dict):
            raise ParseError(
                ParseErrorKind.MALFORMED,
                catalog_message("malformed", detail="manifest must be a mapping"),
            )
        text = text[: heredoc.start()].strip()

    if not text:
        raise ParseError(ParseErrorKind.MALFORMED, catalog_message("malformed", detail="empty command"))
    _reject_shell_syntax(text)

    try:
        tokens = shlex.split(text)
    except ValueError as exc:
        raise ParseError(ParseErrorKind.MALFORMED, catalog_message("malformed", detail=str(exc)))
    if not tokens or tokens[0] != "kubectl":
        raise ParseError(
            ParseErrorKind.MALFORMED,
            catalog_message("malformed", detail="expected a kubectl command"),
        )
    if len(tokens) < 2:
        raise ParseError(ParseErrorKind.MALFORMED, catalog_message("malformed", detail="missing verb"))

    verb = tokens[1]
    rest = tokens[2:]
    if verb == "rollout":
        if not rest or rest[0] != "restart":
            raise ParseError(
                ParseErrorKind.MALFORMED,
                catalog_message("malformed", detail="only 'rollout restart' is supported"),
            )
        verb = "rollout-restart"
        rest = rest[1:]
    if verb not in ALL_VERBS:
        raise ParseError(
            ParseErrorKind.MALFORMED,
            catalog_message("malformed", detail=f"unknown verb: {verb}"),
        )

    flags: list[tuple[str, str | None]] = []
    positionals: list[str] = []
    i = 0
    while i < len(rest):
        token = rest[i]
        if token == "--":
            # Container-side command for exec/attach; keep it opaque.
            flags.append(("--", " ".join(rest[i + 1 :])))
            break
        if token.startswith("-"):
            if "=" in token:
                flag, _, value = token.partition("=")
                flags.append((flag, value))
            elif token in _VALUE_FLAGS and i + 1 < len(rest) and not rest[i + 1].startswith("-"):
                flags.append((token, rest[i + 1]))
                i += 1
            elif token == "-f" and i + 1 < len(rest) and rest[i + 1] == "-":
                flags.append(("-f", "-"))
                i += 1
            else:
                flags.append((token, None))
        else:
            positionals.append(token)
        i += 1

    kind: str | None = None
    name: str | None = None
    if verb in ("cordon", "uncordon"):
        kind = "node"
        name = positionals[0] if positionals else None
    elif positionals:
        if len(positionals) == 1:
            kind = positionals[0]
        else:
            kind, name = positionals[0], positionals[1]
        # "kubectl delete pod/foo" form
        if name is None and kind is not None and "/" in kind:
            kind, _, name = kind.partition("/")

    namespace = None
    for flag_name in ("-n", "--namespace"):
        value = next((v for f, v in flags if f == flag_name), None)
        if value:
            namespace = value

    cmd = Command(
        verb=verb,
        kind=kind,
        name=name,
        namespace=namespace,
        flags=flags,
        manifest=manifest,
        text=original.strip(),
    )
    if manifest is not None:
        m_kind = manifest.get("kind")
        if m_kind not in _MANIFEST_KINDS:
            raise ParseError(
                ParseErrorKind.MALFORMED,
                catalog_message("malformed", detail=f"unsupported manifest kind: {m_kind}"),
            )
        meta = manifest.get("metadata") or {}
        if not meta.get("name"):
            raise ParseError(
                ParseErrorKind.MALFORMED,
                catalog_message("malformed", detail="manifest missing metadata.name"),
            )
    return cmd


def classify(cmd: Command) -> str:
    """Total classification: observing verbs read, everything else writes."""
    return "Read" if cmd.verb in READ_VERBS else "Write"


# ---------------------------------------------------------------------------
# Confinement lint
# ---------------------------------------------------------------------------

def lint(cmd: Command, role: Role) -> LintVerdict:
    """Confinement verdict for one parsed command under the given role.

    Rule order matters: the blocked-for-all-agents rules run first so their
    exact messages win over the role check.
    """
    if cmd.verb == "delete" and cmd.kind_base == "namespace":
        return LintVerdict(False, catalog_message("namespace-delete"))
    if cmd.verb in ("apply", "create") and (
        cmd.kind_base == "namespace"
        or (cmd.manifest is not None and cmd.manifest.get("kind") == "Namespace")
    ):
        return LintVerdict(False, catalog_message("namespace-create"))
    if cmd.verb in ("edit", "debug"):
        return LintVerdict(False, catalog_message("interactive-command", verb=cmd.verb))
    if cmd.flag("-f") == "-" and cmd.manifest is None:
        return LintVerdict(False, catalog_message("stdin-redirection"))
    for flag in _INTERACTIVE_FLAGS:
        if cmd.has_flag(flag):
            return LintVerdict(False, catalog_message("interactive-flag", flag=flag))
    if cmd.verb in ("exec", "attach"):
        return LintVerdict(False, catalog_message("no-undo", verb=cmd.verb))
    if cmd.verb == "apply":
        f_value = cmd.flag("-f")
        if f_value is not None and f_value != "-":
            return LintVerdict(False, catalog_message("file-manifest"))
        if cmd.manifest is None:
            return LintVerdict(False, catalog_message("missing-manifest"))
    if role is Role.READ_ONLY and classify(cmd) == "Write":
        return LintVerdict(False, catalog_message("readonly-write"))
    return LintVerdict(True)


def vet(text: str, role: Role) -> tuple[Command | None, LintVerdict]:
    """Parse + lint in one step; parse rejections surface as lint verdicts."""
    try:
        cmd = parse(text)
    except ParseError as exc:
        return None, LintVerdict(False, exc.message)
    return cmd, lint(cmd, role)


# ---------------------------------------------------------------------------
# Dry-run and state transitions
# ---------------------------------------------------------------------------

def _validate_flags(cmd: Command) -> str | None:
    known = _KNOWN_FLAGS.get(cmd.verb, frozenset())
    for flag, _ in cmd.flags:
        if flag == "--":
            continue
        if flag not in known:
            return f"error: unknown flag: {flag}"
    return None


def _validate(state: ClusterState, cmd: Command) -> str | None:
    """Shared dry-run validation; returns an error message or None."""
    if state.crashed:
        return "error: the cluster is unavailable"
    bad_flag = _validate_flags(cmd)
    if bad_flag:
        return bad_flag
    if cmd.verb == "create":
        return "error: resource creation from flags is not supported; apply a manifest"
    if cmd.verb == "apply" and cmd.manifest is None:
        return "error: apply requires an inline manifest"
    if cmd.verb == "scale":
        if cmd.flag("--replicas") is None:
            return "error: --replicas is required"
        try:
            if int(cmd.flag("--replicas")) < 0:
                return "error: replicas may not be negative"
        except ValueError:
            return f"error: invalid replica count: {cmd.flag('--replicas')}"
        if cmd.kind_base != "deployment" or cmd.name is None:
            return "error: scale targets a named deployment"
    if cmd.verb == "patch":
        patchable = ("--image", "--target-port", "--node-selector")
        if not any(cmd.has_flag(f) for f in patchable):
            return "error: patch requires one of --image, --target-port, --node-selector"
        if cmd.name is None:
            return "error: patch targets a named resource"
    if cmd.verb == "delete" and cmd.name is None:
        return "error: delete targets a named resource"
    if cmd.verb in ("cordon", "uncordon") and cmd.name is None:
        return f"error: {cmd.verb} targets a named node"
    if cmd.verb == "rollout-restart" and (cmd.kind_base != "deployment" or cmd.name is None):
        return "error: rollout restart targets a named deployment"
    return None


def dry_run(state: ClusterState, cmd: Command) -> PredictedOutcome:
    """Predict the outcome of a write without touching the input state.

    Crashing transitions are deliberately not predicted: the dry run models
    an API-server check, not a full-system simulation, which is exactly why
    it is a weak safeguard that the transaction layer must back up.
    """
    problem = _validate(state, cmd)
    if problem:
        return PredictedOutcome(False, problem)
    try:
        apply_write(state, cmd, _dry=True)
    except UnknownTarget as exc:
        return PredictedOutcome(False, f"error: {exc}")
    except ImmutableFieldConflict as exc:
        return PredictedOutcome(False, str(exc))
    return PredictedOutcome(True, "ok")


def apply_write(state: ClusterState, cmd: Command, _dry: bool = False) -> ClusterState:
    """Execute one allowed write and reconcile.

    Returns the crash state for transitions the scenario declares crashing;
    raises UnknownTarget / ImmutableFieldConflict for rejected transitions
    (state unchanged); raises CommandRejected for commands dry-run refuses.
    """
    if classify(cmd) != "Write":
        raise CommandRejected("not a write command")
    problem = _validate(state, cmd)
    if problem:
        raise CommandRejected(problem)

    if not _dry and (cmd.verb, cmd.kind_base or "", cmd.name or "") in {
        tuple(entry) for entry in state.truth.crashing_commands
    }:
        return cluster.crash(state)

    out = state.clone()
    verb = cmd.verb
    if verb == "scale":
        dep = out.deployment(cmd.name)
        if dep is None:
            raise UnknownTarget(f'deployment "{cmd.name}" not found')
        dep.desired_replicas = int(cmd.flag("--replicas"))
    elif verb == "patch":
        _patch(out, cmd)
    elif verb == "apply":
        _apply_manifest(out, cmd.manifest)
    elif verb == "delete":
        _delete(out, cmd)
    elif verb in ("cordon", "uncordon"):
        node = out.node(cmd.name)
        if node is None:
            raise UnknownTarget(f'node "{cmd.name}" not found')
        node.schedulable = verb == "uncordon"
    elif verb == "rollout-restart":
        dep = out.deployment(cmd.name)
        if dep is None:
            raise UnknownTarget(f'deployment "{cmd.name}" not found')
        out.pods = [p for p in out.pods if p.owner_deployment != cmd.name]
    else:
        raise CommandRejected(f"error: no transition for verb {verb}")
    return cluster.reconcile(out)


def _patch(out: ClusterState, cmd: Command) -> None:
    kind = cmd.kind_base
    if kind == "deployment":
        dep = out.deployment(cmd.name)
        if dep is None:
            raise UnknownTarget(f'deployment "{cmd.name}" not found')
        if cmd.has_flag("--image"):
            dep.image = cmd.flag("--image")
        if cmd.has_flag("--node-selector"):
            value = cmd.flag("--node-selector")
            dep.node_selector = value or None
    elif kind == "service":
        svc = out.service(cmd.name)
        if svc is None:
            raise UnknownTarget(f'service "{cmd.name}" not found')
        if cmd.has_flag("--target-port"):
            svc.target_port = int(cmd.flag("--target-port"))
    else:
        raise UnknownTarget(f'cannot patch resource kind "{cmd.kind}"')


def _apply_manifest(out: ClusterState, manifest: dict) -> None:
    kind = manifest["kind"]
    meta = manifest.get("metadata") or {}
    name = meta["name"]
    spec = manifest.get("spec") or {}

    if kind == "StorageClass":
        existing = out.storage_class(name)
        provisioner = manifest.get("provisioner", "")
        binding = manifest.get("volumeBindingMode", "Immediate")
        if existing is not None:
            if existing.provisioner != provisioner:
                raise ImmutableFieldConflict(
                    f'The StorageClass "{name}" is invalid: provisioner: '
                    "Forbidden: updates to provisioner are forbidden"
                )
            if existing.binding_mode != binding:
                raise ImmutableFieldConflict(
                    f'The StorageClass "{name}" is invalid: volumeBindingMode: '
                    f'Invalid value: "{binding}": field is immutable'
                )
            return
        out.storage_classes.append(
            cluster.StorageClass(name=name, provisioner=provisioner, binding_mode=binding)
        )
    elif kind == "Deployment":
        namespace = meta.get("namespace", "default")
        container = (spec.get("template") or {}).get("container") or {}
        new = cluster.Deployment(
            name=name,
            namespace=namespace,
            desired_replicas=int(spec.get("replicas", 1)),
            image=container.get("image", spec.get("image", "")),
            container_port=int(container.get("port", spec.get("port", 80))),
            node_selector=spec.get("nodeSelector"),
            pvc_refs=list(spec.get("pvcRefs", [])),
            container_name=container.get("name"),
        )
        existing = out.deployment(name)
        if existing is not None:
            out.deployments[out.deployments.index(existing)] = new
        else:
            out.deployments.append(new)
    elif kind == "Service":
        namespace = meta.get("namespace", "default")
        new = cluster.Service(
            name=name,
            namespace=namespace,
            port=int(spec.get("port", 80)),
            target_port=int(spec.get("targetPort", spec.get("port", 80))),
            selector=spec.get("selector", name),
        )
        existing = out.service(name)
        if existing is not None:
            out.services[out.services.index(existing)] = new
        else:
            out.services.append(new)
    elif kind == "PersistentVolumeClaim":
        namespace = meta.get("namespace", "default")
        existing = out.pvc(name)
        storage_class = spec.get("storageClassName", "")
        if existing is not None:
            if existing.storage_class != storage_class:
                raise ImmutableFieldConflict(
                    f'The PersistentVolumeClaim "{name}" is invalid: '
                    "spec: Forbidden: spec is immutable after creation"
                )
            return
        out.pvcs.append(
            cluster.Pvc(name=name, namespace=namespace, storage_class=storage_class)
        )
    elif kind == "Node":
        existing = out.node(name)
        new = cluster.Node(
            name=name,
            schedulable=bool(spec.get("schedulable", True)),
            healthy=bool(spec.get("healthy", True)),
        )
        if existing is not None:
            out.nodes[out.nodes.index(existing)] = new
        else:
            out.nodes.append(new)
    else:
        raise CommandRejected(f"error: unsupported manifest kind: {kind}")


def _delete(out: ClusterState, cmd: Command) -> None:
    kind, name = cmd.kind_base, cmd.name
    if kind == "pod":
        pod = out.pod(name)
        if pod is None:
            raise UnknownTarget(f'pod "{name}" not found')
        out.pods.remove(pod)
    elif kind == "deployment":
        dep = out.deployment(name)
        if dep is None:
            raise UnknownTarget(f'deployment "{name}" not found')
        out.deployments.remove(dep)
    elif kind == "service":
        svc = out.service(name)
        if svc is None:
            raise UnknownTarget(f'service "{name}" not found')
        out.services.remove(svc)
    elif kind == "pvc":
        claim = out.pvc(name)
        if claim is None:
            raise UnknownTarget(f'persistentvolumeclaim "{name}" not found')
        out.pvcs.remove(claim)
    elif kind == "storageclass":
        cls = out.storage_class(name)
        if cls is None:
            raise UnknownTarget(f'storageclass "{name}" not found')
        out.storage_classes.remove(cls)
    elif kind == "node":
        node = out.node(name)
        if node is None:
            raise UnknownTarget(f'node "{name}" not found')
        out.nodes.remove(node)
    else:
        raise UnknownTarget(f'cannot delete resource kind "{cmd.kind}"')


# ---------------------------------------------------------------------------
# Inverse synthesis
# ---------------------------------------------------------------------------

def _ns_suffix(cmd: Command) -> str:
    return f" -n {cmd.namespace}" if cmd.namespace else ""


def manifest_command_text(manifest: dict, namespace: str | None = None) -> str:
    """Render a manifest back into the inline-apply command form."""
    body = yaml.dump(manifest, sort_keys=False, default_flow_style=False).rstrip("\n")
    ns = f" -n {namespace}" if namespace else ""
    return f"kubectl apply -f -{ns} <<EOF\n{body}\nEOF"


def manifest_for(state: ClusterState, kind_base: str, name: str) -> dict | None:
    """Reconstruct the manifest of a live resource, if it exists."""
    if kind_base == "storageclass":
        cls = state.storage_class(name)
        if cls is None:
            return None
        return {
            "apiVersion": "storage.k8s.io/v1",
            "kind": "StorageClass",
            "metadata": {"name": cls.name},
            "provisioner": cls.provisioner,
            "volumeBindingMode": cls.binding_mode,
        }
    if kind_base == "deployment":
        dep = state.deployment(name)
        if dep is None:
            return None
        return {
            "apiVersion": "apps/v1",
            "kind": "Deployment",
            "metadata": {"name": dep.name, "namespace": dep.namespace},
            "spec": {
                "replicas": dep.desired_replicas,
                "nodeSelector": dep.node_selector,
                "pvcRefs": list(dep.pvc_refs),
                "template": {
                    "container": {
                        "name": dep.container(),
                        "image": dep.image,
                        "port": dep.container_port,
                    }
                },
            },
        }
    if kind_base == "service":
        svc = state.service(name)
        if svc is None:
            return None
        return {
            "apiVersion": "v1",
            "kind": "Service",
            "metadata": {"name": svc.name, "namespace": svc.namespace},
            "spec": {
                "port": svc.port,
                "targetPort": svc.target_port,
                "selector": svc.selector,
            },
        }
    if kind_base == "pvc":
        claim = state.pvc(name)
        if claim is None:
            return None
        return {
            "apiVersion": "v1",
            "kind": "PersistentVolumeClaim",
            "metadata": {"name": claim.name, "namespace": claim.namespace},
            "spec": {"storageClassName": claim.storage_class},
        }
    if kind_base == "node":
        node = state.node(name)
        if node is None:
            return None
        return {
            "apiVersion": "v1",
            "kind": "Node",
            "metadata": {"name": node.name},
            "spec": {"schedulable": node.schedulable, "healthy": node.healthy},
        }
    return None


def synthesize_inverse(state: ClusterState, cmd: Command) -> Command | None:
    """Build the command that undoes ``cmd`` when run after it.

    ``state`` must be the pre-execution state. Returns None as the recorded
    no-op marker for commands the reconciler already compensates (deleting a
    deployment-owned pod, rollout restarts).
    """
    verb = cmd.verb
    ns = _ns_suffix(cmd)

    if verb == "scale":
        dep = state.deployment(cmd.name)
        if dep is None:
            raise NoInverse(f'deployment "{cmd.name}" not found')
        return parse(
            f"kubectl scale deployment {cmd.name} --replicas={dep.desired_replicas}{ns}"
        )

    if verb == "patch":
        if cmd.kind_base == "deployment":
            dep = state.deployment(cmd.name)
            if dep is None:
                raise NoInverse(f'deployment "{cmd.name}" not found')
            parts = []
            if cmd.has_flag("--image"):
                parts.append(f"--image={dep.image}")
            if cmd.has_flag("--node-selector"):
                parts.append(f"--node-selector={dep.node_selector or ''}")
            return parse(f"kubectl patch deployment {cmd.name} {' '.join(parts)}{ns}")
        if cmd.kind_base == "service":
            svc = state.service(cmd.name)
            if svc is None:
                raise NoInverse(f'service "{cmd.name}" not found')
            return parse(
                f"kubectl patch service {cmd.name} --target-port={svc.target_port}{ns}"
            )
        raise NoInverse(f"cannot invert patch of {cmd.kind}")

    if verb == "apply":
        manifest = cmd.manifest
        kind_base = _MANIFEST_KINDS[manifest["kind"]]
        name = manifest["metadata"]["name"]
        prior = manifest_for(state, kind_base, name)
        if prior is None:
            return parse(f"kubectl delete {kind_base} {name}{ns}")
        return parse(manifest_command_text(prior, cmd.namespace))

    if verb == "delete":
        if cmd.kind_base == "pod":
            pod = state.pod(cmd.name)
            if pod is None:
                raise NoInverse(f'pod "{cmd.name}" not found')
            if state.deployment(pod.owner_deployment) is not None:
                return None  # reconciler recreates owned pods
            raise NoInverse("unowned pods cannot be restored")
        prior = manifest_for(state, cmd.kind_base, cmd.name)
        if prior is None:
            raise NoInverse(f'{cmd.kind_base} "{cmd.name}" not found')
        return parse(manifest_command_text(prior, cmd.namespace))

    if verb in ("cordon", "uncordon"):
        node = state.node(cmd.name)
        if node is None:
            raise NoInverse(f'node "{cmd.name}" not found')
        back = "uncordon" if node.schedulable else "cordon"
        return parse(f"kubectl {back} {cmd.name}")

    if verb == "rollout-restart":
        return None  # recreated pods are canonically identical

    raise NoInverse(f"no inverse defined for verb {verb}")


__all__ = [
    "ALL_VERBS",
    "Command",
    "CommandRejected",
    "LintVerdict",
    "MESSAGE_CATALOG",
    "NoInverse",
    "ParseError",
    "ParseErrorKind",
    "PredictedOutcome",
    "READ_VERBS",
    "Role",
    "WRITE_VERBS",
    "apply_write",
    "catalog_message",
    "classify",
    "dry_run",
    "lint",
    "manifest_command_text",
    "manifest_for",
    "parse",
    "synthesize_inverse",
    "vet",
]
