"""Scenario files: initial cluster, traffic, fault, and playbook reference.

Scenarios are JSON documents in a canonical form (sorted keys, two-space
indent, trailing newline) so that loading and re-serializing a bundled file
reproduces it byte for byte. Unknown fields are rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from . import cluster
from .cluster import ClusterState, FaultSpec, GroundTruth, reconcile

SCENARIO_SCHEMA: dict = {
    "type": "object",
    "additionalProperties": False,
    "required": ["id", "namespace", "nodes", "deployments", "fault"],
    "properties": {
        "id": {"type": "string", "minLength": 1},
        "description": {"type": "string"},
        "namespace": {"type": "string"},
        "nodes": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name"],
                "properties": {
                    "name": {"type": "string"},
                    "schedulable": {"type": "boolean"},
                    "healthy": {"type": "boolean"},
                },
            },
        },
        "deployments": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "replicas", "image", "container_port"],
                "properties": {
                    "name": {"type": "string"},
                    "replicas": {"type": "integer", "minimum": 0},
                    "image": {"type": "string"},
                    "container_port": {"type": "integer"},
                    "node_selector": {"type": ["string", "null"]},
                    "pvc_refs": {"type": "array", "items": {"type": "string"}},
                    "container_name": {"type": "string"},
                },
            },
        },
        "services": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "port", "target_port", "selector"],
                "properties": {
                    "name": {"type": "string"},
                    "port": {"type": "integer"},
                    "target_port": {"type": "integer"},
                    "selector": {"type": "string"},
                },
            },
        },
        "pvcs": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "storage_class"],
                "properties": {
                    "name": {"type": "string"},
                    "storage_class": {"type": "string"},
                },
            },
        },
        "storage_classes": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "provisioner"],
                "properties": {
                    "name": {"type": "string"},
                    "provisioner": {"type": "string"},
                    "binding_mode": {"type": "string"},
                },
            },
        },
        "working_provisioners": {"type": "array", "items": {"type": "string"}},
        "correct_images": {
            "type": "object",
            "additionalProperties": {"type": "string"},
        },
        "request_mix": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "path"],
                "properties": {
                    "name": {"type": "string"},
                    "path": {"type": "array", "items": {"type": "string"}},
                    "weight": {"type": "number", "exclusiveMinimum": 0},
                },
            },
        },
        "fault": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": list(cluster.FAULT_KINDS)},
                "target": {"type": "string"},
                "params": {"type": "object"},
                "persistent": {"type": "boolean"},
            },
        },
        "playbook": {"type": "string"},
        "expected_solvable": {"type": "boolean"},
        "crashing_commands": {
            "type": "array",
            "items": {
                "type": "array",
                "items": {"type": "string"},
                "minItems": 3,
                "maxItems": 3,
            },
        },
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)


class SchemaError(Exception):
    """A scenario file failed validation; carries the offending field path."""

    def __init__(self, source: str, field_path: str, message: str):
        super().__init__(f"{source}: {field_path}: {message}")
        self.source = source
        self.field_path = field_path


@dataclass
class Scenario:
    data: dict
    source: str = "<memory>"

    @property
    def id(self) -> str:
        return self.data["id"]

    @property
    def playbook(self) -> str | None:
        return self.data.get("playbook")

    @property
    def expected_solvable(self) -> bool:
        return self.data.get("expected_solvable", True)

    @property
    def fault(self) -> FaultSpec:
        f = self.data["fault"]
        return FaultSpec(
            kind=f["kind"],
            target=f.get("target", ""),
            params=dict(f.get("params", {})),
            persistent=f.get("persistent", True),
        )

    @property
    def is_noop(self) -> bool:
        return self.fault.kind == "NoOp"

    def to_canonical_json(self) -> str:
        return canonical_json(self.data)

    def build_initial_state(self) -> ClusterState:
        """Materialize the declared (healthy) cluster, fully reconciled.

        The declared deployment images become the environment's ground truth
        of which images actually work.
        """
        d = self.data
        namespace = d["namespace"]
        state = ClusterState(
            nodes=[
                cluster.Node(
                    name=n["name"],
                    schedulable=n.get("schedulable", True),
                    healthy=n.get("healthy", True),
                )
                for n in d["nodes"]
            ],
            namespaces={namespace},
            deployments=[
                cluster.Deployment(
                    name=dep["name"],
                    namespace=namespace,
                    desired_replicas=dep["replicas"],
                    image=dep["image"],
                    container_port=dep["container_port"],
                    node_selector=dep.get("node_selector"),
                    pvc_refs=list(dep.get("pvc_refs", [])),
                    container_name=dep.get("container_name"),
                )
                for dep in d["deployments"]
            ],
            services=[
                cluster.Service(
                    name=s["name"],
                    namespace=namespace,
                    port=s["port"],
                    target_port=s["target_port"],
                    selector=s["selector"],
                )
                for s in d.get("services", [])
            ],
            pvcs=[
                cluster.Pvc(
                    name=p["name"], namespace=namespace, storage_class=p["storage_class"]
                )
                for p in d.get("pvcs", [])
            ],
            storage_classes=[
                cluster.StorageClass(
                    name=c["name"],
                    provisioner=c["provisioner"],
                    binding_mode=c.get("binding_mode", "Immediate"),
                )
                for c in d.get("storage_classes", [])
            ],
            truth=GroundTruth(
                correct_images={dep["name"]: dep["image"] for dep in d["deployments"]}
                | dict(d.get("correct_images", {})),
                working_provisioners=list(
                    d.get("working_provisioners", ["rancher.io/local-path"])
                ),
                crashing_commands=[tuple(c) for c in d.get("crashing_commands", [])],
                request_mix=[dict(m) for m in d.get("request_mix", [])],
            ),
        )
        return reconcile(state)

    def build_faulty_state(self) -> ClusterState:
        return cluster.inject_fault(self.build_initial_state(), self.fault)


def canonical_json(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def validate_scenario_data(data: dict, source: str = "<memory>") -> None:
    errors = sorted(_VALIDATOR.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        first = errors[0]
        path = "/".join(str(p) for p in first.absolute_path) or "<root>"
        raise SchemaError(source, path, first.message)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(str(path), f"line {exc.lineno}", exc.msg)
    validate_scenario_data(data, str(path))
    return Scenario(data=data, source=str(path))


def load_scenario_dir(directory: str | Path) -> list[Scenario]:
    directory = Path(directory)
    return [load_scenario(p) for p in sorted(directory.glob("*.json"))]


def bundled_scenario_dir() -> Path:
    return Path(resources.files("noregress.data").joinpath("scenarios"))


def bundled_playbook_dir() -> Path:
    return Path(resources.files("noregress.data").joinpath("playbooks"))


def load_playbook(name: str, directory: str | Path | None = None) -> dict:
    directory = Path(directory) if directory else bundled_playbook_dir()
    path = directory / f"{name}.json"
    return json.loads(path.read_text())


__all__ = [
    "SCENARIO_SCHEMA",
    "Scenario",
    "SchemaError",
    "bundled_playbook_dir",
    "bundled_scenario_dir",
    "canonical_json",
    "load_playbook",
    "load_scenario",
    "load_scenario_dir",
    "validate_scenario_data",
]
