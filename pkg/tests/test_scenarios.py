"""Scenario file loading, schema enforcement, and canonical round-trips."""

import json

import pytest

from noregress.scenarios import (
    Scenario,
    SchemaError,
    bundled_playbook_dir,
    bundled_scenario_dir,
    canonical_json,
    load_scenario,
    load_scenario_dir,
    validate_scenario_data,
)


def minimal_data(**overrides):
    data = {
        "id": "mini",
        "namespace": "ns",
        "nodes": [{"name": "node-1"}],
        "deployments": [
            {"name": "web", "replicas": 1, "image": "web:v1", "container_port": 80}
        ],
        "fault": {"kind": "NoOp"},
    }
    data.update(overrides)
    return data


class TestLoading:
    def test_bundled_missing_storage_class_loads(self):
        path = bundled_scenario_dir() / "missing-storage-class.json"
        scenario = load_scenario(path)
        assert scenario.fault.kind == "MissingStorageClass"
        assert scenario.playbook == "missing-storage-class"

    def test_unknown_field_rejected_with_path(self, tmp_path):
        data = minimal_data(surprise=1)
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data))
        with pytest.raises(SchemaError) as err:
            load_scenario(path)
        assert "surprise" in str(err.value)

    def test_nested_unknown_field_rejected(self):
        data = minimal_data()
        data["deployments"][0]["cpu_limit"] = "500m"
        with pytest.raises(SchemaError) as err:
            validate_scenario_data(data)
        assert err.value.field_path.startswith("deployments/0")

    def test_bad_fault_kind_rejected(self):
        with pytest.raises(SchemaError):
            validate_scenario_data(minimal_data(fault={"kind": "Meteor"}))

    def test_noop_scenario_loads(self):
        path = bundled_scenario_dir() / "noop-detection-hotel.json"
        scenario = load_scenario(path)
        assert scenario.is_noop
        assert scenario.fault.kind == "NoOp"

    def test_invalid_json_reports_line(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"id": "x",,}')
        with pytest.raises(SchemaError) as err:
            load_scenario(path)
        assert "line" in str(err.value)


class TestCanonicalForm:
    def test_every_bundled_scenario_round_trips_byte_identically(self):
        for path in sorted(bundled_scenario_dir().glob("*.json")):
            raw = path.read_text()
            scenario = load_scenario(path)
            assert scenario.to_canonical_json() == raw, path.name

    def test_canonical_json_is_stable(self):
        data = minimal_data()
        shuffled = dict(reversed(list(data.items())))
        assert canonical_json(data) == canonical_json(shuffled)


class TestBuildState:
    def test_initial_state_is_healthy_and_reconciled(self):
        scenario = load_scenario(bundled_scenario_dir() / "missing-storage-class.json")
        state = scenario.build_initial_state()
        assert all(p.phase == "Running" for p in state.pods)
        assert state.pvc("geo-pvc").status == "Bound"

    def test_faulty_state_reflects_injection(self):
        scenario = load_scenario(bundled_scenario_dir() / "missing-storage-class.json")
        state = scenario.build_faulty_state()
        assert state.storage_class("geo-storage") is None
        assert state.pvc("geo-pvc").status == "Pending"

    def test_correct_images_snapshot_declared_images(self):
        scenario = load_scenario(bundled_scenario_dir() / "wrong-image.json")
        initial = scenario.build_initial_state()
        assert initial.truth.correct_images["search"] == "hotel/search:v1"
        faulty = scenario.build_faulty_state()
        assert faulty.deployment("search").image == "hotel/search:broken"

    def test_correct_images_override(self):
        data = minimal_data(correct_images={"web": "web:v2"})
        scenario = Scenario(data=data)
        state = scenario.build_initial_state()
        # declared image differs from ground truth: pods crashloop from the start
        assert state.truth.correct_images["web"] == "web:v2"
        assert state.pods_of("web")[0].phase == "CrashLoopBackOff"


class TestCorpusShape:
    def test_corpus_size_and_families(self):
        scenarios = load_scenario_dir(bundled_scenario_dir())
        assert len(scenarios) >= 10
        kinds = {s.fault.kind for s in scenarios}
        assert {
            "TargetPortMisconfig",
            "MissingStorageClass",
            "WrongImage",
            "ScaleToZero",
            "AssignNonexistentNode",
            "PodKillTransient",
            "NoOp",
        } <= kinds
        noop = [s for s in scenarios if s.is_noop]
        assert len(noop) == 2

    def test_every_referenced_playbook_exists(self):
        for scenario in load_scenario_dir(bundled_scenario_dir()):
            if scenario.playbook:
                assert (bundled_playbook_dir() / f"{scenario.playbook}.json").exists()
