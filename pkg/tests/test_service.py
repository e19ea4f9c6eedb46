"""HTTP API behavior: filters, pagination, optimistic concurrency, consistency."""

from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from safescope.project import load_project
from safescope.service import PAGE_SIZE, create_app


@pytest.fixture
def answered_client(fixture_project):
    store = load_project(fixture_project)
    return TestClient(create_app(store)), store


@pytest.fixture
def fresh_client(fresh_project):
    store = load_project(fresh_project)
    return TestClient(create_app(store)), store


def _answer_body(question_id: str, revision: int, value="text", kind="TEXT") -> dict:
    return {
        "answer": {
            "question_id": question_id,
            "kind": kind,
            "value": value,
            "author": "ui",
            "timestamp": "2026-06-01T09:00:00Z",
        },
        "revision": revision,
    }


class TestHealth:
    def test_reports_revision(self, answered_client):
        client, store = answered_client
        response = client.get("/api/v1/health")
        assert response.status_code == 200
        assert response.json() == {"status": "ok", "revision": store.revision}


class TestMonitors:
    def test_lamp_filter(self, answered_client):
        client, store = answered_client
        response = client.get("/api/v1/monitors", params={"lamp": "RED", "page": 1})
        assert response.status_code == 200
        doc = response.json()
        expected = sum(1 for m in store.spec.monitors if m.lamp.value == "RED")
        assert doc["total"] == expected
        assert all(m["lamp"] == "RED" for m in doc["monitors"])

    def test_filters_are_conjunctive(self, answered_client):
        client, store = answered_client
        response = client.get(
            "/api/v1/monitors", params={"tag": "DRIVER_INTERFACE", "lamp": "RED"}
        )
        doc = response.json()
        expected = sum(
            1
            for m in store.spec.monitors
            if m.lamp.value == "RED" and m.part_id == "FBM"
        )
        assert doc["total"] == expected
        assert all("DRIVER_INTERFACE" in m["tags"] for m in doc["monitors"])

    def test_unknown_lamp_is_400(self, answered_client):
        client, _ = answered_client
        assert client.get("/api/v1/monitors", params={"lamp": "BLUE"}).status_code == 400

    def test_unknown_tag_is_400(self, answered_client):
        client, _ = answered_client
        assert client.get("/api/v1/monitors", params={"tag": "NOT_A_TAG"}).status_code == 400

    def test_pagination_is_stable_by_id(self, answered_client):
        client, store = answered_client
        page1 = client.get("/api/v1/monitors", params={"page": 1}).json()
        page2 = client.get("/api/v1/monitors", params={"page": 2}).json()
        assert page1["total"] == len(store.spec.monitors)
        assert len(page1["monitors"]) == PAGE_SIZE
        ids = [m["id"] for m in page1["monitors"]] + [m["id"] for m in page2["monitors"]]
        assert ids == sorted(ids)
        assert len(set(ids)) == len(ids)


class TestQuestions:
    def test_fresh_project_everything_pending(self, fresh_client):
        client, store = fresh_client
        doc = client.get("/api/v1/questions").json()
        assert doc["total"] == len(store.state.questions)

    def test_answer_decrements_pending_by_one(self, fresh_client):
        client, _ = fresh_client
        before = client.get("/api/v1/questions").json()
        revision = client.get("/api/v1/health").json()["revision"]
        target = next(q for q in before["questions"] if q["answer_kind"] == "TEXT")
        response = client.post(
            "/api/v1/answers", json=_answer_body(target["id"], revision)
        )
        assert response.status_code == 200
        after = client.get("/api/v1/questions").json()
        assert after["total"] == before["total"] - 1
        assert all(q["id"] != target["id"] for q in after["questions"])

    def test_fully_answered_pending_is_empty(self, answered_client):
        client, _ = answered_client
        assert client.get("/api/v1/questions").json()["total"] == 0

    def test_status_all_includes_answered(self, answered_client):
        client, store = answered_client
        doc = client.get("/api/v1/questions", params={"status": "all"}).json()
        assert doc["total"] == len(store.state.questions)
        assert all(q["answered"] for q in doc["questions"])

    def test_embeds_monitor_description(self, fresh_client):
        client, store = fresh_client
        doc = client.get("/api/v1/questions").json()
        monitor_targets = [
            q for q in doc["questions"] if q["target"] != store.spec.subsystem_id
        ]
        sample = monitor_targets[0]
        assert sample["target_description"] == store.spec.monitor(sample["target"]).description

    def test_unknown_status_is_400(self, fresh_client):
        client, _ = fresh_client
        assert client.get("/api/v1/questions", params={"status": "weird"}).status_code == 400


class TestPostAnswer:
    def test_accepts_at_current_revision(self, fresh_client):
        client, store = fresh_client
        revision = store.revision
        response = client.post(
            "/api/v1/answers", json=_answer_body("S5A:EBS_W015_FL", revision)
        )
        assert response.status_code == 200
        assert response.json()["new_revision"] == revision + 1
        assert store.revision == revision + 1

    def test_stale_revision_is_409_without_side_effects(self, fresh_client):
        client, store = fresh_client
        revision = store.revision
        first = client.post("/api/v1/answers", json=_answer_body("S5A:EBS_W015_FL", revision))
        assert first.status_code == 200
        replay = client.post("/api/v1/answers", json=_answer_body("S5A:EBS_W015_FL", revision))
        assert replay.status_code == 409
        assert replay.json()["current_revision"] == revision + 1
        assert store.revision == revision + 1
        journal = (store.root / "answers.jsonl").read_text().splitlines()
        assert len(journal) == 1

    def test_unknown_question_is_404(self, fresh_client):
        client, store = fresh_client
        response = client.post("/api/v1/answers", json=_answer_body("S5A:GHOST", store.revision))
        assert response.status_code == 404

    def test_type_mismatch_is_422(self, fresh_client):
        client, store = fresh_client
        response = client.post(
            "/api/v1/answers",
            json=_answer_body("S5C:EBS_W015_FL", store.revision, value="not boolean"),
        )
        assert response.status_code == 422

    def test_malformed_body_is_400(self, fresh_client):
        client, _ = fresh_client
        assert client.post("/api/v1/answers", json={"nope": 1}).status_code == 400

    def test_revision_sequence_has_no_gaps(self, fresh_client):
        client, store = fresh_client
        revisions = [client.get("/api/v1/health").json()["revision"]]
        for question_id in ("S5A:EBS_W015_FL", "S5B:EBS_W015_FL", "S2C:EBS_W015_FL"):
            response = client.post(
                "/api/v1/answers", json=_answer_body(question_id, revisions[-1])
            )
            assert response.status_code == 200
            revisions.append(response.json()["new_revision"])
        assert revisions == list(range(revisions[0], revisions[0] + 4))


class TestFunnelEndpoint:
    def test_fixture_counts(self, answered_client):
        client, _ = answered_client
        doc = client.get("/api/v1/funnel").json()
        assert [(s["input_count"], s["output_count"]) for s in doc["stages"]] == [
            (720, 500),
            (500, 330),
            (330, 60),
            (60, 40),
        ]
        assert doc["startup_split"]["startup_count"] == 20
        assert doc["startup_split"]["residual_count"] == 40

    def test_what_if_alternate_stages(self, answered_client):
        client, _ = answered_client
        # drop the yellow/trailer/driver exclusion: symmetry now sees 500
        stages = [
            {"id": "exclude_vehicle_level", "name": "", "op": "exclude_tag",
             "tags": ["VEHICLE_LEVEL"]},
            {"id": "symmetry", "name": "", "op": "symmetry_reduce"},
            {"id": "startup_split", "name": "", "op": "split_startup"},
        ]
        doc = client.get("/api/v1/funnel", params={"stages": json.dumps(stages)}).json()
        assert [s["stage_id"] for s in doc["stages"]] == [
            "exclude_vehicle_level",
            "symmetry",
            "startup_split",
        ]
        assert doc["stages"][1]["input_count"] == 500
        assert doc["stages"][1]["output_count"] > 60

    def test_bad_stage_config_is_400(self, answered_client):
        client, _ = answered_client
        assert client.get("/api/v1/funnel", params={"stages": "{bad"}).status_code == 400
        wrong_order = json.dumps(
            [
                {"id": "a", "name": "", "op": "split_startup"},
                {"id": "b", "name": "", "op": "symmetry_reduce"},
            ]
        )
        assert client.get("/api/v1/funnel", params={"stages": wrong_order}).status_code == 400

    def test_empty_project_zeroed_funnel(self, tmp_path):
        (tmp_path / "spec.csv").write_text(
            "#subsystem: SUB\n"
            "monitor_id,description,trigger_condition,healing_condition,system_reaction,dtc_codes\n",
            encoding="utf-8",
        )
        (tmp_path / "platform.json").write_text(
            json.dumps({"subsystems": [{"id": "SUB", "variants": [{"id": "V"}]}]}),
            encoding="utf-8",
        )
        client = TestClient(create_app(load_project(tmp_path)))
        doc = client.get("/api/v1/funnel").json()
        assert all(s["input_count"] == 0 and s["output_count"] == 0 for s in doc["stages"])


class TestReportEndpoint:
    def test_byte_identical_to_cli(self, fixture_project, capsys):
        from safescope.cli import main

        store = load_project(fixture_project)
        client = TestClient(create_app(store))
        http_body = client.get("/api/v1/report").text

        assert main(["report", "--project", str(fixture_project), "--format", "json"]) == 0
        cli_body = capsys.readouterr().out
        assert http_body == cli_body

    def test_reflects_new_answer(self, fresh_client):
        client, store = fresh_client
        before = client.get("/api/v1/report").json()
        assert before["header"]["completeness"]["answered"] == 0

        revision = store.revision
        response = client.post(
            "/api/v1/answers",
            json=_answer_body(
                "S5D:EBS_W015_FL",
                revision,
                kind="DATA_NEED",
                value={"data_item": "pressure channel", "format": "NETWORK_SIGNAL"},
            ),
        )
        assert response.status_code == 200
        after = client.get("/api/v1/report").json()
        assert after["header"]["revision"] == revision + 1
        detections = [r for r in after["requirements"] if r["kind"] == "DETECTION"]
        assert len(detections) == 1

    def test_gets_are_idempotent(self, answered_client):
        client, _ = answered_client
        assert client.get("/api/v1/report").text == client.get("/api/v1/report").text
        assert client.get("/api/v1/funnel").text == client.get("/api/v1/funnel").text
