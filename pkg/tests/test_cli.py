"""Command-line behavior: exit codes, outputs, journal persistence, serving."""

from __future__ import annotations

import json
import socket
import subprocess
import sys
import time
import urllib.request
from pathlib import Path


from safescope.cli import main
from safescope.funnel import DEFAULT_STAGES, stages_to_json
from safescope.project import load_project

GOLDEN = Path(__file__).parent / "golden"


def _write_answers(path: Path, entries: list[dict]) -> None:
    path.write_text("\n".join(json.dumps(e) for e in entries) + "\n", encoding="utf-8")


def _answer(question_id: str, kind: str = "TEXT", value="reviewed") -> dict:
    return {
        "question_id": question_id,
        "kind": kind,
        "value": value,
        "author": "tester",
        "timestamp": "2026-06-01T08:00:00Z",
    }


class TestValidate:
    def test_consistent_project_exits_zero(self, fresh_project, capsys):
        assert main(["validate", "--project", str(fresh_project)]) == 0
        assert "OK" in capsys.readouterr().out

    def test_dangling_part_exits_one(self, fresh_project, capsys):
        spec_path = fresh_project / "spec.csv"
        text = spec_path.read_text(encoding="utf-8")
        spec_path.write_text(text.replace("VALVE_BLOCK", "GHOST_PART"), encoding="utf-8")
        assert main(["validate", "--project", str(fresh_project)]) == 1
        out = capsys.readouterr().out
        assert "unknown_part" in out

    def test_malformed_csv_exits_two(self, fresh_project, capsys):
        (fresh_project / "spec.csv").write_text("not,a,valid,header\nx\n", encoding="utf-8")
        assert main(["validate", "--project", str(fresh_project)]) == 2
        assert "error" in capsys.readouterr().err

    def test_missing_project_exits_two(self, tmp_path, capsys):
        assert main(["validate", "--project", str(tmp_path / "nope")]) == 2


class TestQuestions:
    def test_matches_generated_questionnaire(self, fresh_project, capsys):
        assert main(["questions", "--project", str(fresh_project)]) == 0
        items = json.loads(capsys.readouterr().out)
        store = load_project(fresh_project)
        assert len(items) == len(store.state.questions)
        assert items[0]["id"] == store.state.questions[0].id
        assert all(item["answered"] is False for item in items)

    def test_out_flag_writes_file(self, fresh_project, tmp_path, capsys):
        out = tmp_path / "q.json"
        assert main(["questions", "--project", str(fresh_project), "--out", str(out)]) == 0
        assert json.loads(out.read_text(encoding="utf-8"))


class TestAnswer:
    def test_applies_and_bumps_revision(self, fresh_project, tmp_path, capsys):
        answers = tmp_path / "batch.jsonl"
        _write_answers(
            answers,
            [_answer("S5A:EBS_W000_FL"), _answer("S5B:EBS_W000_FL", value="noise")],
        )
        assert main(["answer", "--project", str(fresh_project), str(answers)]) == 0
        assert "revision now 3" in capsys.readouterr().out
        store = load_project(fresh_project)
        assert store.revision == 3
        state_cache = json.loads((fresh_project / "state.json").read_text())
        assert state_cache["revision"] == 3
        assert state_cache["journal_entries"] == 2

    def test_reapplying_same_file_changes_only_revision(self, fresh_project, tmp_path, capsys):
        answers = tmp_path / "batch.jsonl"
        _write_answers(answers, [_answer("S5A:EBS_W000_FL")])
        main(["answer", "--project", str(fresh_project), str(answers)])
        first = load_project(fresh_project)
        main(["answer", "--project", str(fresh_project), str(answers)])
        second = load_project(fresh_project)
        assert second.state.answers == first.state.answers
        assert second.state.classifications == first.state.classifications
        assert second.revision == first.revision + 1

    def test_type_mismatch_exits_one_without_side_effects(
        self, fresh_project, tmp_path, capsys
    ):
        answers = tmp_path / "bad.jsonl"
        _write_answers(
            answers,
            [_answer("S5A:EBS_W000_FL"), _answer("S5C:EBS_W000_FL", kind="TEXT", value="x")],
        )
        assert main(["answer", "--project", str(fresh_project), str(answers)]) == 1
        assert "expected" in capsys.readouterr().err
        assert not (fresh_project / "answers.jsonl").exists()

    def test_unknown_question_exits_one(self, fresh_project, tmp_path, capsys):
        answers = tmp_path / "bad.jsonl"
        _write_answers(answers, [_answer("S5A:GHOST")])
        assert main(["answer", "--project", str(fresh_project), str(answers)]) == 1


class TestFunnel:
    def test_counts_on_fixture(self, fixture_project, capsys):
        assert main(["funnel", "--project", str(fixture_project)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert [(s["input_count"], s["output_count"]) for s in doc["stages"]] == [
            (720, 500),
            (500, 330),
            (330, 60),
            (60, 40),
        ]

    def test_print_default_stages(self, capsys):
        assert main(["funnel", "--print-default-stages"]) == 0
        assert capsys.readouterr().out == stages_to_json(DEFAULT_STAGES)

    def test_funnel_without_project_or_flag_errors(self, capsys):
        assert main(["funnel"]) == 2

    def test_custom_stage_file(self, fixture_project, tmp_path, capsys):
        stages = [{"id": "sym", "name": "only symmetry", "op": "symmetry_reduce"}]
        stage_file = tmp_path / "stages.json"
        stage_file.write_text(json.dumps(stages), encoding="utf-8")
        assert main(
            ["funnel", "--project", str(fixture_project), "--stages", str(stage_file)]
        ) == 0
        doc = json.loads(capsys.readouterr().out)
        assert len(doc["stages"]) == 1
        assert doc["stages"][0]["input_count"] == 720

    def test_project_stages_json_used_by_default(self, fixture_project, capsys):
        (fixture_project / "stages.json").write_text(
            json.dumps([{"id": "sym", "name": "", "op": "symmetry_reduce"}]),
            encoding="utf-8",
        )
        main(["funnel", "--project", str(fixture_project)])
        doc = json.loads(capsys.readouterr().out)
        assert [s["stage_id"] for s in doc["stages"]] == ["sym"]


class TestReport:
    def test_markdown_matches_golden(self, fixture_project, capsys):
        assert main(
            ["report", "--project", str(fixture_project), "--format", "markdown"]
        ) == 0
        golden = (GOLDEN / "report_fixture.md").read_text(encoding="utf-8")
        assert capsys.readouterr().out == golden

    def test_json_parses_and_repeats(self, fixture_project, capsys):
        main(["report", "--project", str(fixture_project), "--format", "json"])
        first = capsys.readouterr().out
        main(["report", "--project", str(fixture_project), "--format", "json"])
        second = capsys.readouterr().out
        assert first == second
        doc = json.loads(first)
        assert doc["header"]["subsystem_id"] == "EBS"

    def test_out_bundle(self, fixture_project, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["report", "--project", str(fixture_project), "--out", str(out)]) == 0
        for name in (
            "report.json",
            "report.md",
            "requirements.json",
            "requirements.md",
            "frequencies.csv",
        ):
            assert (out / name).is_file()
        freq = (out / "frequencies.csv").read_text(encoding="utf-8").splitlines()
        assert freq[0] == "dtc_code,point_rate_per_hour,upper_bound_per_hour,exceeds_benchmark"


class TestPropagation:
    def test_dot_output(self, fixture_project, capsys):
        assert main(["propagation", "--project", str(fixture_project), "--dot"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("digraph platform {")
        assert '"EBS" -> "RETARDER"' in out

    def test_summary_without_dot(self, fixture_project, capsys):
        assert main(["propagation", "--project", str(fixture_project)]) == 0
        assert "subsystems" in capsys.readouterr().out


def _free_port() -> int:
    probe = socket.socket()
    probe.bind(("127.0.0.1", 0))
    port = probe.getsockname()[1]
    probe.close()
    return port


class TestServe:
    def test_occupied_port_exits_two(self, fixture_project, capsys):
        blocker = socket.socket()
        blocker.bind(("127.0.0.1", 0))
        port = blocker.getsockname()[1]
        try:
            code = main(
                ["serve", "--project", str(fixture_project), "--port", str(port)]
            )
        finally:
            blocker.close()
        assert code == 2
        assert "cannot bind" in capsys.readouterr().err

    def test_serve_answer_report_round_trip(self, fixture_project, tmp_path):
        """End to end over a real socket: health, post an answer, report moves."""
        port = _free_port()
        proc = subprocess.Popen(
            [
                sys.executable,
                "-m",
                "safescope.cli",
                "serve",
                "--project",
                str(fixture_project),
                "--port",
                str(port),
            ],
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
        )
        base = f"http://127.0.0.1:{port}/api/v1"
        try:
            health = _wait_for_health(base, proc)
            revision = health["revision"]

            # EBS_W015_FL is a residual class representative, so its answers
            # surface in the report's findings section.
            body = json.dumps(
                {"answer": _answer("S5A:EBS_W015_FL", value="updated by http"), "revision": revision}
            ).encode()
            request = urllib.request.Request(
                f"{base}/answers", data=body, headers={"Content-Type": "application/json"}
            )
            with urllib.request.urlopen(request, timeout=5) as response:
                posted = json.loads(response.read())
            assert posted["new_revision"] == revision + 1

            with urllib.request.urlopen(f"{base}/report", timeout=30) as response:
                report = json.loads(response.read())
            assert report["header"]["revision"] == revision + 1
            assert "updated by http" in json.dumps(report["per_monitor_findings"])
        finally:
            proc.terminate()
            proc.wait(timeout=10)


def _wait_for_health(base: str, proc: subprocess.Popen, attempts: int = 80) -> dict:
    for _ in range(attempts):
        time.sleep(0.25)
        if proc.poll() is not None:
            raise AssertionError(
                f"server exited early: {proc.returncode}\n{proc.stderr.read()[:1000]}"
            )
        try:
            with urllib.request.urlopen(f"{base}/health", timeout=1) as response:
                return json.loads(response.read())
        except OSError:
            continue
    raise AssertionError("server never became healthy")
