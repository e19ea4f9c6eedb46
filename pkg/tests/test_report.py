"""Report assembly, rendering determinism, round-trips and the frozen golden."""

from __future__ import annotations

from pathlib import Path

import pytest

from safescope.errors import RevisionMismatch
from safescope.funnel import DEFAULT_STAGES, run_funnel
from safescope.heuristics import Answer, apply_answer, completeness, new_state
from safescope.model import (
    DiagnosticSpec,
    PlatformModel,
    SubsystemDescriptor,
    VariantDescriptor,
)
from safescope.propagation import build_graph, min_config, trace
from safescope.report import (
    TracePair,
    analyze,
    build_report,
    render,
    render_json,
    render_markdown,
    report_from_json,
)
from safescope.requirements import RequirementKind

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="module")
def fixture_report(ebs_full_state, ebs_field_records):
    return analyze(ebs_full_state, field_records=ebs_field_records)


class TestBuildReport:
    def test_fixture_counts(self, fixture_report):
        counts = [(s.input_count, s.output_count) for s in fixture_report.funnel.stages]
        assert counts == [(720, 500), (500, 330), (330, 60), (60, 40)]
        residual = [
            r
            for r in fixture_report.requirements
            if r.kind is RequirementKind.RESIDUAL_HANDLING
        ]
        assert len(residual) == 40
        assert len(fixture_report.per_monitor_findings) == 40

    def test_totality_of_accounting(self, fixture_report, ebs_spec):
        accounted = [f.monitor_id for f in fixture_report.per_monitor_findings]
        for _name, ids in fixture_report.exclusions:
            accounted.extend(ids)
        assert sorted(accounted) == sorted(m.id for m in ebs_spec.monitors)

    def test_header_matches_completeness(self, fixture_report, ebs_full_state):
        done = completeness(ebs_full_state)
        answered, total, fraction = fixture_report.header.completeness
        assert (answered, total, fraction) == (done["answered"], done["total"], done["fraction"])
        assert fixture_report.header.revision == ebs_full_state.revision
        assert fixture_report.header.schema_version == 1

    def test_self_contained_ids(self, fixture_report, ebs_spec):
        known = {m.id for m in ebs_spec.monitors}
        for f in fixture_report.per_monitor_findings:
            assert f.monitor_id in known
            assert set(f.members) <= known
        for _name, ids in fixture_report.exclusions:
            assert set(ids) <= known
        reqs_sources = {
            r.source for r in fixture_report.requirements if r.kind is RequirementKind.RESIDUAL_HANDLING
        }
        assert reqs_sources == set(fixture_report.funnel.startup_split.residual_ids)

    def test_revision_mismatch_rejected(self, ebs_state):
        funnel_report = run_funnel(ebs_state)
        bumped = apply_answer(
            ebs_state, Answer("S5A:EBS_W000_FL", "text", "author", "2026-01-01T00:00:00Z")
        )
        graph = build_graph(bumped.platform)
        traces = {
            rep: TracePair(
                detected=trace(rep, bumped, True, graph),
                undetected=trace(rep, bumped, False, graph),
            )
            for rep in funnel_report.residual_ids
        }
        with pytest.raises(RevisionMismatch):
            build_report(
                bumped,
                funnel_report,
                DEFAULT_STAGES,
                traces,
                min_config("EBS", bumped, graph),
                (),
                (),
            )

    def test_empty_spec_report(self):
        platform = PlatformModel(
            subsystems=(
                SubsystemDescriptor(id="SUB", name="SUB", variants=(VariantDescriptor(id="V"),)),
            )
        )
        state = new_state(DiagnosticSpec("SUB", (), ()), platform)
        report = analyze(state)
        assert all(s.input_count == 0 for s in report.funnel.stages)
        assert report.per_monitor_findings == ()
        assert report.requirements == ()
        assert report.header.completeness == (0, 0, 1.0)
        assert report.open_items == ()


class TestRendering:
    def test_json_round_trip(self, fixture_report):
        text = render_json(fixture_report)
        assert report_from_json(text) == fixture_report

    def test_renders_are_deterministic(self, ebs_full_state, ebs_field_records):
        first = analyze(ebs_full_state, field_records=ebs_field_records)
        second = analyze(ebs_full_state, field_records=ebs_field_records)
        assert render_json(first) == render_json(second)
        assert render_markdown(first) == render_markdown(second)

    def test_markdown_has_residual_row(self, fixture_report):
        assert "| residual | 40 |" in render_markdown(fixture_report)

    def test_markdown_sections(self, fixture_report):
        md = render_markdown(fixture_report)
        for section in (
            "## Header",
            "## Funnel",
            "## Per-monitor findings",
            "## Exclusions",
            "## Availability signals",
            "## Minimum configuration",
            "## ADI requirements",
            "## Failure frequencies",
            "## Open items",
        ):
            assert section in md

    def test_markdown_matches_frozen_golden(self, fixture_report):
        golden = (GOLDEN / "report_fixture.md").read_text(encoding="utf-8")
        assert render_markdown(fixture_report) == golden

    def test_render_dispatch(self, fixture_report):
        assert render(fixture_report, "json") == render_json(fixture_report)
        assert render(fixture_report, "markdown") == render_markdown(fixture_report)
        with pytest.raises(ValueError):
            render(fixture_report, "pdf")

    def test_open_items_listed_when_unanswered(self, ebs_state):
        report = analyze(ebs_state)
        assert len(report.open_items) == len(ebs_state.questions)
        md = render_markdown(report)
        assert "All questions answered." not in md
