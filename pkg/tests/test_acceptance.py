"""Acceptance criteria, one test per criterion.

Each test ends by printing `ACCEPTANCE n <label>: PASS`; run with `-s` (or
read test_output.txt) to see the lines. Tolerances are pinned here: counts
are exact, frequency arithmetic uses relative 1e-12, runtime budgets are
wall-clock upper bounds.
"""

from __future__ import annotations

import json
import random
import socket
import subprocess
import sys
import time
import urllib.request
from dataclasses import replace

import pytest

from safescope.funnel import run_funnel, symmetry_reduce
from safescope.heuristics import new_state, replay_journal
from safescope.model import (
    DiagnosticSpec,
    DetectionPhase,
    FailureOrigin,
    FieldFailureRecord,
    PlatformModel,
    SubsystemDescriptor,
    VariantDescriptor,
    WarningLamp,
    variant_monitors,
)
from safescope.propagation import build_graph, min_config, trace
from safescope.report import analyze, render_json, render_markdown, report_to_dict
from safescope.requirements import (
    DEFAULT_BENCHMARK_RATE_PER_HOUR,
    RequirementKind,
    estimate_frequency,
)

from helpers import (
    closure_oracle,
    grouping_oracle,
    make_monitor,
    random_platform,
    random_symmetry_monitors,
    random_trace_spec,
)

REL = 1e-12


def _ok(number: int, label: str) -> None:
    print(f"ACCEPTANCE {number} {label}: PASS")


def test_c01_funnel_reproduction(ebs_state, ebs_spec):
    started = time.perf_counter()
    report = run_funnel(ebs_state)
    elapsed = time.perf_counter() - started

    counts = [(s.input_count, s.output_count) for s in report.stages]
    assert counts == [(720, 500), (500, 330), (330, 60), (60, 40)]
    assert report.startup_split.startup_count == 20
    assert report.startup_split.residual_count == 40

    # independent naive set-filter per stage
    s1 = {m.id for m in ebs_spec.monitors if m.failure_origin is not FailureOrigin.EXTERNAL}
    assert set(report.stages[0].surviving_ids) == s1 and len(s1) == 500
    s2 = {
        m.id
        for m in ebs_spec.monitors
        if m.id in s1
        and m.lamp is not WarningLamp.YELLOW
        and not (m.trailer_related and not m.affects_tractor)
        and m.part_id != "FBM"
    }
    assert set(report.stages[1].surviving_ids) == s2 and len(s2) == 330
    groups = grouping_oracle([m for m in ebs_spec.monitors if m.id in s2])
    reps = {min(ids) for ids in groups.values()}
    assert set(report.stages[2].surviving_ids) == reps and len(reps) == 60
    startup = {
        r for r in reps if ebs_spec.monitor(r).detection_phase is DetectionPhase.STARTUP
    }
    assert set(report.startup_split.startup_ids) == startup and len(startup) == 20
    assert set(report.startup_split.residual_ids) == reps - startup

    assert elapsed < 1.0, f"funnel took {elapsed:.3f}s"
    _ok(1, "funnel reproduction 720/500/330/60/20+40")


def test_c02_dtc_asymmetry(ebs_spec):
    assert len(ebs_spec.dtcs) == 210
    uses: dict[str, int] = {}
    for m in ebs_spec.monitors:
        for code in m.dtc_codes:
            uses[code] = uses.get(code, 0) + 1
    assert len(uses) == 210
    assert any(count >= 2 for count in uses.values())
    assert any(not m.dtc_codes for m in ebs_spec.monitors)
    _ok(2, "210 distinct DTCs, asymmetric mapping")


def test_c03_propagation_oracle_equivalence():
    started = time.perf_counter()
    checked = 0
    for seed in range(1000):
        rng = random.Random(seed)
        platform, _ = random_platform(rng)
        spec = random_trace_spec(rng, platform)
        state = new_state(spec, platform)
        graph = build_graph(platform)
        assert len(graph.nodes) <= 8
        assert len(graph.function_edges) <= 8 * 16  # realized edges from <=16 draws
        edges = [(e.provider, e.consumer, e.function) for e in graph.function_edges]
        for m in spec.monitors:
            undetected = trace(m.id, state, detected=False, graph=graph)
            expected = closure_oracle(edges, spec.subsystem_id, set(m.affected_functions))
            assert {a.subsystem_id for a in undetected.affected_subsystems} == expected
            detected = trace(m.id, state, detected=True, graph=graph)
            assert {a.subsystem_id for a in detected.affected_subsystems} <= {
                a.subsystem_id for a in undetected.affected_subsystems
            }
            checked += 1
    elapsed = time.perf_counter() - started
    assert checked >= 1000
    assert elapsed < 10.0, f"1000 platforms took {elapsed:.2f}s"
    _ok(3, f"propagation equals fixpoint oracle on 1000 platforms in {elapsed:.2f}s")


def test_c04_symmetry_conservation():
    for seed in range(500):
        monitors = random_symmetry_monitors(random.Random(seed))
        classes = symmetry_reduce(monitors)
        assert sum(c.multiplicity for c in classes) == len(monitors)
        members = [m for c in classes for m in c.members]
        assert len(members) == len(set(members)) == len(monitors)
        assert set(members) == {m.id for m in monitors}
    _ok(4, "symmetry conservation and partition on 500 random specs")


def _exhaustive_argmin(state, subsystem_id, graph):
    subsystem = state.platform.subsystem(subsystem_id)
    edges = [(e.provider, e.consumer, e.function) for e in graph.function_edges]
    own = state.spec.monitors if subsystem_id == state.spec.subsystem_id else ()
    scored = []
    for variant in subsystem.variants:
        impact = 0
        for m in variant_monitors(own, variant):
            if m.failure_origin is FailureOrigin.EXTERNAL or closure_oracle(
                edges, subsystem_id, set(m.affected_functions)
            ):
                impact += 1
        closure: set[str] = set()
        frontier = list(variant.dependencies)
        while frontier:
            dep = frontier.pop()
            if dep in closure or dep == subsystem_id:
                continue
            closure.add(dep)
            dep_sub = state.platform.subsystem(dep)
            if dep_sub and dep_sub.variants:
                frontier.extend(min(dep_sub.variants, key=lambda v: v.id).dependencies)
        scored.append((impact, len(closure), variant.id))
    return min(scored)


def _five_variant_platform() -> PlatformModel:
    variants = tuple(
        VariantDescriptor(
            id=f"V{i}",
            applicable_monitor_tags=tuple(f"fn:f{j}" for j in range(i + 1)),
            dependencies=tuple(f"D{j}" for j in range(i % 3)),
        )
        for i in range(5)
    )
    subsystems = (
        SubsystemDescriptor(
            id="SUB", name="SUB", functions_provided=("f0", "f1", "f2", "f3", "f4"),
            variants=variants,
        ),
        SubsystemDescriptor(
            id="SINK", name="SINK", functions_consumed=("f0", "f2"),
            variants=(VariantDescriptor(id="V"),),
        ),
        SubsystemDescriptor(id="D0", name="D0", variants=(VariantDescriptor(id="V"),)),
        SubsystemDescriptor(id="D1", name="D1", variants=(VariantDescriptor(id="V"),)),
    )
    return PlatformModel(subsystems=subsystems)


def test_c05_min_config_oracle(ebs_state):
    cases = []

    # EBS fixture (two variants)
    cases.append((ebs_state, "EBS"))

    # five-variant constructed fixture
    platform = _five_variant_platform()
    monitors = tuple(
        make_monitor(f"M{i}", functions=(f"f{i}",)) for i in range(5)
    )
    cases.append((new_state(DiagnosticSpec("SUB", monitors, ()), platform), "SUB"))

    # lexicographic tie-break: identical impact and dependency counts
    tie_platform = PlatformModel(
        subsystems=(
            SubsystemDescriptor(
                id="SUB",
                name="SUB",
                functions_provided=("fx",),
                variants=(VariantDescriptor(id="VB"), VariantDescriptor(id="VA")),
            ),
        )
    )
    cases.append((new_state(DiagnosticSpec("SUB", (), ()), tie_platform), "SUB"))

    for state, subsystem_id in cases:
        graph = build_graph(state.platform)
        result = min_config(subsystem_id, state, graph)
        impact, deps, variant_id = _exhaustive_argmin(state, subsystem_id, graph)
        assert result.chosen_variant == variant_id
        assert result.external_impact_count == impact
        assert len(result.induced_dependencies) == deps
        assert len(result.ranking) == len(state.platform.subsystem(subsystem_id).variants)

    tie_result = min_config("SUB", cases[-1][0], build_graph(cases[-1][0].platform))
    assert tie_result.chosen_variant == "VA"
    _ok(5, "min-config equals exhaustive argmin incl. tie-break")


def test_c06_requirement_counts(ebs_full_state):
    report = analyze(ebs_full_state)
    residual = [r for r in report.requirements if r.kind is RequirementKind.RESIDUAL_HANDLING]
    assert len(residual) == 40

    expected_groups = {
        tuple(sorted(m.affected_functions))
        for m in ebs_full_state.spec.monitors
        if m.failure_origin is FailureOrigin.EXTERNAL
    }
    availability = [
        r for r in report.requirements if r.kind is RequirementKind.AVAILABILITY_SIGNAL
    ]
    assert len(availability) == len(expected_groups) == len(report.availability_signals)
    _ok(6, "40 residual requirements, one availability group per function set")


def test_c07_frequency_arithmetic():
    (a,) = estimate_frequency((FieldFailureRecord("A", 3, 1_000_000),))
    assert a.point_rate_per_hour == pytest.approx(3.0e-6, rel=REL)
    (b,) = estimate_frequency((FieldFailureRecord("B", 0, 10_000),))
    assert b.upper_bound_per_hour == pytest.approx(1.0e-4, rel=REL)
    (c,) = estimate_frequency((FieldFailureRecord("C", 5, 100_000),))
    assert c.point_rate_per_hour == pytest.approx(5.0e-5, rel=REL)
    assert DEFAULT_BENCHMARK_RATE_PER_HOUR == pytest.approx(2.0e-5, rel=REL)
    assert c.exceeds_benchmark is True
    _ok(7, "frequency arithmetic at rel 1e-12 incl. benchmark flag")


def test_c08_end_to_end_determinism(ebs_field_records):
    from safescope.fixtures import ANSWERS, PLATFORM, SPEC, fixture_text
    from safescope.heuristics import load_journal
    from safescope.model import parse_platform, parse_spec

    def run_once() -> tuple[str, str]:
        spec = parse_spec(fixture_text(SPEC))
        platform = parse_platform(fixture_text(PLATFORM))
        state = replay_journal(new_state(spec, platform), load_journal(fixture_text(ANSWERS)))
        report = analyze(state, field_records=ebs_field_records)
        return render_json(report), render_markdown(report)

    first_json, first_md = run_once()
    second_json, second_md = run_once()
    assert first_json == second_json
    assert first_md == second_md
    _ok(8, "two end-to-end runs byte-identical (JSON and Markdown)")


def test_c09_journal_replay(ebs_state, ebs_journal):
    once = replay_journal(ebs_state, ebs_journal)
    twice = replay_journal(once, ebs_journal)

    assert twice.revision == once.revision + len(ebs_journal)
    assert replace(twice, revision=once.revision) == once

    def strip_revisions(report_dict: dict) -> dict:
        report_dict["header"]["revision"] = None
        report_dict["funnel"]["revision"] = None
        return report_dict

    report_once = strip_revisions(report_to_dict(analyze(once)))
    report_twice = strip_revisions(report_to_dict(analyze(twice)))
    assert report_once == report_twice
    _ok(9, "journal applied twice differs only in revision")


def test_c10_service_equals_cli(fixture_project, capsys):
    from safescope.cli import main

    probe = socket.socket()
    probe.bind(("127.0.0.1", 0))
    port = probe.getsockname()[1]
    probe.close()

    proc = subprocess.Popen(
        [sys.executable, "-m", "safescope.cli", "serve",
         "--project", str(fixture_project), "--port", str(port)],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True,
    )
    try:
        base = f"http://127.0.0.1:{port}/api/v1"
        for _ in range(80):
            time.sleep(0.25)
            assert proc.poll() is None, f"server died: {proc.stderr.read()[:800]}"
            try:
                with urllib.request.urlopen(f"{base}/health", timeout=1):
                    break
            except OSError:
                continue
        else:
            raise AssertionError("server never became healthy")
        with urllib.request.urlopen(f"{base}/report", timeout=60) as response:
            http_body = response.read().decode("utf-8")
    finally:
        proc.terminate()
        proc.wait(timeout=10)

    assert main(["report", "--project", str(fixture_project), "--format", "json"]) == 0
    cli_body = capsys.readouterr().out
    assert http_body == cli_body
    _ok(10, "HTTP report equals CLI report byte-for-byte")
