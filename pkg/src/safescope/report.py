"""Subsystem report assembly and rendering.

The report is the deliverable handed to vehicle architects: funnel statistics,
per-monitor findings with propagation traces and expert answers, availability
signals for the ADI, the minimum configuration, derived requirements, failure
frequencies and open questionnaire items.

One internal structure feeds both renderings; JSON is the machine interface
and round-trips losslessly, Markdown is the human digest. Reports contain no
wall-clock timestamps: identical state renders byte-identical output. The
stage configuration used is embedded so a report is reproducible from spec,
configuration and answer journal alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from . import __version__
from .errors import RevisionMismatch
from .funnel import (
    FunnelReport,
    FunnelStageSpec,
    StageOp,
    StageResult,
    StartupSplit,
    SymmetryClass,
)
from .heuristics import (
    ClassificationTag,
    HeuristicStep,
    TriageState,
    completeness,
    _value_to_json,
)
from .propagation import (
    AffectedSubsystem,
    Containment,
    FallbackCandidate,
    MinConfigResult,
    PropagationTrace,
    VariantScore,
)
from .requirements import AdiRequirement, DataNeed, FrequencyEstimate, RequirementKind
from .heuristics import DataFormat

SCHEMA_VERSION = 1


@dataclass(frozen=True, slots=True)
class TracePair:
    detected: PropagationTrace
    undetected: PropagationTrace


@dataclass(frozen=True, slots=True)
class MonitorFinding:
    monitor_id: str
    description: str
    lamp: str
    location: str | None
    tags: tuple[str, ...]
    multiplicity: int
    members: tuple[str, ...]
    answers: tuple[tuple[str, str, Any], ...]  # (step, question_id, json value)
    trace_detected: PropagationTrace
    trace_undetected: PropagationTrace
    fallbacks: tuple[FallbackCandidate, ...]


@dataclass(frozen=True, slots=True)
class AvailabilityGroup:
    functions: tuple[str, ...]
    monitor_ids: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class OpenItem:
    question_id: str
    step: str
    target: str


@dataclass(frozen=True, slots=True)
class ReportHeader:
    subsystem_id: str
    spec_provenance: str
    tool_version: str
    schema_version: int
    revision: int
    completeness: tuple[int, int, float]  # answered, total, fraction


@dataclass(frozen=True, slots=True)
class SubsystemReport:
    header: ReportHeader
    stage_config: tuple[FunnelStageSpec, ...]
    funnel: FunnelReport
    per_monitor_findings: tuple[MonitorFinding, ...]
    exclusions: tuple[tuple[str, tuple[str, ...]], ...]  # (list name, monitor ids)
    availability_signals: tuple[AvailabilityGroup, ...]
    min_config: MinConfigResult
    requirements: tuple[AdiRequirement, ...]
    frequencies: tuple[FrequencyEstimate, ...]
    open_items: tuple[OpenItem, ...]


def build_report(
    state: TriageState,
    funnel_report: FunnelReport,
    stage_config: Sequence[FunnelStageSpec],
    traces: Mapping[str, TracePair],
    min_config_result: MinConfigResult,
    requirements: Sequence[AdiRequirement],
    frequencies: Sequence[FrequencyEstimate],
) -> SubsystemReport:
    """Assemble the report. All inputs must stem from the same state revision."""
    if funnel_report.revision != state.revision:
        raise RevisionMismatch(expected=state.revision, got=funnel_report.revision)

    spec = state.spec
    classes_by_rep = {c.representative: c for c in funnel_report.symmetry_classes}

    findings: list[MonitorFinding] = []
    for rep_id in sorted(funnel_report.residual_ids):
        if rep_id not in traces:
            raise ValueError(f"missing traces for residual monitor {rep_id!r}")
        monitor = spec.monitor(rep_id)
        cls = classes_by_rep.get(rep_id)
        tags = set(state.tags(rep_id)) | {ClassificationTag.NEEDS_ADI_REQUIREMENT}
        answers = []
        for q in state.questions:
            if q.target == rep_id and q.id in state.answers:
                answers.append((q.step.value, q.id, _value_to_json(state.answers[q.id].value)))
        pair = traces[rep_id]
        fallbacks: tuple[FallbackCandidate, ...] = ()
        if ClassificationTag.RED_IMMEDIATE in state.tags(rep_id):
            from .propagation import fallback_candidates

            fallbacks = fallback_candidates(rep_id, state, _graph_of(state))
        findings.append(
            MonitorFinding(
                monitor_id=rep_id,
                description=monitor.description,
                lamp=monitor.lamp.value,
                location=monitor.location,
                tags=tuple(sorted(t.value for t in tags)),
                multiplicity=cls.multiplicity if cls else 1,
                members=cls.members if cls else (rep_id,),
                answers=tuple(answers),
                trace_detected=pair.detected,
                trace_undetected=pair.undetected,
                fallbacks=fallbacks,
            )
        )

    exclusions: list[tuple[str, tuple[str, ...]]] = []
    for stage in funnel_report.stages:
        if stage.op is StageOp.SYMMETRY_REDUCE:
            exclusions.append(("symmetry_folded", stage.excluded_ids))
        elif stage.op is StageOp.SPLIT_STARTUP:
            exclusions.append(("startup_checkable", stage.excluded_ids))
        elif stage.excluded_ids:
            exclusions.append((stage.stage_id, stage.excluded_ids))

    groups: dict[tuple[str, ...], list[str]] = {}
    for m in spec.monitors:
        if ClassificationTag.VEHICLE_LEVEL in state.tags(m.id):
            groups.setdefault(tuple(sorted(m.affected_functions)), []).append(m.id)
    availability = tuple(
        AvailabilityGroup(functions=fns, monitor_ids=tuple(sorted(ids)))
        for fns, ids in sorted(groups.items())
    )

    done = completeness(state)
    open_items = tuple(
        OpenItem(question_id=q.id, step=q.step.value, target=q.target)
        for q in state.questions
        if q.id not in state.answers
    )

    return SubsystemReport(
        header=ReportHeader(
            subsystem_id=spec.subsystem_id,
            spec_provenance=spec.source_meta,
            tool_version=__version__,
            schema_version=SCHEMA_VERSION,
            revision=state.revision,
            completeness=(done["answered"], done["total"], done["fraction"]),
        ),
        stage_config=tuple(stage_config),
        funnel=funnel_report,
        per_monitor_findings=tuple(findings),
        exclusions=tuple(exclusions),
        availability_signals=availability,
        min_config=min_config_result,
        requirements=tuple(requirements),
        frequencies=tuple(frequencies),
        open_items=open_items,
    )


def _graph_of(state: TriageState):
    # Graph construction is cheap and deterministic; rebuilt on demand.
    from .propagation import build_graph

    return build_graph(state.platform)


def analyze(
    state: TriageState,
    stages: Sequence[FunnelStageSpec] | None = None,
    field_records: Sequence = (),
    benchmark_rate_per_hour: float | None = None,
) -> SubsystemReport:
    """Full pipeline: funnel, traces for the residue, minimum configuration,
    requirements, frequencies, report."""
    from .funnel import DEFAULT_STAGES, run_funnel
    from .propagation import build_graph, min_config, trace
    from .requirements import (
        DEFAULT_BENCHMARK_RATE_PER_HOUR,
        estimate_frequency,
        generate_requirements,
    )

    stage_config = tuple(stages) if stages is not None else DEFAULT_STAGES
    funnel_report = run_funnel(state, stage_config)
    graph = build_graph(state.platform)
    traces = {
        rep: TracePair(
            detected=trace(rep, state, detected=True, graph=graph),
            undetected=trace(rep, state, detected=False, graph=graph),
        )
        for rep in funnel_report.residual_ids
    }
    mc = min_config(state.spec.subsystem_id, state, graph)
    reqs = generate_requirements(state, funnel_report)
    rate = (
        benchmark_rate_per_hour
        if benchmark_rate_per_hour is not None
        else DEFAULT_BENCHMARK_RATE_PER_HOUR
    )
    freqs = estimate_frequency(tuple(field_records), rate) if field_records else ()
    return build_report(state, funnel_report, stage_config, traces, mc, reqs, freqs)


# ---------------------------------------------------------------------------
# JSON rendering (lossless)


def _trace_to_dict(t: PropagationTrace) -> dict[str, Any]:
    return {
        "monitor_id": t.monitor_id,
        "detected": t.detected,
        "containment": t.containment.value,
        "affected_subsystems": [
            {"subsystem_id": a.subsystem_id, "via_function": a.via_function, "hops": a.hops}
            for a in t.affected_subsystems
        ],
    }


def _trace_from_dict(doc: dict[str, Any]) -> PropagationTrace:
    return PropagationTrace(
        monitor_id=doc["monitor_id"],
        detected=doc["detected"],
        containment=Containment(doc["containment"]),
        affected_subsystems=tuple(
            AffectedSubsystem(a["subsystem_id"], a["via_function"], a["hops"])
            for a in doc["affected_subsystems"]
        ),
    )


def funnel_to_dict(funnel: FunnelReport) -> dict[str, Any]:
    return {
        "revision": funnel.revision,
        "stages": [
            {
                "stage_id": s.stage_id,
                "name": s.name,
                "op": s.op.value,
                "tags": [t.value for t in s.tags],
                "input_count": s.input_count,
                "output_count": s.output_count,
                "surviving_ids": list(s.surviving_ids),
                "excluded_ids": list(s.excluded_ids),
            }
            for s in funnel.stages
        ],
        "symmetry_classes": [
            {
                "representative": c.representative,
                "members": list(c.members),
                "multiplicity": c.multiplicity,
                "signature": c.signature,
            }
            for c in funnel.symmetry_classes
        ],
        "startup_split": (
            {
                "startup_count": funnel.startup_split.startup_count,
                "residual_count": funnel.startup_split.residual_count,
                "startup_ids": list(funnel.startup_split.startup_ids),
                "residual_ids": list(funnel.startup_split.residual_ids),
            }
            if funnel.startup_split
            else None
        ),
    }


def report_to_dict(report: SubsystemReport) -> dict[str, Any]:
    h = report.header
    return {
        "header": {
            "subsystem_id": h.subsystem_id,
            "spec_provenance": h.spec_provenance,
            "tool_version": h.tool_version,
            "schema_version": h.schema_version,
            "revision": h.revision,
            "completeness": {
                "answered": h.completeness[0],
                "total": h.completeness[1],
                "fraction": h.completeness[2],
            },
        },
        "stage_config": [
            {
                "id": s.id,
                "name": s.name,
                "op": s.op.value,
                "tags": [t.value for t in s.tags],
            }
            for s in report.stage_config
        ],
        "funnel": funnel_to_dict(report.funnel),
        "per_monitor_findings": [
            {
                "monitor_id": f.monitor_id,
                "description": f.description,
                "lamp": f.lamp,
                "location": f.location,
                "tags": list(f.tags),
                "multiplicity": f.multiplicity,
                "members": list(f.members),
                "answers": [
                    {"step": step, "question_id": qid, "value": value}
                    for step, qid, value in f.answers
                ],
                "trace_detected": _trace_to_dict(f.trace_detected),
                "trace_undetected": _trace_to_dict(f.trace_undetected),
                "fallbacks": [
                    {
                        "fallback_provider": c.fallback_provider,
                        "function": c.function,
                        "coverage": c.coverage,
                    }
                    for c in f.fallbacks
                ],
            }
            for f in report.per_monitor_findings
        ],
        "exclusions": [
            {"list": name, "monitor_ids": list(ids)} for name, ids in report.exclusions
        ],
        "availability_signals": [
            {"functions": list(g.functions), "monitor_ids": list(g.monitor_ids)}
            for g in report.availability_signals
        ],
        "min_config": {
            "subsystem_id": report.min_config.subsystem_id,
            "chosen_variant": report.min_config.chosen_variant,
            "external_impact_count": report.min_config.external_impact_count,
            "induced_dependencies": list(report.min_config.induced_dependencies),
            "ranking": [
                {
                    "variant_id": s.variant_id,
                    "external_impact_count": s.external_impact_count,
                    "induced_dependencies": list(s.induced_dependencies),
                }
                for s in report.min_config.ranking
            ],
        },
        "requirements": [
            {
                "id": r.id,
                "source": r.source,
                "kind": r.kind.value,
                "text": r.text,
                "data_need": (
                    {"data_item": r.data_need.data_item, "format": r.data_need.format.value}
                    if r.data_need
                    else None
                ),
            }
            for r in report.requirements
        ],
        "frequencies": [
            {
                "dtc_code": e.dtc_code,
                "point_rate_per_hour": e.point_rate_per_hour,
                "upper_bound_per_hour": e.upper_bound_per_hour,
                "occurrence_count": e.occurrence_count,
                "exposure_hours": e.exposure_hours,
                "exceeds_benchmark": e.exceeds_benchmark,
            }
            for e in report.frequencies
        ],
        "open_items": [
            {"question_id": o.question_id, "step": o.step, "target": o.target}
            for o in report.open_items
        ],
    }


def report_from_dict(doc: dict[str, Any]) -> SubsystemReport:
    h = doc["header"]
    funnel_doc = doc["funnel"]
    split_doc = funnel_doc.get("startup_split")
    mc = doc["min_config"]
    return SubsystemReport(
        header=ReportHeader(
            subsystem_id=h["subsystem_id"],
            spec_provenance=h["spec_provenance"],
            tool_version=h["tool_version"],
            schema_version=h["schema_version"],
            revision=h["revision"],
            completeness=(
                h["completeness"]["answered"],
                h["completeness"]["total"],
                h["completeness"]["fraction"],
            ),
        ),
        stage_config=tuple(
            FunnelStageSpec(
                id=s["id"],
                name=s["name"],
                op=StageOp(s["op"]),
                tags=tuple(ClassificationTag(t) for t in s["tags"]),
            )
            for s in doc["stage_config"]
        ),
        funnel=FunnelReport(
            revision=funnel_doc["revision"],
            stages=tuple(
                StageResult(
                    stage_id=s["stage_id"],
                    name=s["name"],
                    op=StageOp(s["op"]),
                    tags=tuple(ClassificationTag(t) for t in s["tags"]),
                    input_count=s["input_count"],
                    output_count=s["output_count"],
                    surviving_ids=tuple(s["surviving_ids"]),
                    excluded_ids=tuple(s["excluded_ids"]),
                )
                for s in funnel_doc["stages"]
            ),
            symmetry_classes=tuple(
                SymmetryClass(
                    representative=c["representative"],
                    members=tuple(c["members"]),
                    signature=c["signature"],
                )
                for c in funnel_doc["symmetry_classes"]
            ),
            startup_split=(
                StartupSplit(
                    startup_count=split_doc["startup_count"],
                    residual_count=split_doc["residual_count"],
                    startup_ids=tuple(split_doc["startup_ids"]),
                    residual_ids=tuple(split_doc["residual_ids"]),
                )
                if split_doc
                else None
            ),
        ),
        per_monitor_findings=tuple(
            MonitorFinding(
                monitor_id=f["monitor_id"],
                description=f["description"],
                lamp=f["lamp"],
                location=f["location"],
                tags=tuple(f["tags"]),
                multiplicity=f["multiplicity"],
                members=tuple(f["members"]),
                answers=tuple(
                    (a["step"], a["question_id"], a["value"]) for a in f["answers"]
                ),
                trace_detected=_trace_from_dict(f["trace_detected"]),
                trace_undetected=_trace_from_dict(f["trace_undetected"]),
                fallbacks=tuple(
                    FallbackCandidate(
                        fallback_provider=c["fallback_provider"],
                        function=c["function"],
                        coverage=c["coverage"],
                    )
                    for c in f["fallbacks"]
                ),
            )
            for f in doc["per_monitor_findings"]
        ),
        exclusions=tuple(
            (e["list"], tuple(e["monitor_ids"])) for e in doc["exclusions"]
        ),
        availability_signals=tuple(
            AvailabilityGroup(
                functions=tuple(g["functions"]), monitor_ids=tuple(g["monitor_ids"])
            )
            for g in doc["availability_signals"]
        ),
        min_config=MinConfigResult(
            subsystem_id=mc["subsystem_id"],
            chosen_variant=mc["chosen_variant"],
            external_impact_count=mc["external_impact_count"],
            induced_dependencies=tuple(mc["induced_dependencies"]),
            ranking=tuple(
                VariantScore(
                    variant_id=s["variant_id"],
                    external_impact_count=s["external_impact_count"],
                    induced_dependencies=tuple(s["induced_dependencies"]),
                )
                for s in mc["ranking"]
            ),
        ),
        requirements=tuple(
            AdiRequirement(
                id=r["id"],
                source=r["source"],
                kind=RequirementKind(r["kind"]),
                text=r["text"],
                data_need=(
                    DataNeed(
                        data_item=r["data_need"]["data_item"],
                        format=DataFormat(r["data_need"]["format"]),
                    )
                    if r["data_need"]
                    else None
                ),
            )
            for r in doc["requirements"]
        ),
        frequencies=tuple(
            FrequencyEstimate(
                dtc_code=e["dtc_code"],
                point_rate_per_hour=e["point_rate_per_hour"],
                upper_bound_per_hour=e["upper_bound_per_hour"],
                occurrence_count=e["occurrence_count"],
                exposure_hours=e["exposure_hours"],
                exceeds_benchmark=e["exceeds_benchmark"],
            )
            for e in doc["frequencies"]
        ),
        open_items=tuple(
            OpenItem(question_id=o["question_id"], step=o["step"], target=o["target"])
            for o in doc["open_items"]
        ),
    )


def render_json(report: SubsystemReport) -> str:
    return json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n"


def report_from_json(text: str) -> SubsystemReport:
    return report_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Markdown rendering


def render_markdown(report: SubsystemReport) -> str:
    h = report.header
    answered, total, fraction = h.completeness
    out: list[str] = []
    w = out.append

    w(f"# Subsystem report: {h.subsystem_id}")
    w("")
    w("## Header")
    w("")
    w(f"- subsystem: {h.subsystem_id}")
    provenance = h.spec_provenance.replace("\n", " / ") or "(none)"
    w(f"- spec provenance: {provenance}")
    w(f"- tool version: {h.tool_version} (report schema {h.schema_version})")
    w(f"- state revision: {h.revision}")
    w(f"- questionnaire completeness: {answered}/{total} ({fraction:.1%})")
    w("")

    w("## Funnel")
    w("")
    w("| stage | in | out |")
    w("| --- | --- | --- |")
    for s in report.funnel.stages:
        w(f"| {s.stage_id} | {s.input_count} | {s.output_count} |")
    if report.funnel.startup_split:
        split = report.funnel.startup_split
        w("")
        w("| split | count |")
        w("| --- | --- |")
        w(f"| startup | {split.startup_count} |")
        w(f"| residual | {split.residual_count} |")
    w("")

    w("## Per-monitor findings (residual)")
    w("")
    for f in report.per_monitor_findings:
        w(f"### {f.monitor_id}")
        w("")
        w(f"- description: {f.description}")
        w(f"- lamp: {f.lamp}; tags: {', '.join(f.tags)}")
        if f.multiplicity > 1:
            w(f"- symmetry class of {f.multiplicity}: {', '.join(f.members)}")
        w(
            f"- detected: {f.trace_detected.containment.value}; "
            f"undetected: {f.trace_undetected.containment.value}"
            + (
                " reaching "
                + ", ".join(
                    f"{a.subsystem_id} (via {a.via_function}, {a.hops} hop{'s' if a.hops > 1 else ''})"
                    for a in f.trace_undetected.affected_subsystems
                )
                if f.trace_undetected.affected_subsystems
                else ""
            )
        )
        if f.fallbacks:
            w(
                "- fallbacks: "
                + "; ".join(
                    f"{c.fallback_provider} covers {c.function} ({c.coverage:g})"
                    for c in f.fallbacks
                )
            )
        for step, _qid, value in f.answers:
            w(f"- {step}: {_render_value(value)}")
        w("")

    w("## Exclusions")
    w("")
    w("| list | monitors |")
    w("| --- | --- |")
    for name, ids in report.exclusions:
        w(f"| {name} | {len(ids)} |")
    w("")

    w("## Availability signals to the ADI")
    w("")
    w("| functions | monitors |")
    w("| --- | --- |")
    for g in report.availability_signals:
        w(f"| {', '.join(g.functions) or '(unspecified)'} | {len(g.monitor_ids)} |")
    w("")

    w("## Minimum configuration")
    w("")
    mc = report.min_config
    w(f"- chosen variant: **{mc.chosen_variant}** for {mc.subsystem_id}")
    w(f"- external impact count: {mc.external_impact_count}")
    w(f"- induced dependencies: {', '.join(mc.induced_dependencies) or '(none)'}")
    w("")
    w("| variant | external impact | induced dependencies |")
    w("| --- | --- | --- |")
    for s in mc.ranking:
        w(
            f"| {s.variant_id} | {s.external_impact_count} | "
            f"{', '.join(s.induced_dependencies) or '(none)'} |"
        )
    w("")

    w("## ADI requirements")
    w("")
    w("| id | kind | source | text |")
    w("| --- | --- | --- | --- |")
    for r in report.requirements:
        w(f"| {r.id} | {r.kind.value} | {r.source} | {r.text.replace('|', chr(92) + '|')} |")
    w("")

    w("## Failure frequencies")
    w("")
    if report.frequencies:
        w("| dtc | point rate (1/h) | upper bound (1/h) | exceeds benchmark |")
        w("| --- | --- | --- | --- |")
        for e in report.frequencies:
            w(
                f"| {e.dtc_code} | {e.point_rate_per_hour:.3e} | "
                f"{e.upper_bound_per_hour:.3e} | {'yes' if e.exceeds_benchmark else 'no'} |"
            )
    else:
        w("No field data supplied.")
    w("")

    w("## Open items")
    w("")
    if report.open_items:
        for o in report.open_items:
            w(f"- {o.question_id} ({o.step} on {o.target})")
    else:
        w("All questions answered.")
    w("")

    return "\n".join(out)


def _render_value(value: Any) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, dict):
        return "; ".join(f"{k}={v}" for k, v in value.items() if v is not None)
    return str(value)


def render(report: SubsystemReport, fmt: str) -> str:
    """Render to `json` or `markdown`."""
    if fmt == "json":
        return render_json(report)
    if fmt == "markdown":
        return render_markdown(report)
    raise ValueError(f"unknown format {fmt!r}")
