"""ADI requirement derivation and failure-frequency estimation from field data.

Requirement text comes from fixed templates; changing a template is a breaking
change and is pinned by golden-file tests. Frequencies are estimated per DTC:
point rate k/T and the conservative upper bound (k+1)/T, so a zero count never
reports a bare zero rate. The default benchmark rate corresponds to one event
per 50000 hours and is configuration, not semantics.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .errors import FunnelNotRun
from .funnel import FunnelReport
from .heuristics import (
    AnswerKind,
    ClassificationTag,
    DataNeed,
    HeuristicStep,
    TriageState,
    question_id,
)
from .model import FieldFailureRecord, InterfaceDescriptor

DEFAULT_BENCHMARK_RATE_PER_HOUR = 1.0 / 50_000.0


class RequirementKind(Enum):
    DETECTION = "DETECTION"
    INTERFACE = "INTERFACE"
    AVAILABILITY_SIGNAL = "AVAILABILITY_SIGNAL"
    RESIDUAL_HANDLING = "RESIDUAL_HANDLING"


_KIND_PREFIX = {
    RequirementKind.DETECTION: "DET",
    RequirementKind.INTERFACE: "INT",
    RequirementKind.AVAILABILITY_SIGNAL: "AVL",
    RequirementKind.RESIDUAL_HANDLING: "RES",
}

_KIND_ORDER = {kind: i for i, kind in enumerate(RequirementKind)}


@dataclass(frozen=True, slots=True)
class AdiRequirement:
    id: str
    source: str  # monitor id, symmetry-class representative, group key or question id
    kind: RequirementKind
    text: str
    data_need: DataNeed | None = None


@dataclass(frozen=True, slots=True)
class FrequencyEstimate:
    dtc_code: str
    point_rate_per_hour: float
    upper_bound_per_hour: float
    occurrence_count: int
    exposure_hours: float
    exceeds_benchmark: bool


def generate_requirements(
    state: TriageState, funnel_report: FunnelReport
) -> tuple[AdiRequirement, ...]:
    """Derive the ADI requirement list from the triage results.

    One RESIDUAL_HANDLING requirement per residual symmetry class, one
    AVAILABILITY_SIGNAL per vehicle-level function group, one INTERFACE per
    answered interface question, one DETECTION per answered data-need
    question. Deterministic: ordered by kind, then id.
    """
    if funnel_report is None:
        raise FunnelNotRun("run the funnel before generating requirements")

    requirements: list[AdiRequirement] = []
    spec = state.spec

    # Residual handling: failures the subsystem cannot handle internally.
    classes_by_rep = {c.representative: c for c in funnel_report.symmetry_classes}
    for rep_id in funnel_report.residual_ids:
        monitor = spec.monitor(rep_id)
        cls = classes_by_rep.get(rep_id)
        multiplicity = cls.multiplicity if cls else 1
        mult_note = (
            f" (stands for {multiplicity} position-symmetric monitors)"
            if multiplicity > 1
            else ""
        )
        data_need = _answered_data_need(state, rep_id)
        requirements.append(
            AdiRequirement(
                id=f"REQ-RES-{rep_id}",
                source=rep_id,
                kind=RequirementKind.RESIDUAL_HANDLING,
                text=(
                    f"The ADI must handle the failure watched by monitor {rep_id}"
                    f"{mult_note}: {monitor.description}. The subsystem cannot contain "
                    "it internally; the ADI needs the detection data and a safe reaction."
                ),
                data_need=data_need,
            )
        )

    # Availability signals: vehicle-level monitors grouped by affected functions.
    groups: dict[tuple[str, ...], list[str]] = {}
    for m in spec.monitors:
        if ClassificationTag.VEHICLE_LEVEL in state.tags(m.id):
            groups.setdefault(tuple(sorted(m.affected_functions)), []).append(m.id)
    for functions, monitor_ids in sorted(groups.items()):
        group_key = "+".join(functions) if functions else "none"
        requirements.append(
            AdiRequirement(
                id=f"REQ-AVL-{group_key}",
                source=group_key,
                kind=RequirementKind.AVAILABILITY_SIGNAL,
                text=(
                    f"The ADI must receive an availability signal for the function "
                    f"group [{', '.join(functions) or 'unspecified'}]: "
                    f"{len(monitor_ids)} monitors flag external failures that make "
                    "these functions unavailable."
                ),
            )
        )

    # Interfaces: answered driver-input replacement questions.
    for q in state.questions:
        if q.step is not HeuristicStep.S1A:
            continue
        answer = state.answers.get(q.id)
        if answer is None:
            continue
        spec_value = answer.value
        freq = ""
        if isinstance(spec_value, InterfaceDescriptor) and spec_value.signal_frequency_hz:
            freq = f" at {spec_value.signal_frequency_hz:g} Hz"
        kind_text = (
            spec_value.kind.value if isinstance(spec_value, InterfaceDescriptor) else ""
        )
        iface_id = spec_value.id if isinstance(spec_value, InterfaceDescriptor) else ""
        requirements.append(
            AdiRequirement(
                id=f"REQ-INT-{q.id}",
                source=q.id,
                kind=RequirementKind.INTERFACE,
                text=(
                    f"The ADI must provide the electronic interface {iface_id} "
                    f"({kind_text}{freq}) replacing driver input for monitor {q.target}."
                ),
            )
        )

    # Detection: answered data-need questions.
    for q in state.questions:
        if q.step is not HeuristicStep.S5D:
            continue
        answer = state.answers.get(q.id)
        if answer is None or not isinstance(answer.value, DataNeed):
            continue
        requirements.append(
            AdiRequirement(
                id=f"REQ-DET-{q.id}",
                source=q.id,
                kind=RequirementKind.DETECTION,
                text=(
                    f"The ADI must detect the failure watched by monitor {q.target} "
                    f"using {answer.value.data_item} via {answer.value.format.value}."
                ),
                data_need=answer.value,
            )
        )

    requirements.sort(key=lambda r: (_KIND_ORDER[r.kind], r.id))
    return tuple(requirements)


def _answered_data_need(state: TriageState, monitor_id: str) -> DataNeed | None:
    answer = state.answers.get(question_id(HeuristicStep.S5D, monitor_id))
    if answer is not None and isinstance(answer.value, DataNeed):
        return answer.value
    return None


# ---------------------------------------------------------------------------
# field-data frequencies


def estimate_frequency(
    records: Sequence[FieldFailureRecord],
    benchmark_rate_per_hour: float = DEFAULT_BENCHMARK_RATE_PER_HOUR,
) -> tuple[FrequencyEstimate, ...]:
    """Per-DTC failure rates, aggregating duplicate records by summing counts
    and exposures. Ordered by DTC code."""
    totals: dict[str, tuple[int, float]] = {}
    for record in records:
        count, exposure = totals.get(record.dtc_code, (0, 0.0))
        totals[record.dtc_code] = (
            count + record.occurrence_count,
            exposure + record.exposure_hours,
        )

    estimates = []
    for code in sorted(totals):
        count, exposure = totals[code]
        point = count / exposure
        upper = (count + 1) / exposure
        estimates.append(
            FrequencyEstimate(
                dtc_code=code,
                point_rate_per_hour=point,
                upper_bound_per_hour=upper,
                occurrence_count=count,
                exposure_hours=exposure,
                exceeds_benchmark=point > benchmark_rate_per_hour,
            )
        )
    return tuple(estimates)


# ---------------------------------------------------------------------------
# exports


def requirements_to_json(requirements: Iterable[AdiRequirement]) -> str:
    import json

    doc = [
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
        for r in requirements
    ]
    return json.dumps(doc, indent=2) + "\n"


def requirements_to_markdown(requirements: Iterable[AdiRequirement]) -> str:
    lines = [
        "| id | kind | source | text |",
        "| --- | --- | --- | --- |",
    ]
    for r in requirements:
        text = r.text.replace("|", "\\|")
        lines.append(f"| {r.id} | {r.kind.value} | {r.source} | {text} |")
    return "\n".join(lines) + "\n"


def frequencies_to_csv(estimates: Iterable[FrequencyEstimate]) -> str:
    lines = ["dtc_code,point_rate_per_hour,upper_bound_per_hour,exceeds_benchmark"]
    for e in estimates:
        lines.append(
            f"{e.dtc_code},{e.point_rate_per_hour:.12g},{e.upper_bound_per_hour:.12g},"
            f"{'true' if e.exceeds_benchmark else 'false'}"
        )
    return "\n".join(lines) + "\n"
