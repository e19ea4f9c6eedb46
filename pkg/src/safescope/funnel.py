"""Staged reduction of the monitor population to the safety-relevant residue.

The default pipeline mirrors the triage narrative: drop external-origin
(vehicle-level) monitors, drop deferrable/trailer/driver-interface monitors,
fold wheel symmetry, then split what is checkable at startup from the residue
that needs new handling. Stage order is explicit configuration because the
per-stage counts depend on it; the final residual set does not.

Monitors excluded by the vehicle-level stage are not discarded: the report
turns them into the availability information the ADI must receive.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .errors import InvalidStageOrder, SchemaViolation
from .heuristics import ClassificationTag, TriageState
from .model import Monitor

# Placeholder substituted for wheel/axle tokens when building symmetry keys.
POSITION_PLACEHOLDER = "⟨POS⟩"

_POSITION_TOKEN_RE = re.compile(r"(?<![A-Za-z0-9])(?:F|R)[1-9]?(?:L|R)(?![A-Za-z0-9])")


class StageOp(Enum):
    EXCLUDE_TAG = "exclude_tag"
    INCLUDE_TAG = "include_tag"
    SYMMETRY_REDUCE = "symmetry_reduce"
    SPLIT_STARTUP = "split_startup"


@dataclass(frozen=True, slots=True)
class FunnelStageSpec:
    id: str
    name: str
    op: StageOp
    tags: tuple[ClassificationTag, ...] = ()


@dataclass(frozen=True, slots=True)
class SymmetryClass:
    """Monitors identical up to wheel/axle position."""

    representative: str
    members: tuple[str, ...]
    signature: str

    @property
    def multiplicity(self) -> int:
        return len(self.members)


@dataclass(frozen=True, slots=True)
class StageResult:
    stage_id: str
    name: str
    op: StageOp
    tags: tuple[ClassificationTag, ...]
    input_count: int
    output_count: int
    surviving_ids: tuple[str, ...]
    excluded_ids: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class StartupSplit:
    startup_count: int
    residual_count: int
    startup_ids: tuple[str, ...]
    residual_ids: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class FunnelReport:
    revision: int
    stages: tuple[StageResult, ...]
    symmetry_classes: tuple[SymmetryClass, ...]
    startup_split: StartupSplit | None

    @property
    def residual_ids(self) -> tuple[str, ...]:
        if self.startup_split is not None:
            return self.startup_split.residual_ids
        if self.stages:
            return self.stages[-1].surviving_ids
        return ()

    def stage(self, stage_id: str) -> StageResult:
        for s in self.stages:
            if s.stage_id == stage_id:
                return s
        raise KeyError(stage_id)


DEFAULT_STAGES: tuple[FunnelStageSpec, ...] = (
    FunnelStageSpec(
        id="exclude_vehicle_level",
        name="Exclude vehicle-level (external-origin) monitors",
        op=StageOp.EXCLUDE_TAG,
        tags=(ClassificationTag.VEHICLE_LEVEL,),
    ),
    FunnelStageSpec(
        id="exclude_deferred",
        name="Exclude deferrable, trailer-only and driver-interface monitors",
        op=StageOp.EXCLUDE_TAG,
        tags=(
            ClassificationTag.YELLOW_DEFERRABLE,
            ClassificationTag.TRAILER_EXCLUDED,
            ClassificationTag.DRIVER_INTERFACE,
        ),
    ),
    FunnelStageSpec(
        id="symmetry",
        name="Fold repetition of monitors per wheel/axle position",
        op=StageOp.SYMMETRY_REDUCE,
    ),
    FunnelStageSpec(
        id="startup_split",
        name="Split startup-checkable classes from the residue",
        op=StageOp.SPLIT_STARTUP,
    ),
)


# ---------------------------------------------------------------------------
# symmetry


def _normalize_positions(text: str) -> str:
    return _POSITION_TOKEN_RE.sub(POSITION_PLACEHOLDER, text)


def signature_of(monitor: Monitor) -> str:
    """Equality key: every monitor field with `location` erased and position
    tokens in id/description/trigger_condition normalized out."""
    return json.dumps(
        [
            _normalize_positions(monitor.id),
            _normalize_positions(monitor.description),
            _normalize_positions(monitor.trigger_condition),
            monitor.healing_condition,
            monitor.system_reaction,
            list(monitor.dtc_codes),
            monitor.lamp.value,
            list(monitor.affected_functions),
            monitor.part_id,
            monitor.failure_origin.value,
            monitor.trailer_related,
            monitor.affects_tractor,
            monitor.detection_phase.value,
        ],
        ensure_ascii=False,
    )


def symmetry_reduce(monitors: Sequence[Monitor]) -> tuple[SymmetryClass, ...]:
    """Group monitors by signature. Classes partition the input; the sum of
    multiplicities equals the input size; output ordered by representative id."""
    groups: dict[str, list[str]] = {}
    for m in monitors:
        groups.setdefault(signature_of(m), []).append(m.id)
    classes = [
        SymmetryClass(
            representative=min(ids), members=tuple(sorted(ids)), signature=signature
        )
        for signature, ids in groups.items()
    ]
    classes.sort(key=lambda c: c.representative)
    return tuple(classes)


# ---------------------------------------------------------------------------
# funnel execution


def check_stages(stages: Sequence[FunnelStageSpec]) -> None:
    ops = [s.op for s in stages]
    if ops.count(StageOp.SYMMETRY_REDUCE) > 1:
        raise InvalidStageOrder("symmetry_reduce may appear at most once")
    if ops.count(StageOp.SPLIT_STARTUP) > 1:
        raise InvalidStageOrder("split_startup may appear at most once")
    if StageOp.SPLIT_STARTUP in ops and ops[-1] is not StageOp.SPLIT_STARTUP:
        raise InvalidStageOrder("split_startup must be the last stage")
    seen: set[str] = set()
    for s in stages:
        if s.id in seen:
            raise InvalidStageOrder(f"duplicate stage id {s.id!r}")
        seen.add(s.id)


def run_funnel(
    state: TriageState, stages: Sequence[FunnelStageSpec] | None = None
) -> FunnelReport:
    """Apply the stages in order to the spec's monitor set."""
    if stages is None:
        stages = DEFAULT_STAGES
    check_stages(stages)

    current: list[Monitor] = list(state.spec.monitors)
    results: list[StageResult] = []
    classes: tuple[SymmetryClass, ...] = ()
    split: StartupSplit | None = None

    for stage in stages:
        input_count = len(current)
        excluded: list[Monitor] = []

        if stage.op is StageOp.EXCLUDE_TAG:
            wanted = set(stage.tags)
            kept = [m for m in current if not (wanted & state.tags(m.id))]
            excluded = [m for m in current if wanted & state.tags(m.id)]
            current = kept
        elif stage.op is StageOp.INCLUDE_TAG:
            wanted = set(stage.tags)
            kept = [m for m in current if wanted & state.tags(m.id)]
            excluded = [m for m in current if not (wanted & state.tags(m.id))]
            current = kept
        elif stage.op is StageOp.SYMMETRY_REDUCE:
            classes = symmetry_reduce(current)
            by_id = {m.id: m for m in current}
            excluded = [
                by_id[member]
                for c in classes
                for member in c.members
                if member != c.representative
            ]
            current = [by_id[c.representative] for c in classes]
        elif stage.op is StageOp.SPLIT_STARTUP:
            startup = [
                m for m in current if ClassificationTag.STARTUP_CHECKABLE in state.tags(m.id)
            ]
            residual = [
                m
                for m in current
                if ClassificationTag.STARTUP_CHECKABLE not in state.tags(m.id)
            ]
            split = StartupSplit(
                startup_count=len(startup),
                residual_count=len(residual),
                startup_ids=tuple(sorted(m.id for m in startup)),
                residual_ids=tuple(sorted(m.id for m in residual)),
            )
            excluded = startup
            current = residual

        results.append(
            StageResult(
                stage_id=stage.id,
                name=stage.name,
                op=stage.op,
                tags=stage.tags,
                input_count=input_count,
                output_count=len(current),
                surviving_ids=tuple(sorted(m.id for m in current)),
                excluded_ids=tuple(sorted(m.id for m in excluded)),
            )
        )

    return FunnelReport(
        revision=state.revision,
        stages=tuple(results),
        symmetry_classes=classes,
        startup_split=split,
    )


# ---------------------------------------------------------------------------
# stage configuration JSON


def stages_to_json(stages: Iterable[FunnelStageSpec]) -> str:
    doc = []
    for s in stages:
        entry: dict[str, object] = {"id": s.id, "name": s.name, "op": s.op.value}
        if s.tags:
            entry["tags"] = [t.value for t in s.tags]
        doc.append(entry)
    return json.dumps(doc, indent=2) + "\n"


def stages_from_json(text: str) -> tuple[FunnelStageSpec, ...]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation("/", f"not valid JSON: {exc}") from exc
    if not isinstance(doc, list):
        raise SchemaViolation("/", "expected array of stage objects")
    stages: list[FunnelStageSpec] = []
    for i, raw in enumerate(doc):
        path = f"/{i}"
        if not isinstance(raw, dict):
            raise SchemaViolation(path, "expected object")
        for key in raw:
            if key not in {"id", "name", "op", "tags"}:
                raise SchemaViolation(f"{path}/{key}", "unknown key")
        try:
            op = StageOp(raw.get("op"))
        except ValueError:
            raise SchemaViolation(f"{path}/op", f"unknown op {raw.get('op')!r}") from None
        tags: list[ClassificationTag] = []
        for j, tag_text in enumerate(raw.get("tags", [])):
            try:
                tags.append(ClassificationTag(tag_text))
            except ValueError:
                raise SchemaViolation(f"{path}/tags/{j}", f"unknown tag {tag_text!r}") from None
        if op in (StageOp.EXCLUDE_TAG, StageOp.INCLUDE_TAG) and not tags:
            raise SchemaViolation(f"{path}/tags", f"{op.value} requires at least one tag")
        stage_id = raw.get("id")
        if not isinstance(stage_id, str) or not stage_id:
            raise SchemaViolation(f"{path}/id", "expected non-empty string")
        stages.append(
            FunnelStageSpec(
                id=stage_id,
                name=raw.get("name", stage_id),
                op=op,
                tags=tuple(tags),
            )
        )
    check_stages(stages)
    return tuple(stages)
