"""Deterministic monitor classification and the expert questionnaire.

The triage method walks ten numbered steps with lettered sub-steps. What a
machine can decide from the data, auto_classify decides (driver-facing parts,
external failure origin, lamp severity, trailer scope, startup checkability).
What needs subsystem expertise becomes a Question addressed to the expert;
answers accumulate in an immutable TriageState whose revision counter doubles
as the optimistic-concurrency token for the service layer.

Yellow-lamp monitors are treated as deferrable: excluded from the in-drive
safety set but kept in the pre-drive check set, on the assumption that the
vehicle refuses automated missions until startup tests have run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Iterable, Mapping

from .errors import TypeMismatch, UnknownQuestion
from .model import (
    DiagnosticSpec,
    FailureOrigin,
    DetectionPhase,
    InterfaceDescriptor,
    InterfaceKind,
    Monitor,
    PlatformModel,
    WarningLamp,
)


class HeuristicStep(Enum):
    """Steps and sub-steps of the triage method, in method order."""

    S1 = "S1"
    S1A = "S1A"
    S1B = "S1B"
    S1C = "S1C"
    S2 = "S2"
    S2A = "S2A"
    S2B = "S2B"
    S2C = "S2C"
    S3 = "S3"
    S4 = "S4"
    S4A = "S4A"
    S4B = "S4B"
    S5 = "S5"
    S5A = "S5A"
    S5B = "S5B"
    S5C = "S5C"
    S5D = "S5D"
    S6 = "S6"
    S6A = "S6A"
    S7 = "S7"
    S8 = "S8"
    S8A = "S8A"
    S8B = "S8B"
    S9 = "S9"
    S10 = "S10"

    @property
    def order(self) -> int:
        return _STEP_ORDER[self]

    def __lt__(self, other: "HeuristicStep") -> bool:
        return self.order < other.order


_STEP_ORDER = {step: i for i, step in enumerate(HeuristicStep)}


class ClassificationTag(Enum):
    DRIVER_INTERFACE = "DRIVER_INTERFACE"
    VEHICLE_LEVEL = "VEHICLE_LEVEL"
    YELLOW_DEFERRABLE = "YELLOW_DEFERRABLE"
    RED_IMMEDIATE = "RED_IMMEDIATE"
    TRAILER_EXCLUDED = "TRAILER_EXCLUDED"
    STARTUP_CHECKABLE = "STARTUP_CHECKABLE"
    NEEDS_ADI_REQUIREMENT = "NEEDS_ADI_REQUIREMENT"


class AnswerKind(Enum):
    TEXT = "TEXT"
    BOOLEAN = "BOOLEAN"
    DURATION_LIMITS = "DURATION_LIMITS"
    INTERFACE_SPEC = "INTERFACE_SPEC"
    DATA_NEED = "DATA_NEED"


class DataFormat(Enum):
    NETWORK_SIGNAL = "NETWORK_SIGNAL"
    ECU_MEMORY = "ECU_MEMORY"
    OTHER = "OTHER"


@dataclass(frozen=True, slots=True)
class DurationLimits:
    min_ms: float
    max_ms: float


@dataclass(frozen=True, slots=True)
class DataNeed:
    data_item: str
    format: DataFormat


AnswerValue = Any  # str | bool | DurationLimits | InterfaceDescriptor | DataNeed


@dataclass(frozen=True, slots=True)
class Question:
    id: str
    step: HeuristicStep
    target: str  # monitor id or subsystem id
    prompt: str
    answer_kind: AnswerKind


@dataclass(frozen=True, slots=True)
class Answer:
    question_id: str
    value: AnswerValue
    author: str
    timestamp: str  # ISO-8601


@dataclass(frozen=True)
class TriageState:
    """Per-project triage snapshot. Mutations go through apply_answer, which
    returns a new state with revision + 1."""

    spec: DiagnosticSpec
    platform: PlatformModel
    classifications: Mapping[str, frozenset[ClassificationTag]]
    questions: tuple[Question, ...]
    answers: Mapping[str, Answer]
    revision: int = 1

    def question(self, question_id: str) -> Question | None:
        return self._question_index.get(question_id)

    @property
    def _question_index(self) -> dict[str, Question]:
        # Built lazily; the dataclass is frozen so use __dict__ as a cache.
        cached = self.__dict__.get("_qindex")
        if cached is None:
            cached = {q.id: q for q in self.questions}
            self.__dict__["_qindex"] = cached
        return cached

    def tags(self, monitor_id: str) -> frozenset[ClassificationTag]:
        return self.classifications.get(monitor_id, frozenset())


def new_state(spec: DiagnosticSpec, platform: PlatformModel) -> TriageState:
    """Fresh triage state: auto classification plus the generated questionnaire."""
    classifications = auto_classify(spec, platform)
    questions = generate_questions(spec, platform, classifications)
    return TriageState(
        spec=spec,
        platform=platform,
        classifications=classifications,
        questions=questions,
        answers={},
        revision=1,
    )


# ---------------------------------------------------------------------------
# classification


def auto_classify(
    spec: DiagnosticSpec, platform: PlatformModel
) -> dict[str, frozenset[ClassificationTag]]:
    """Assign deterministic tags to every monitor. Rules are independent;
    a monitor can carry several tags."""
    subsystem = platform.subsystem(spec.subsystem_id)
    driver_parts = (
        {p.id for p in subsystem.parts if p.driver_interaction} if subsystem else set()
    )

    out: dict[str, frozenset[ClassificationTag]] = {}
    for m in spec.monitors:
        tags: set[ClassificationTag] = set()
        if m.part_id is not None and m.part_id in driver_parts:
            tags.add(ClassificationTag.DRIVER_INTERFACE)
        if m.failure_origin is FailureOrigin.EXTERNAL:
            tags.add(ClassificationTag.VEHICLE_LEVEL)
        if m.lamp is WarningLamp.RED:
            tags.add(ClassificationTag.RED_IMMEDIATE)
        elif m.lamp is WarningLamp.YELLOW:
            tags.add(ClassificationTag.YELLOW_DEFERRABLE)
        if m.trailer_related and not m.affects_tractor:
            tags.add(ClassificationTag.TRAILER_EXCLUDED)
        if m.detection_phase is DetectionPhase.STARTUP:
            tags.add(ClassificationTag.STARTUP_CHECKABLE)
        out[m.id] = frozenset(tags)
    return out


# ---------------------------------------------------------------------------
# questionnaire

_MONITOR_TEMPLATES: tuple[tuple[HeuristicStep, AnswerKind, str], ...] = (
    (
        HeuristicStep.S2A,
        AnswerKind.BOOLEAN,
        "Was the design of monitor {id} ({description}) based on perceived driving feel?",
    ),
    (
        HeuristicStep.S2B,
        AnswerKind.DURATION_LIMITS,
        "State the acceptable bounds for changing the failsafe-transition time of "
        "monitor {id} once no driver is in the loop.",
    ),
    (
        HeuristicStep.S2C,
        AnswerKind.TEXT,
        "Summarize how the failure behind monitor {id} ({description}) can influence "
        "functions at vehicle level.",
    ),
    (
        HeuristicStep.S5A,
        AnswerKind.TEXT,
        "List the information needed to diagnose the failure behind monitor {id}.",
    ),
    (
        HeuristicStep.S5B,
        AnswerKind.TEXT,
        "How would a driver currently notice the failure behind monitor {id} "
        "({description})?",
    ),
    (
        HeuristicStep.S5C,
        AnswerKind.BOOLEAN,
        "Was the criticality of monitor {id} influenced by how easily a driver can "
        "notice the failure?",
    ),
    (
        HeuristicStep.S5D,
        AnswerKind.DATA_NEED,
        "State the data item and its format needed for the ADI to detect the failure "
        "behind monitor {id} instead of the driver.",
    ),
)

_DRIVER_TEMPLATES: tuple[tuple[HeuristicStep, AnswerKind, str], ...] = (
    (
        HeuristicStep.S1A,
        AnswerKind.INTERFACE_SPEC,
        "Monitor {id} guards the driver-facing part {part}. Specify the electronic "
        "interface that would replace the driver-side input for: {description}",
    ),
    (
        HeuristicStep.S1B,
        AnswerKind.TEXT,
        "Are there known issues in providing the input behind monitor {id} "
        "electronically (timing expectations, bus load)?",
    ),
    (
        HeuristicStep.S1C,
        AnswerKind.TEXT,
        "Does electronic control of the input behind monitor {id} improve or reduce "
        "subsystem performance?",
    ),
)

_YELLOW_TEMPLATE = (
    HeuristicStep.S4A,
    AnswerKind.TEXT,
    "Monitor {id} raises a yellow lamp. Is a degraded mode achievable with redundancy "
    "inside the subsystem, and which mode?",
)

_RED_TEMPLATE = (
    HeuristicStep.S4B,
    AnswerKind.TEXT,
    "Monitor {id} raises a red lamp. Name other subsystems able to take over parts of "
    "the affected functions ({functions}).",
)

_SUBSYSTEM_TEMPLATES: tuple[tuple[HeuristicStep, AnswerKind, str], ...] = (
    (
        HeuristicStep.S6,
        AnswerKind.TEXT,
        "List safety checks for {subsystem} that a driver performs today (latent-fault "
        "tests).",
    ),
    (
        HeuristicStep.S6A,
        AnswerKind.TEXT,
        "How can those driver-performed checks for {subsystem} run electronically, and "
        "must they run only at start of a drive cycle or also during it?",
    ),
    (
        HeuristicStep.S8A,
        AnswerKind.TEXT,
        "Which configuration of {subsystem} is most feasible to automate first, and why?",
    ),
    (
        HeuristicStep.S8B,
        AnswerKind.TEXT,
        "What impositions does the chosen {subsystem} configuration place on other "
        "subsystems?",
    ),
)


def question_id(step: HeuristicStep, target: str) -> str:
    return f"{step.value}:{target}"


def generate_questions(
    spec: DiagnosticSpec,
    platform: PlatformModel,
    classifications: Mapping[str, frozenset[ClassificationTag]],
) -> tuple[Question, ...]:
    """Deterministic questionnaire: same inputs, same questions, same order
    (by step, then target id). An empty spec yields no questions."""
    if not spec.monitors:
        return ()

    questions: list[Question] = []

    for m in spec.monitors:
        tags = classifications.get(m.id, frozenset())
        for step, kind, template in _MONITOR_TEMPLATES:
            questions.append(_monitor_question(step, kind, template, m))
        if ClassificationTag.DRIVER_INTERFACE in tags:
            for step, kind, template in _DRIVER_TEMPLATES:
                questions.append(_monitor_question(step, kind, template, m))
        if m.lamp is WarningLamp.YELLOW:
            step, kind, template = _YELLOW_TEMPLATE
            questions.append(_monitor_question(step, kind, template, m))
        if m.lamp is WarningLamp.RED:
            step, kind, template = _RED_TEMPLATE
            questions.append(_monitor_question(step, kind, template, m))

    for step, kind, template in _SUBSYSTEM_TEMPLATES:
        questions.append(
            Question(
                id=question_id(step, spec.subsystem_id),
                step=step,
                target=spec.subsystem_id,
                prompt=template.format(subsystem=spec.subsystem_id),
                answer_kind=kind,
            )
        )

    questions.sort(key=lambda q: (q.step.order, q.target))
    return tuple(questions)


def _monitor_question(
    step: HeuristicStep, kind: AnswerKind, template: str, m: Monitor
) -> Question:
    prompt = template.format(
        id=m.id,
        description=m.description,
        part=m.part_id or "",
        functions=", ".join(m.affected_functions) or "none listed",
    )
    return Question(
        id=question_id(step, m.id), step=step, target=m.id, prompt=prompt, answer_kind=kind
    )


# ---------------------------------------------------------------------------
# answers


def validate_answer_value(kind: AnswerKind, value: AnswerValue, question_id: str) -> None:
    """Raise TypeMismatch unless the value fits the question's answer kind."""

    def fail(got: str) -> None:
        raise TypeMismatch(question_id, kind.value, got)

    if kind is AnswerKind.TEXT:
        if not isinstance(value, str):
            fail(type(value).__name__)
    elif kind is AnswerKind.BOOLEAN:
        if not isinstance(value, bool):
            fail(type(value).__name__)
    elif kind is AnswerKind.DURATION_LIMITS:
        if not isinstance(value, DurationLimits):
            fail(type(value).__name__)
        elif value.min_ms > value.max_ms:
            fail(f"min_ms {value.min_ms} > max_ms {value.max_ms}")
    elif kind is AnswerKind.INTERFACE_SPEC:
        if not isinstance(value, InterfaceDescriptor):
            fail(type(value).__name__)
    elif kind is AnswerKind.DATA_NEED:
        if not isinstance(value, DataNeed):
            fail(type(value).__name__)


def apply_answer(state: TriageState, answer: Answer) -> TriageState:
    """Store an answer (overwriting any prior one to the same question) and
    bump the revision by exactly 1."""
    q = state.question(answer.question_id)
    if q is None:
        raise UnknownQuestion(answer.question_id)
    validate_answer_value(q.answer_kind, answer.value, answer.question_id)
    answers = dict(state.answers)
    answers[answer.question_id] = answer
    return replace(state, answers=answers, revision=state.revision + 1)


def completeness(state: TriageState) -> dict[str, float]:
    """Answered/total/fraction over the generated questionnaire. An empty
    questionnaire is vacuously complete."""
    total = len(state.questions)
    answered = sum(1 for q in state.questions if q.id in state.answers)
    fraction = answered / total if total else 1.0
    return {"answered": answered, "total": total, "fraction": fraction}


def pending_questions(state: TriageState) -> tuple[Question, ...]:
    return tuple(q for q in state.questions if q.id not in state.answers)


# ---------------------------------------------------------------------------
# answer journal (JSON lines, one answer per line)


def answer_to_json(answer: Answer, kind: AnswerKind) -> str:
    return json.dumps(
        {
            "question_id": answer.question_id,
            "kind": kind.value,
            "value": _value_to_json(answer.value),
            "author": answer.author,
            "timestamp": answer.timestamp,
        },
        sort_keys=True,
    )


def _value_to_json(value: AnswerValue) -> Any:
    if isinstance(value, DurationLimits):
        return {"min_ms": value.min_ms, "max_ms": value.max_ms}
    if isinstance(value, InterfaceDescriptor):
        return {
            "id": value.id,
            "kind": value.kind.value,
            "description": value.description,
            "signal_frequency_hz": value.signal_frequency_hz,
            "granularity": value.granularity,
        }
    if isinstance(value, DataNeed):
        return {"data_item": value.data_item, "format": value.format.value}
    return value


def answer_from_json(line: str) -> Answer:
    """Parse one journal line. The declared kind drives value decoding; a kind
    that does not match the question is caught later by apply_answer."""
    return answer_from_dict(json.loads(line))


def answer_from_dict(doc: Mapping[str, Any]) -> Answer:
    kind = AnswerKind(doc["kind"])
    return Answer(
        question_id=doc["question_id"],
        value=_value_from_json(kind, doc["value"], doc["question_id"]),
        author=doc.get("author", ""),
        timestamp=doc.get("timestamp", ""),
    )


def _value_from_json(kind: AnswerKind, raw: Any, qid: str) -> AnswerValue:
    if kind is AnswerKind.DURATION_LIMITS:
        if not isinstance(raw, dict) or not {"min_ms", "max_ms"} <= raw.keys():
            raise TypeMismatch(qid, kind.value, repr(raw))
        return DurationLimits(min_ms=float(raw["min_ms"]), max_ms=float(raw["max_ms"]))
    if kind is AnswerKind.INTERFACE_SPEC:
        if not isinstance(raw, dict) or "id" not in raw or "kind" not in raw:
            raise TypeMismatch(qid, kind.value, repr(raw))
        freq = raw.get("signal_frequency_hz")
        return InterfaceDescriptor(
            id=raw["id"],
            kind=InterfaceKind(raw["kind"]),
            description=raw.get("description", ""),
            signal_frequency_hz=float(freq) if freq is not None else None,
            granularity=raw.get("granularity"),
        )
    if kind is AnswerKind.DATA_NEED:
        if not isinstance(raw, dict) or "data_item" not in raw or "format" not in raw:
            raise TypeMismatch(qid, kind.value, repr(raw))
        return DataNeed(data_item=raw["data_item"], format=DataFormat(raw["format"]))
    return raw


def load_journal(text: str) -> list[Answer]:
    answers = []
    for line in text.splitlines():
        if line.strip():
            answers.append(answer_from_json(line))
    return answers


def replay_journal(state: TriageState, answers: Iterable[Answer]) -> TriageState:
    """Fold a journal into the state. Equivalent to iterated apply_answer
    (same validation, revision +1 per entry) without the per-step copies."""
    new_answers = dict(state.answers)
    count = 0
    for answer in answers:
        q = state.question(answer.question_id)
        if q is None:
            raise UnknownQuestion(answer.question_id)
        validate_answer_value(q.answer_kind, answer.value, answer.question_id)
        new_answers[answer.question_id] = answer
        count += 1
    return replace(state, answers=new_answers, revision=state.revision + count)
