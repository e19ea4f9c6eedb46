"""Project directory handling: file layout, answer journal, state cache.

A project directory contains `spec.csv` and `platform.json`, plus optional
`answers.jsonl` (append-only expert journal), `field_data.csv` and
`stages.json`. `state.json` is a tool-managed cache rebuilt by replaying the
journal; the journal is the source of truth so expert decisions stay
auditable. Mutations take an advisory file lock; the state revision equals
1 + number of journal entries.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from filelock import FileLock

from .errors import SafescopeError
from .funnel import DEFAULT_STAGES, FunnelStageSpec, stages_from_json
from .heuristics import (
    Answer,
    TriageState,
    answer_to_json,
    apply_answer,
    completeness,
    load_journal,
    new_state,
    replay_journal,
)
from .model import (
    DiagnosticSpec,
    FieldFailureRecord,
    PlatformModel,
    parse_field_data,
    parse_platform,
    parse_spec,
)

SPEC_FILE = "spec.csv"
PLATFORM_FILE = "platform.json"
ANSWERS_FILE = "answers.jsonl"
FIELD_DATA_FILE = "field_data.csv"
STAGES_FILE = "stages.json"
STATE_FILE = "state.json"
LOCK_FILE = ".safescope.lock"

STATE_SCHEMA_VERSION = 1


class StaleRevision(SafescopeError):
    def __init__(self, current: int, got: int):
        super().__init__(f"stale revision {got}, state is at {current}")
        self.current = current
        self.got = got


class ProjectError(SafescopeError):
    """Missing files or unusable project layout."""


@dataclass
class ProjectStore:
    """One loaded project. Mutations are serialized through `append_answer`."""

    root: Path
    state: TriageState
    stages: tuple[FunnelStageSpec, ...]
    field_records: tuple[FieldFailureRecord, ...]
    journal_entries: int

    @property
    def spec(self) -> DiagnosticSpec:
        return self.state.spec

    @property
    def platform(self) -> PlatformModel:
        return self.state.platform

    @property
    def revision(self) -> int:
        return self.state.revision

    def _lock(self) -> FileLock:
        return FileLock(self.root / LOCK_FILE)

    def append_answer(self, answer: Answer, expected_revision: int | None = None) -> int:
        """Apply one answer, append it to the journal and refresh the cache.

        With `expected_revision` set, rejects the mutation (StaleRevision,
        no side effects) unless it matches the current revision.
        """
        with self._lock():
            if expected_revision is not None and expected_revision != self.state.revision:
                raise StaleRevision(current=self.state.revision, got=expected_revision)
            question = self.state.question(answer.question_id)
            new = apply_answer(self.state, answer)  # validates; raises before any I/O
            line = answer_to_json(answer, question.answer_kind)
            with (self.root / ANSWERS_FILE).open("a", encoding="utf-8") as handle:
                handle.write(line + "\n")
            self.state = new
            self.journal_entries += 1
            self._write_state_cache()
            return self.state.revision

    def _write_state_cache(self) -> None:
        done = completeness(self.state)
        payload = {
            "schema_version": STATE_SCHEMA_VERSION,
            "revision": self.state.revision,
            "journal_entries": self.journal_entries,
            "questions_answered": done["answered"],
            "questions_total": done["total"],
        }
        (self.root / STATE_FILE).write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )


def load_project(root: str | Path) -> ProjectStore:
    """Parse the project files and rebuild state by replaying the journal."""
    root = Path(root)
    if not root.is_dir():
        raise ProjectError(f"project directory {root} does not exist")
    spec_path = root / SPEC_FILE
    platform_path = root / PLATFORM_FILE
    if not spec_path.is_file():
        raise ProjectError(f"missing {SPEC_FILE} in {root}")
    if not platform_path.is_file():
        raise ProjectError(f"missing {PLATFORM_FILE} in {root}")

    spec = parse_spec(spec_path.read_text(encoding="utf-8"))
    platform = parse_platform(platform_path.read_text(encoding="utf-8"))
    state = new_state(spec, platform)

    journal_entries = 0
    answers_path = root / ANSWERS_FILE
    if answers_path.is_file():
        answers = load_journal(answers_path.read_text(encoding="utf-8"))
        state = replay_journal(state, answers)
        journal_entries = len(answers)

    stages = DEFAULT_STAGES
    stages_path = root / STAGES_FILE
    if stages_path.is_file():
        stages = stages_from_json(stages_path.read_text(encoding="utf-8"))

    field_records: tuple[FieldFailureRecord, ...] = ()
    field_path = root / FIELD_DATA_FILE
    if field_path.is_file():
        field_records = parse_field_data(field_path.read_text(encoding="utf-8"))

    store = ProjectStore(
        root=root,
        state=state,
        stages=stages,
        field_records=field_records,
        journal_entries=journal_entries,
    )
    store._write_state_cache()
    return store
