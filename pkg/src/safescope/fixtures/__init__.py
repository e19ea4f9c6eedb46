"""Bundled synthetic EBS fixture: spec, platform, field data and a complete
answer journal. `python -m safescope.fixtures DIR` exports it as a ready-to-use
project directory."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

SPEC = "ebs_synthetic.csv"
PLATFORM = "ebs_platform.json"
FIELD_DATA = "ebs_field_data.csv"
ANSWERS = "ebs_answers.jsonl"

# Fixture file -> name the CLI/service expect inside a project directory.
PROJECT_NAMES = {
    SPEC: "spec.csv",
    PLATFORM: "platform.json",
    FIELD_DATA: "field_data.csv",
    ANSWERS: "answers.jsonl",
}


def fixture_text(name: str) -> str:
    return resources.files(__package__).joinpath(name).read_text(encoding="utf-8")


def export_project(dest: str | Path, include_answers: bool = True) -> Path:
    """Copy the fixture into `dest` laid out as a project directory."""
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    for fixture_name, project_name in PROJECT_NAMES.items():
        if fixture_name == ANSWERS and not include_answers:
            continue
        (dest / project_name).write_text(fixture_text(fixture_name), encoding="utf-8")
    return dest
