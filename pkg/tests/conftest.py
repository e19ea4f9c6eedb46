from __future__ import annotations

import pytest

from safescope.fixtures import ANSWERS, FIELD_DATA, PLATFORM, SPEC, export_project, fixture_text
from safescope.heuristics import load_journal, new_state, replay_journal
from safescope.model import parse_field_data, parse_platform, parse_spec


@pytest.fixture(scope="session")
def ebs_spec():
    return parse_spec(fixture_text(SPEC))


@pytest.fixture(scope="session")
def ebs_platform():
    return parse_platform(fixture_text(PLATFORM))


@pytest.fixture(scope="session")
def ebs_state(ebs_spec, ebs_platform):
    """Fresh triage state for the bundled fixture (no answers)."""
    return new_state(ebs_spec, ebs_platform)


@pytest.fixture(scope="session")
def ebs_journal():
    return load_journal(fixture_text(ANSWERS))


@pytest.fixture(scope="session")
def ebs_full_state(ebs_state, ebs_journal):
    """Fixture state with the complete bundled answer journal applied."""
    return replay_journal(ebs_state, ebs_journal)


@pytest.fixture(scope="session")
def ebs_field_records():
    return parse_field_data(fixture_text(FIELD_DATA))


@pytest.fixture
def fixture_project(tmp_path):
    """Bundled fixture exported as a project directory (with answers)."""
    return export_project(tmp_path / "project")


@pytest.fixture
def fresh_project(tmp_path):
    """Fixture project without the answer journal."""
    return export_project(tmp_path / "fresh", include_answers=False)
