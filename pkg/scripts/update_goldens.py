#!/usr/bin/env python3
"""Regenerate golden files from the bundled fixture.

Run after an intentional change to report or requirement templates, eyeball
the diff, and commit the result; the golden tests exist to make accidental
template drift loud.
"""

from __future__ import annotations

from pathlib import Path

from safescope.fixtures import ANSWERS, FIELD_DATA, PLATFORM, SPEC, fixture_text
from safescope.heuristics import load_journal, new_state, replay_journal
from safescope.model import parse_field_data, parse_platform, parse_spec
from safescope.report import analyze, render_markdown

GOLDEN_DIR = Path(__file__).resolve().parents[1] / "tests" / "golden"


def main() -> int:
    spec = parse_spec(fixture_text(SPEC))
    platform = parse_platform(fixture_text(PLATFORM))
    state = replay_journal(new_state(spec, platform), load_journal(fixture_text(ANSWERS)))
    report = analyze(state, field_records=parse_field_data(fixture_text(FIELD_DATA)))

    GOLDEN_DIR.mkdir(parents=True, exist_ok=True)
    (GOLDEN_DIR / "report_fixture.md").write_text(render_markdown(report), encoding="utf-8")
    print(f"golden files written to {GOLDEN_DIR}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
