"""Command-line entry point for batch triage workflows and the review service.

Exit code convention: 0 success, 1 domain finding or error, 2 environment or
parse error. `SAFESCOPE_NO_COLOR` disables ANSI colors.
"""

from __future__ import annotations

import argparse
import json
import os
import socket
import sys
from pathlib import Path

from .errors import ParseError, SafescopeError
from .funnel import DEFAULT_STAGES, run_funnel, stages_to_json
from .heuristics import load_journal
from .model import validate
from .project import ProjectError, load_project
from .propagation import build_graph, to_dot
from .report import analyze, funnel_to_dict, render
from .requirements import (
    frequencies_to_csv,
    requirements_to_json,
    requirements_to_markdown,
)


def _color_enabled() -> bool:
    return os.environ.get("SAFESCOPE_NO_COLOR") is None and sys.stdout.isatty()


def _paint(text: str, code: str) -> str:
    if _color_enabled():
        return f"\x1b[{code}m{text}\x1b[0m"
    return text


def _green(text: str) -> str:
    return _paint(text, "32")


def _red(text: str) -> str:
    return _paint(text, "31")


def cmd_validate(args: argparse.Namespace) -> int:
    store = load_project(args.project)
    report = validate(store.spec, store.platform)
    if report.is_empty:
        print(_green("OK") + f": spec and platform are cross-consistent "
              f"({len(store.spec.monitors)} monitors, {len(store.spec.dtcs)} DTCs)")
        return 0
    for finding in report.findings:
        print(_red(finding.kind) + f" {finding.monitor_id}: {finding.detail}")
    counts = ", ".join(f"{k}={v}" for k, v in sorted(report.counts.items()))
    print(f"{len(report.findings)} findings ({counts})")
    return 1


def cmd_questions(args: argparse.Namespace) -> int:
    store = load_project(args.project)
    items = [
        {
            "id": q.id,
            "step": q.step.value,
            "target": q.target,
            "prompt": q.prompt,
            "answer_kind": q.answer_kind.value,
            "answered": q.id in store.state.answers,
        }
        for q in store.state.questions
    ]
    text = json.dumps(items, indent=2) + "\n"
    _emit(text, args.out, "questions.json")
    return 0


def cmd_answer(args: argparse.Namespace) -> int:
    store = load_project(args.project)
    answers = load_journal(Path(args.file).read_text(encoding="utf-8"))
    # Validate everything up front so a bad file does not half-apply.
    from .heuristics import validate_answer_value
    from .errors import UnknownQuestion

    for answer in answers:
        question = store.state.question(answer.question_id)
        if question is None:
            raise UnknownQuestion(answer.question_id)
        validate_answer_value(question.answer_kind, answer.value, answer.question_id)
    for answer in answers:
        store.append_answer(answer)
    print(f"applied {len(answers)} answers, revision now {store.revision}")
    return 0


def cmd_funnel(args: argparse.Namespace) -> int:
    if args.print_default_stages:
        sys.stdout.write(stages_to_json(DEFAULT_STAGES))
        return 0
    if args.project is None:
        print("error: --project is required (or use --print-default-stages)", file=sys.stderr)
        return 2
    store = load_project(args.project)
    stages = store.stages
    if args.stages:
        from .funnel import stages_from_json

        stages = stages_from_json(Path(args.stages).read_text(encoding="utf-8"))
    funnel_report = run_funnel(store.state, stages)
    text = json.dumps(funnel_to_dict(funnel_report), indent=2, sort_keys=True) + "\n"
    _emit(text, args.out, "funnel.json")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    store = load_project(args.project)
    stages = store.stages
    if args.stages:
        from .funnel import stages_from_json

        stages = stages_from_json(Path(args.stages).read_text(encoding="utf-8"))
    subsystem_report = analyze(
        store.state, stages=stages, field_records=store.field_records
    )
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.json").write_text(render(subsystem_report, "json"), encoding="utf-8")
        (out_dir / "report.md").write_text(render(subsystem_report, "markdown"), encoding="utf-8")
        (out_dir / "requirements.json").write_text(
            requirements_to_json(subsystem_report.requirements), encoding="utf-8"
        )
        (out_dir / "requirements.md").write_text(
            requirements_to_markdown(subsystem_report.requirements), encoding="utf-8"
        )
        (out_dir / "frequencies.csv").write_text(
            frequencies_to_csv(subsystem_report.frequencies), encoding="utf-8"
        )
        print(f"report written to {out_dir}")
    else:
        sys.stdout.write(render(subsystem_report, args.format))
    return 0


def cmd_propagation(args: argparse.Namespace) -> int:
    store = load_project(args.project)
    graph = build_graph(store.platform)
    if args.dot:
        sys.stdout.write(to_dot(graph))
    else:
        print(f"{len(graph.nodes)} subsystems, {len(graph.function_edges)} function edges, "
              f"{len(graph.fallback_edges)} fallback edges (use --dot for DOT output)")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    store = load_project(args.project)
    try:
        probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((args.host, args.port))
        probe.close()
    except OSError as exc:
        print(f"error: cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return 2
    app = create_app(store, ui_dir=args.ui_dir)
    print(f"serving project {store.root} on http://{args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _emit(text: str, out: str | None, default_name: str) -> None:
    if out:
        out_path = Path(out)
        if out_path.is_dir() or not out_path.suffix:
            out_path.mkdir(parents=True, exist_ok=True)
            out_path = out_path / default_name
        out_path.write_text(text, encoding="utf-8")
        print(f"written to {out_path}")
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="safescope",
        description="Diagnostic-specification triage for functional-safety concept work",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_project(p: argparse.ArgumentParser, required: bool = True) -> None:
        p.add_argument("--project", required=required, default=None,
                       help="project directory (spec.csv, platform.json, ...)")

    p = sub.add_parser("validate", help="cross-check spec against platform")
    add_project(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("questions", help="dump the generated questionnaire")
    add_project(p)
    p.add_argument("--out", help="write to this file or directory instead of stdout")
    p.set_defaults(func=cmd_questions)

    p = sub.add_parser("answer", help="apply a JSONL answer file to the journal")
    add_project(p)
    p.add_argument("file", help="JSON-lines answer file")
    p.set_defaults(func=cmd_answer)

    p = sub.add_parser("funnel", help="run the reduction funnel")
    add_project(p, required=False)
    p.add_argument("--stages", help="stage configuration JSON file")
    p.add_argument("--out", help="write to this file or directory instead of stdout")
    p.add_argument("--print-default-stages", action="store_true",
                   help="print the default stage configuration and exit")
    p.set_defaults(func=cmd_funnel)

    p = sub.add_parser("report", help="build the subsystem report")
    add_project(p)
    p.add_argument("--format", choices=["json", "markdown"], default="json")
    p.add_argument("--stages", help="stage configuration JSON file")
    p.add_argument("--out", help="write report bundle into this directory")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("propagation", help="platform dependency graph tools")
    add_project(p)
    p.add_argument("--dot", action="store_true", help="print the graph in DOT format")
    p.set_defaults(func=cmd_propagation)

    p = sub.add_parser("serve", help="serve the HTTP API for the review UI")
    add_project(p)
    p.add_argument("--port", type=int, default=8571)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui-dir", help="also serve this directory as the web UI root")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 0
    except (ParseError, ProjectError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SafescopeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
