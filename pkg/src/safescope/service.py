"""HTTP/JSON API over one loaded project, backing the review UI.

Single-project service: one spec per instance, matching the one-subsystem-
per-expert workflow. Reads are side-effect-free and work on immutable state
snapshots; writes go through one mutation lock and an optimistic-concurrency
check against the revision token, so a stale client gets 409 and no side
effects. The report served here is byte-identical to the CLI's JSON report
for the same revision.
"""

from __future__ import annotations

import threading
from typing import Any

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .errors import SchemaViolation, InvalidStageOrder, TypeMismatch, UnknownQuestion
from .funnel import run_funnel, stages_from_json
from .heuristics import ClassificationTag, answer_from_dict
from .model import WarningLamp
from .project import ProjectStore, StaleRevision
from .report import analyze, funnel_to_dict, render_json

PAGE_SIZE = 50


def create_app(store: ProjectStore, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="safescope", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    write_lock = threading.Lock()

    def error(status: int, message: str, **extra: Any) -> JSONResponse:
        return JSONResponse(status_code=status, content={"error": message, **extra})

    @app.get("/api/v1/health")
    def health() -> dict[str, Any]:
        return {"status": "ok", "revision": store.revision}

    @app.get("/api/v1/monitors")
    def monitors(tag: str = "", lamp: str = "", page: int = 1) -> Response:
        state = store.state
        tag_filter: ClassificationTag | None = None
        if tag:
            try:
                tag_filter = ClassificationTag(tag)
            except ValueError:
                return error(400, f"unknown tag {tag!r}")
        lamp_filter: WarningLamp | None = None
        if lamp:
            try:
                lamp_filter = WarningLamp(lamp.upper())
            except ValueError:
                return error(400, f"unknown lamp {lamp!r}")
        if page < 1:
            return error(400, "page must be >= 1")

        selected = []
        for m in sorted(state.spec.monitors, key=lambda m: m.id):
            tags = state.tags(m.id)
            if tag_filter is not None and tag_filter not in tags:
                continue
            if lamp_filter is not None and m.lamp is not lamp_filter:
                continue
            selected.append(
                {
                    "id": m.id,
                    "description": m.description,
                    "lamp": m.lamp.value,
                    "location": m.location,
                    "part_id": m.part_id,
                    "dtc_codes": list(m.dtc_codes),
                    "affected_functions": list(m.affected_functions),
                    "tags": sorted(t.value for t in tags),
                }
            )
        start = (page - 1) * PAGE_SIZE
        return JSONResponse(
            {
                "monitors": selected[start : start + PAGE_SIZE],
                "total": len(selected),
                "page": page,
                "page_size": PAGE_SIZE,
                "revision": state.revision,
            }
        )

    @app.get("/api/v1/questions")
    def questions(status: str = "pending") -> Response:
        if status not in ("pending", "all"):
            return error(400, f"unknown status {status!r}")
        state = store.state
        monitors_by_id = {m.id: m for m in state.spec.monitors}
        items = []
        for q in state.questions:
            answered = q.id in state.answers
            if status == "pending" and answered:
                continue
            target_monitor = monitors_by_id.get(q.target)
            items.append(
                {
                    "id": q.id,
                    "step": q.step.value,
                    "target": q.target,
                    "target_description": (
                        target_monitor.description if target_monitor else q.target
                    ),
                    "prompt": q.prompt,
                    "answer_kind": q.answer_kind.value,
                    "answered": answered,
                }
            )
        return JSONResponse(
            {"questions": items, "total": len(items), "revision": state.revision}
        )

    @app.post("/api/v1/answers")
    async def post_answer(request: Request) -> Response:
        try:
            body = await request.json()
        except Exception:
            return error(400, "body is not valid JSON")
        if not isinstance(body, dict) or "answer" not in body or "revision" not in body:
            return error(400, "body must be {answer, revision}")
        if not isinstance(body["revision"], int):
            return error(400, "revision must be an integer")
        try:
            answer = answer_from_dict(body["answer"])
        except TypeMismatch as exc:
            return error(422, str(exc))
        except (KeyError, ValueError, TypeError) as exc:
            return error(400, f"answer does not match the schema: {exc}")

        with write_lock:
            try:
                new_revision = store.append_answer(
                    answer, expected_revision=body["revision"]
                )
            except StaleRevision as exc:
                return error(409, str(exc), current_revision=exc.current)
            except UnknownQuestion as exc:
                return error(404, str(exc))
            except TypeMismatch as exc:
                return error(422, str(exc))
        return JSONResponse({"new_revision": new_revision})

    @app.get("/api/v1/funnel")
    def funnel(stages: str = "") -> Response:
        state = store.state
        stage_config = store.stages
        if stages:
            try:
                stage_config = stages_from_json(stages)
            except (SchemaViolation, InvalidStageOrder) as exc:
                return error(400, f"bad stage configuration: {exc}")
        funnel_report = run_funnel(state, stage_config)
        return JSONResponse(funnel_to_dict(funnel_report))

    @app.get("/api/v1/report")
    def report() -> Response:
        state = store.state
        subsystem_report = analyze(
            state, stages=store.stages, field_records=store.field_records
        )
        return Response(content=render_json(subsystem_report), media_type="application/json")

    if ui_dir:
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
