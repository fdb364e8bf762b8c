"""HTTP JSON API over the review store.

Endpoints:
    GET  /tasks?state=&reason=&page=&page_size=
    GET  /tasks/{task_id}
    POST /tasks/{task_id}/claim     {reviewer_tag}
    POST /tasks/{task_id}/decision  {verdict, edited_arabic_fields?, reviewer_tag}
    GET  /stats

All payloads are UTF-8 JSON; Arabic text travels verbatim. Auth is a plain
reviewer_tag carried in request bodies (single-team tool by design).
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from ..errors import (
    AlignmentError,
    AlreadyDecided,
    ClaimHeld,
    DuplicateTask,
    InvalidState,
    MedforgeError,
    UnknownTask,
    UnknownUnit,
)
from .store import ReviewStore

_STATUS_CODES = {
    UnknownTask: 404,
    UnknownUnit: 404,
    AlreadyDecided: 409,
    ClaimHeld: 409,
    DuplicateTask: 409,
    InvalidState: 409,
    AlignmentError: 422,
}


class TaskModel(BaseModel):
    task_id: str
    unit_id: str
    reason: str
    created_at: float
    state: str
    claimed_by: str | None = None
    claim_expires_at: float | None = None
    decision: dict | None = None
    version: int


class TaskPage(BaseModel):
    tasks: list[TaskModel]
    total: int
    page: int
    page_size: int


class UnitView(BaseModel):
    unit_id: str
    status: str
    english_fields: list[list[str]]
    arabic_fields: list[list[str]] | None = None
    score_history: list[dict]
    meta: dict


class TaskDetail(BaseModel):
    task: TaskModel
    unit: UnitView


class ClaimRequest(BaseModel):
    reviewer_tag: str = Field(min_length=1)


class DecisionRequest(BaseModel):
    verdict: str
    reviewer_tag: str = Field(min_length=1)
    edited_arabic_fields: list[list[str]] | None = None


class DecisionResponse(BaseModel):
    task: TaskModel
    unit_status: str


def _raise_http(exc: MedforgeError) -> None:
    status = _STATUS_CODES.get(type(exc), 400)
    raise HTTPException(status_code=status, detail=exc.to_json_obj())


def create_app(store: ReviewStore) -> FastAPI:
    app = FastAPI(title="medforge review service", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store

    @app.get("/tasks", response_model=TaskPage)
    def list_tasks(
        state: str | None = Query(default=None),
        reason: str | None = Query(default=None),
        page: int = Query(default=1, ge=1),
        page_size: int = Query(default=50, ge=1, le=200),
    ) -> TaskPage:
        tasks, total = store.list_tasks(state=state, reason=reason, page=page, page_size=page_size)
        return TaskPage(
            tasks=[TaskModel(**t.to_dict()) for t in tasks],
            total=total,
            page=page,
            page_size=page_size,
        )

    @app.get("/tasks/{task_id}", response_model=TaskDetail)
    def get_task(task_id: str) -> TaskDetail:
        try:
            joined = store.get_task(task_id)
        except MedforgeError as exc:
            _raise_http(exc)
        return TaskDetail(task=TaskModel(**joined["task"]), unit=UnitView(**joined["unit"]))

    @app.post("/tasks/{task_id}/claim", response_model=TaskModel)
    def claim(task_id: str, body: ClaimRequest) -> TaskModel:
        try:
            task = store.claim(task_id, body.reviewer_tag)
        except MedforgeError as exc:
            _raise_http(exc)
        return TaskModel(**task.to_dict())

    @app.post("/tasks/{task_id}/decision", response_model=DecisionResponse)
    def decide(task_id: str, body: DecisionRequest) -> DecisionResponse:
        if body.verdict not in ("approve", "edit", "reject"):
            raise HTTPException(
                status_code=422,
                detail={"error": "bad_verdict", "message": f"unknown verdict {body.verdict!r}"},
            )
        try:
            unit = store.submit_decision(
                task_id,
                verdict=body.verdict,
                reviewer_tag=body.reviewer_tag,
                edited_arabic_fields=body.edited_arabic_fields,
            )
        except MedforgeError as exc:
            _raise_http(exc)
        return DecisionResponse(task=TaskModel(**store.tasks[task_id].to_dict()), unit_status=unit.status)

    @app.get("/stats")
    def stats() -> dict:
        return store.stats()

    return app
