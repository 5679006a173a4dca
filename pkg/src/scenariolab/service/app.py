"""HTTP layer for the operator survey.

Endpoints (all JSON):
    POST /sessions                    {"role": "stakeholder|volunteer|victim"}
    GET  /sessions/{id}/next
    POST /sessions/{id}/action        {"action": <native action id>}
    POST /sessions/{id}/finish
    GET  /reports/comparison[?role=]
Payload images, when present, are served from /static.
"""
from __future__ import annotations

from pathlib import Path
from typing import Literal

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from ..env import RewardSpec
from ..judgement import JudgementPool
from .sessions import SessionError, SessionManager
from .store import EventLog

API_VERSION = "1"


class CreateSessionRequest(BaseModel):
    role: Literal["stakeholder", "volunteer", "victim"]


class ActionRequest(BaseModel):
    action: int


def create_app(
    pool: JudgementPool,
    store_dir,
    rl_baseline: dict | None = None,
    static_dir=None,
    reward_spec: RewardSpec = RewardSpec(),
    seed: int = 0,
) -> FastAPI:
    store = EventLog(store_dir)
    manager = SessionManager(pool, store, reward_spec=reward_spec,
                             rl_baseline=rl_baseline, seed=seed)
    app = FastAPI(title="scenariolab operator survey", version=API_VERSION)
    app.state.manager = manager
    # the survey UI may be hosted on a different origin than the API
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    def guard(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except SessionError as exc:
            raise HTTPException(status_code=exc.status, detail=exc.message)

    @app.post("/sessions")
    def create_session(req: CreateSessionRequest):
        session_id = guard(manager.create_session, req.role)
        return {"session_id": session_id, "api_version": API_VERSION}

    @app.get("/sessions/{session_id}/next")
    def next_item(session_id: str):
        return guard(manager.next_item, session_id)

    @app.post("/sessions/{session_id}/action")
    def submit_action(session_id: str, req: ActionRequest):
        return guard(manager.submit_action, session_id, req.action)

    @app.post("/sessions/{session_id}/finish")
    def finish_session(session_id: str):
        return guard(manager.finish_session, session_id)

    @app.get("/reports/comparison")
    def comparison_report(role: str | None = None):
        return guard(manager.comparison_report, role)

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/static", StaticFiles(directory=str(static_dir)), name="static")

    return app
