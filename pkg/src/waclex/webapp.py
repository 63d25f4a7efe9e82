"""HTTP layer for the teaching service: JSON request/response bodies.

Endpoints (all JSON):
    POST /sessions                      {seed?, preset?, objects_per_scene?}
    GET  /sessions/{sid}/scene
    POST /sessions/{sid}/preview        {tokens: [...]}
    POST /sessions/{sid}/teach          {tokens: [...], gold_object_id, frame_seed?}
    POST /sessions/{sid}/next-scene
    GET  /sessions/{sid}/lexicon
    GET  /sessions/{sid}/log

Unknown sessions map to 404, validation problems to 422, anything else to 500.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .errors import DimensionError, UnknownSessionError, ValidationError, WaclexError
from .service import TeachingService


class CreateSessionBody(BaseModel):
    seed: int | None = None
    preset: str | None = None
    objects_per_scene: int | None = None


class PreviewBody(BaseModel):
    tokens: list[str]


class TeachBody(BaseModel):
    tokens: list[str]
    gold_object_id: str
    frame_seed: int | None = None


def create_app(service: TeachingService | None = None) -> FastAPI:
    service = service if service is not None else TeachingService()
    app = FastAPI(title="waclex teaching service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.service = service

    def _session(session_id: str):
        try:
            return service.session(session_id)
        except UnknownSessionError:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")

    def _run(fn):
        try:
            return fn()
        except (ValidationError, DimensionError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except WaclexError as exc:
            raise HTTPException(status_code=500, detail=str(exc))

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        def go():
            session = service.create_session(
                seed=body.seed,
                preset=body.preset,
                objects_per_scene=body.objects_per_scene,
            )
            payload = session.scene_payload()
            payload["session_id"] = session.session_id
            return payload

        return _run(go)

    @app.get("/sessions/{session_id}/scene")
    def get_scene(session_id: str):
        session = _session(session_id)
        return _run(session.scene_payload)

    @app.post("/sessions/{session_id}/preview")
    def preview(session_id: str, body: PreviewBody):
        session = _session(session_id)
        return _run(lambda: session.preview(body.tokens))

    @app.post("/sessions/{session_id}/teach")
    def teach(session_id: str, body: TeachBody):
        session = _session(session_id)
        return _run(
            lambda: session.teach(body.tokens, body.gold_object_id, body.frame_seed)
        )

    @app.post("/sessions/{session_id}/next-scene")
    def next_scene(session_id: str):
        session = _session(session_id)
        return _run(session.next_scene)

    @app.get("/sessions/{session_id}/lexicon")
    def export_lexicon(session_id: str):
        session = _session(session_id)
        return _run(session.export_lexicon_document)

    @app.get("/sessions/{session_id}/log")
    def get_log(session_id: str):
        session = _session(session_id)
        return _run(session.log_document)

    return app
