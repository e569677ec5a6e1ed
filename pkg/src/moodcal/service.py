"""HTTP facade over the calendar store.

Thin by design: every route parses a document, calls one store or
routing function, and serializes the result.  All failures surface as
``{"code", "message", "details"}`` with the class name as the code, so
clients can switch on a stable identifier instead of prose.
"""

from __future__ import annotations

from typing import Any

from fastapi import Body, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from .config import DEFAULT_SERVICE_CONFIG, ServiceConfig
from .domain import EmotionSource, EmotionState, emotion_to_doc
from .errors import (
    Infeasible,
    ModelMissing,
    MoodcalError,
    NoEvents,
    NotFound,
    ValidationFailed,
)
from .scheduling import schedule_to_doc
from .store import (
    CalendarStore,
    emotion_from_activity_log,
    emotion_from_hr_file,
    state_to_doc,
)

_CONFLICTS = (Infeasible, NoEvents, ModelMissing)


def _status_for(exc: MoodcalError) -> int:
    if isinstance(exc, NotFound):
        return 404
    if isinstance(exc, _CONFLICTS):
        return 409
    return 400


def _error_body(code: str, message: str, details: dict[str, Any]) -> dict[str, Any]:
    return {"code": code, "message": message, "details": details}


def create_app(store: CalendarStore | None = None,
               service_config: ServiceConfig = DEFAULT_SERVICE_CONFIG) -> FastAPI:
    store = store if store is not None else CalendarStore()
    if service_config.scheduling != store.state.config:
        store.set_config(service_config.scheduling)

    app = FastAPI(title="moodcal", docs_url=None, redoc_url=None, openapi_url=None)
    app.state.store = store
    # the web client may be served from another port
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(MoodcalError)
    async def moodcal_error(_req: Request, exc: MoodcalError):
        return JSONResponse(status_code=_status_for(exc),
                            content=_error_body(exc.code, str(exc), exc.details))

    @app.exception_handler(RequestValidationError)
    async def body_error(_req: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content=_error_body("ValidationFailed",
                                                "malformed request body",
                                                {"errors": [str(e["msg"]) for e in exc.errors()]}))

    @app.exception_handler(StarletteHTTPException)
    async def http_error(_req: Request, exc: StarletteHTTPException):
        code = "NotFound" if exc.status_code == 404 else "HTTPError"
        return JSONResponse(status_code=exc.status_code,
                            content=_error_body(code, str(exc.detail), {}))

    @app.post("/events")
    def add_event(doc: dict = Body(...)):
        return {"id": store.add_event(doc)}

    @app.delete("/events/{event_id}")
    def remove_event(event_id: str):
        store.remove_event(event_id)
        return {"ok": True}

    @app.post("/emotion")
    def set_emotion(doc: dict = Body(...)):
        manual = [k for k in ("valence", "arousal", "dominance") if k in doc]
        sources = []
        if manual:
            sources.append("manual")
        if "hr_file" in doc:
            sources.append("hr_file")
        if "activity_log" in doc:
            sources.append("activity_log")
        if len(sources) != 1:
            raise ValidationFailed("exactly one emotion source required",
                                   {"sources": sources})
        at = store.now()
        if sources[0] == "manual":
            if len(manual) != 3:
                raise ValidationFailed("manual emotion needs valence, arousal "
                                       "and dominance",
                                       {"present": manual})
            emotion = EmotionState(float(doc["valence"]), float(doc["arousal"]),
                                   float(doc["dominance"]), at=at,
                                   source=EmotionSource.MANUAL)
        elif sources[0] == "hr_file":
            emotion = emotion_from_hr_file(doc["hr_file"],
                                           service_config.model_dir, at)
        else:
            emotion = emotion_from_activity_log(doc["activity_log"],
                                                service_config.behavior_model,
                                                service_config.class_vad, at)
        return emotion_to_doc(store.set_emotion(emotion))

    @app.post("/solve")
    def solve():
        return schedule_to_doc(store.solve())

    @app.get("/state")
    def get_state():
        return state_to_doc(store.state)

    @app.get("/schedule")
    def get_schedule():
        schedule = store.state.schedule
        if schedule is None:
            raise NotFound("no schedule solved yet")
        return schedule_to_doc(schedule)

    return app
