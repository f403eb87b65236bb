"""HTTP surface over the session engine.

Request parsing is done by hand rather than through response models so
that every failure, framework-level or ours, comes back in the same
{"code", "message"} envelope and every success body is canonical JSON.
"""

from __future__ import annotations

from typing import Any, Optional

from fastapi import FastAPI, Request, Response
from starlette.exceptions import HTTPException as StarletteHTTPException

from ..signals import ClassLabel
from .engine import ExplainEngine, ServiceError
from .wire import canonical_json, error_payload


def _json_response(payload: Any, status: int = 200) -> Response:
    return Response(content=canonical_json(payload), status_code=status,
                    media_type="application/json")


def _parse_int(name: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ServiceError("invalid_argument", f"{name} must be an integer, got {raw!r}") from None


def _parse_label(raw: str) -> ClassLabel:
    try:
        return ClassLabel.from_code(int(raw))
    except ValueError:
        pass
    try:
        return ClassLabel.from_name(raw)
    except ValueError:
        raise ServiceError("invalid_argument", f"unknown class label {raw!r}") from None


async def _read_json_object(request: Request) -> dict:
    try:
        body = await request.json()
    except Exception:
        raise ServiceError("invalid_argument", "request body is not valid JSON") from None
    if not isinstance(body, dict):
        raise ServiceError("invalid_argument", "request body must be a JSON object")
    return body


def _require_number(body: dict, key: str) -> float:
    value = body.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ServiceError("invalid_argument", f"field {key!r} must be a number")
    return float(value)


def _optional_region(body: dict) -> Optional[tuple[int, int]]:
    value = body.get("region")
    if value is None:
        return None
    ok = (
        isinstance(value, (list, tuple))
        and len(value) == 2
        and all(isinstance(v, int) and not isinstance(v, bool) for v in value)
    )
    if not ok:
        raise ServiceError("invalid_argument", "field 'region' must be null or [start, end]")
    return (value[0], value[1])


def create_app(engine: ExplainEngine) -> FastAPI:
    app = FastAPI(title="beatlens", docs_url=None, redoc_url=None, openapi_url=None)
    app.state.engine = engine

    @app.exception_handler(ServiceError)
    async def _on_service_error(request: Request, exc: ServiceError) -> Response:
        return _json_response(error_payload(exc.code, exc.message), status=exc.status)

    @app.exception_handler(StarletteHTTPException)
    async def _on_http_error(request: Request, exc: StarletteHTTPException) -> Response:
        code = "not_found" if exc.status_code == 404 else "invalid_argument"
        return _json_response(error_payload(code, str(exc.detail)), status=exc.status_code)

    @app.get("/beats")
    async def list_beats(request: Request) -> Response:
        params = request.query_params
        label = _parse_label(params["label"]) if "label" in params else None
        page = _parse_int("page", params["page"]) if "page" in params else 0
        page_size = _parse_int("page_size", params["page_size"]) if "page_size" in params else 50
        return _json_response(engine.list_beats(label=label, page=page, page_size=page_size))

    @app.get("/beats/{beat_id}/baseline")
    async def baseline(beat_id: str) -> Response:
        return _json_response(engine.baseline(beat_id))

    @app.post("/sessions")
    async def create_session(request: Request) -> Response:
        body = await _read_json_object(request)
        beat_id = body.get("beat_id")
        if not isinstance(beat_id, str):
            raise ServiceError("invalid_argument", "field 'beat_id' must be a string")
        return _json_response(engine.create_session(beat_id), status=201)

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str) -> Response:
        return _json_response(engine.get_session(session_id))

    @app.post("/sessions/{session_id}/edits")
    async def apply_edit(session_id: str, request: Request) -> Response:
        body = await _read_json_object(request)
        kind = body.get("kind")
        if not isinstance(kind, str):
            raise ServiceError("invalid_argument", "field 'kind' must be a string")
        magnitude = _require_number(body, "magnitude")
        region = _optional_region(body)
        return _json_response(engine.apply_edit(session_id, kind, magnitude, region))

    @app.get("/sessions/{session_id}/links")
    async def links(session_id: str, request: Request) -> Response:
        params = request.query_params
        upper = _parse_int("upper", params["upper"]) if "upper" in params else None
        return _json_response(engine.links(session_id, upper=upper))

    @app.get("/sessions/{session_id}/overlay")
    async def overlay(session_id: str, request: Request) -> Response:
        params = request.query_params
        row = _parse_int("row", params["row"]) if "row" in params else None
        start = _parse_int("from", params["from"]) if "from" in params else None
        end = _parse_int("to", params["to"]) if "to" in params else None
        return _json_response(engine.overlay(session_id, row=row, start=start, end=end))

    return app
