"""HTTP facade over the orchestrator for the interactive viewer.

Addresses follow the slippy-map URL shape with signed grid indices; the z
path segment is the engine's scale level (1 = coarsest), not a web-mercator
zoom. Tile responses are PNG with a content-hash ETag, so clients can cache
by ETag and revalidate with If-None-Match.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .errors import (EditError, GenerationError, MapValidationError,
                     RegionTooLargeError, SatmosaicError)
from .imaging import content_etag, labels_png, rgb_png
from .orchestrator import Orchestrator
from .scalespace import Layer, TileAddress


class CreateStyleRequest(BaseModel):
    seed: int


class EditRequest(BaseModel):
    op: str
    z: int
    x: int
    y: int
    payload: dict | None = None


def _error(code: int, kind: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=code,
                        content={"code": code, "kind": kind, "message": message})


def create_app(orch: Orchestrator, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="satmosaic tile server")
    cfg = orch.cfg

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return _error(400, "bad_request", str(exc.errors()[:1]))

    @app.exception_handler(SatmosaicError)
    async def engine_handler(request: Request, exc: SatmosaicError):
        if isinstance(exc, RegionTooLargeError):
            return _error(413, "too_large", str(exc))
        if isinstance(exc, GenerationError):
            return _error(502, "backend_failure", str(exc))
        if isinstance(exc, (EditError, MapValidationError)):
            return _error(400, "bad_request", str(exc))
        return _error(400, "bad_request", str(exc))

    def check_level(z: int) -> JSONResponse | None:
        if not 1 <= z <= cfg.scale.z_max:
            return _error(400, "bad_request",
                          f"scale level {z} outside 1..{cfg.scale.z_max}")
        return None

    def png_response(request: Request, data: bytes) -> Response:
        etag = content_etag(data)
        if request.headers.get("if-none-match") == etag:
            return Response(status_code=304, headers={"ETag": etag})
        return Response(content=data, media_type="image/png",
                        headers={"ETag": etag})

    @app.get("/api/v1/health")
    def health():
        return {"status": "ok", "map_version": orch.map_version}

    @app.post("/api/v1/styles")
    def create_style(body: CreateStyleRequest):
        session = orch.create_session(body.seed)
        return {"style_id": session.style_id, "seed": body.seed}

    @app.get("/api/v1/tiles/{style}/{z}/{x}/{y}")
    def serve_tile(style: str, z: int, x: int, y: int, request: Request):
        bad = check_level(z)
        if bad is not None:
            return bad
        session = orch.get_session(style)
        if session is None:
            return _error(404, "not_found", f"unknown style {style!r}")
        tile = orch.get_out_tile(session, TileAddress(z, x, y, Layer.OUT))
        return png_response(request, rgb_png(tile))

    @app.get("/api/v1/labels/{z}/{x}/{y}")
    def serve_labels(z: int, x: int, y: int, request: Request):
        bad = check_level(z)
        if bad is not None:
            return bad
        labels = orch.label_tile(TileAddress(z, x, y, Layer.OUT))
        return png_response(request, labels_png(labels.cls, cfg.label_palette))

    @app.post("/api/v1/edit")
    def edit_map(body: EditRequest):
        bad = check_level(body.z)
        if bad is not None:
            return bad
        if body.op == "rotate90":
            edit = orch.edit_rotate_tile(body.z, body.x, body.y)
        elif body.op == "replace_with_procedural":
            seed = (body.payload or {}).get("seed", orch.map_version + 1)
            edit = orch.edit_replace_tile(body.z, body.x, body.y, int(seed))
        else:
            return _error(400, "bad_request", f"unknown edit op {body.op!r}")
        sessions = orch.sessions()
        agent = sessions[0] if sessions else orch.create_session(0)
        invalidated = orch.apply_edit(agent, edit)
        return {
            "map_version": orch.map_version,
            "invalidated": [{"z": a.z, "x": a.x, "y": a.y, "layer": a.layer.value}
                            for a in invalidated],
        }

    @app.get("/api/v1/costs")
    def costs(style: str | None = None):
        if style is not None:
            session = orch.get_session(style)
            if session is None:
                return _error(404, "not_found", f"unknown style {style!r}")
            sessions = [session]
        else:
            sessions = orch.sessions()
        gen = sum(s.generator_evals for s in sessions)
        blend = sum(s.blend_evals for s in sessions)
        from .scalespace import modeled_costs
        modeled = modeled_costs(cfg.scale.z_max, cfg.scale.f)
        return {
            "modeled_map2sat": modeled[0],
            "modeled_seam2cont": modeled[1],
            "actual_generator_evals": gen,
            "actual_blend_evals": blend,
        }

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
