"""HTTP JSON API over ``SearchServer``.

Every error body is ``{"error": {"code": str, "message": str}}``.
"""
from __future__ import annotations

import base64
import binascii
import logging
from typing import List, Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field
from starlette.exceptions import HTTPException as StarletteHTTPException

from .cluster import DEFAULT_GROWTH, DEFAULT_MAX_ITERATIONS, ClusterError, ClusterParams
from .extract import KeyFile
from .server import DEFAULT_LIMIT, BadRequest, SearchServer, ServerError

log = logging.getLogger(__name__)


class KeyFileEntry(BaseModel):
    token: str = Field(min_length=1)
    freq: int


class KeyFileBody(BaseModel):
    doc_id: str
    doc_length: int
    entries: List[KeyFileEntry]


class UploadBody(BaseModel):
    key_file: KeyFileBody
    blob: str


class ClusterBody(BaseModel):
    k: int = Field(ge=1)
    shard_growth_factor: float = Field(DEFAULT_GROWTH, gt=1)
    max_iterations: int = Field(DEFAULT_MAX_ITERATIONS, ge=1)


class TrapdoorEntry(BaseModel):
    token: str = Field(min_length=1)
    weight: float = Field(gt=0, le=1)


class SearchBody(BaseModel):
    trapdoor: List[TrapdoorEntry]
    shard_ids: List[int] = Field(min_length=1)
    limit: Optional[int] = Field(DEFAULT_LIMIT, ge=1)


def _error(status, code, message):
    return JSONResponse(status_code=status, content={"error": {"code": code, "message": message}})


def _b64decode(text):
    try:
        return base64.b64decode(text, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise BadRequest("blob is not valid base64") from exc


def create_app(server: SearchServer) -> FastAPI:
    app = FastAPI(title="securesearch")
    app.state.server = server

    @app.exception_handler(ServerError)
    async def _server_error(request: Request, exc: ServerError):
        return _error(exc.status, exc.code, str(exc))

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        parts = ["/".join(str(x) for x in e["loc"]) + ": " + e["msg"] for e in exc.errors()]
        return _error(400, "invalid_request", "; ".join(parts))

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(request: Request, exc: StarletteHTTPException):
        code = "not_found" if exc.status_code == 404 else "http_error"
        return _error(exc.status_code, code, str(exc.detail))

    @app.exception_handler(Exception)
    async def _internal(request: Request, exc: Exception):
        log.exception("unhandled error")
        return _error(500, "internal", "internal server error")

    @app.post("/docs")
    def upload(body: UploadBody):
        kf = KeyFile(body.key_file.doc_id, body.key_file.doc_length,
                     [(e.token, e.freq) for e in body.key_file.entries])
        doc_id = server.upload(kf, _b64decode(body.blob))
        return {"doc_id": doc_id}

    @app.get("/docs/{doc_id}")
    def fetch(doc_id: str):
        return {"blob": base64.b64encode(server.fetch_blob(doc_id)).decode("ascii")}

    @app.post("/admin/cluster")
    def cluster(body: ClusterBody):
        try:
            params = ClusterParams(k=body.k, shard_growth_factor=body.shard_growth_factor,
                                   max_iterations=body.max_iterations)
        except ClusterError as exc:
            raise BadRequest(str(exc)) from exc
        result = server.cluster(params)
        return {"shards": len(result.shards), "iterations": result.iterations,
                "moved_last_iteration": result.moved_last_iteration}

    @app.get("/abstracts")
    def abstracts():
        return [a.to_dict() for a in server.abstracts()]

    @app.post("/search")
    def search(body: SearchBody):
        trapdoor = [(e.token, e.weight) for e in body.trapdoor]
        results = server.search(trapdoor, body.shard_ids, body.limit or DEFAULT_LIMIT)
        return {"results": [{"doc_id": d, "score": s} for d, s in results]}

    @app.get("/stats")
    def stats():
        return server.stats()

    return app
