"""HTTP curation service over a CurationStore (FastAPI).

Endpoints
---------
GET  /items?status=&language=     item summaries
GET  /items/{key}                 full item (record + audit trail + version)
POST /items/{key}/edits           {"version": int, "action": ..., ...}
POST /items/{key}/qas/{i}/category {"version": int, "category": "M"|"V"|"P"|"R"}
POST /import                      {"records": [record dicts]}
GET  /export?status=reviewed      newline-delimited JSON records
GET  /stats                       progress + error-category distribution

Stale writes are rejected with 409 and the current version so the client can
re-fetch and retry. An optional static directory is mounted at / for a UI.
"""

from __future__ import annotations

import json
import os

from fastapi import Depends, FastAPI, HTTPException, Request
from fastapi.responses import PlainTextResponse, Response
from fastapi.staticfiles import StaticFiles

from .curation import (
    CurationError,
    CurationStore,
    EditValidationError,
    ItemNotFound,
    VersionConflict,
)
from .dataset import DatasetError, record_from_dict, record_to_dict

NDJSON = "application/x-ndjson"


def create_app(store: CurationStore, static_dir=None, auth_token_env: str | None = None) -> FastAPI:
    app = FastAPI(title="xqasrl curation", docs_url=None, redoc_url=None)

    def check_auth(request: Request) -> None:
        if not auth_token_env:
            return
        expected = os.environ.get(auth_token_env, "")
        if not expected:
            raise HTTPException(status_code=500, detail=f"auth env var {auth_token_env} is not set")
        header = request.headers.get("authorization", "")
        if header != f"Bearer {expected}":
            raise HTTPException(status_code=401, detail="invalid or missing bearer token")

    guard = [Depends(check_auth)]

    @app.get("/items", dependencies=guard)
    def list_items(status: str | None = None, language: str | None = None):
        return {"items": [item.summary() for item in store.list_items(status=status, language=language)]}

    @app.get("/items/{key}", dependencies=guard)
    def get_item(key: str):
        try:
            return store.get(key).to_dict()
        except ItemNotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    @app.post("/items/{key}/edits", dependencies=guard)
    def post_edit(key: str, body: dict):
        version = body.get("version")
        if not isinstance(version, int):
            raise HTTPException(status_code=422, detail="body must carry an integer 'version'")
        edit = {k: v for k, v in body.items() if k != "version"}
        try:
            item = store.apply_edit(key, edit, expected_version=version)
        except ItemNotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except VersionConflict as exc:
            current = store.get(key).version
            raise HTTPException(
                status_code=409, detail={"message": str(exc), "current_version": current}
            ) from exc
        except EditValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return item.to_dict()

    @app.post("/items/{key}/qas/{qa_index}/category", dependencies=guard)
    def post_category(key: str, qa_index: int, body: dict):
        version = body.get("version")
        category = body.get("category")
        if not isinstance(version, int):
            raise HTTPException(status_code=422, detail="body must carry an integer 'version'")
        if not isinstance(category, str):
            raise HTTPException(status_code=422, detail="body must carry a string 'category'")
        try:
            item = store.tag_error_category(key, qa_index, category, expected_version=version)
        except ItemNotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except VersionConflict as exc:
            current = store.get(key).version
            raise HTTPException(
                status_code=409, detail={"message": str(exc), "current_version": current}
            ) from exc
        except EditValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return item.to_dict()

    @app.post("/import", dependencies=guard)
    def post_import(body: dict):
        raw = body.get("records")
        if not isinstance(raw, list):
            raise HTTPException(status_code=422, detail="body must carry a 'records' list")
        try:
            records = [record_from_dict(d, line=i + 1) for i, d in enumerate(raw)]
            added = store.import_records(records)
        except DatasetError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except CurationError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return {"imported": added, "total": len(store.items)}

    @app.get("/export", dependencies=guard)
    def get_export(status: str = "reviewed"):
        lines = [
            json.dumps(record_to_dict(record), ensure_ascii=False)
            for record in store.export_gold(status=status)
        ]
        payload = "".join(line + "\n" for line in lines)
        return Response(content=payload, media_type=NDJSON)

    @app.get("/stats", dependencies=guard)
    def get_stats():
        return {"progress": store.progress(), "categories": store.category_distribution()}

    @app.get("/healthz", response_class=PlainTextResponse)
    def healthz():
        return "ok"

    if static_dir:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
