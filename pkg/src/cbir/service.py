"""HTTP API over a loaded index: browsing, query-by-example, eval summaries.

The index is immutable for the process lifetime; the only mutable state is
the eval-summary cache, which is recomputed deterministically so concurrent
first computations are harmless.
"""

from __future__ import annotations

import io
import threading
from collections import Counter
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse, Response
from PIL import Image

from .descriptors import extract_descriptor
from .evaluation import evaluate_ablations
from .imaging import DecodeError, bilinear_resize, decode_image
from .index import RankedResult, RetrievalIndex, search_topk

DEFAULT_K = 20
MAX_K = 100
THUMBNAIL_SIDE = 256


def _ranked_document(result: RankedResult) -> dict:
    return {
        "k": result.k,
        "entries": [
            {
                "id": hit.id,
                "label": hit.label,
                "path": hit.path,
                "distance": hit.distance,
                "segments": {
                    "histogram": hit.segments.histogram,
                    "moments": hit.segments.moments,
                    "hu": hit.segments.hu,
                },
            }
            for hit in result.hits
        ],
    }


def _eval_document(index: RetrievalIndex, k: int) -> dict:
    reports = evaluate_ablations(index, k)
    classes = sorted({r.label for r in index.records})
    return {
        "k": k,
        "mode": index.mode,
        "classes": classes,
        "features": {
            name: {
                "rows": [
                    {"class": row.name, "precision": row.precision, "recall": row.recall}
                    for row in report.rows
                ],
                "mean_precision": report.mean_precision,
                "mean_recall": report.mean_recall,
            }
            for name, report in reports.items()
        },
    }


def create_app(
    index: RetrievalIndex, images_dir: str | Path, ui_dir: str | Path | None = None
) -> FastAPI:
    app = FastAPI(title="cbir")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    images_root = Path(images_dir).resolve()
    eval_cache: dict[int, dict] = {}
    eval_lock = threading.Lock()

    def resolve_image_path(stored: str) -> Path | None:
        p = Path(stored)
        candidate = p if p.is_absolute() else images_root / p
        candidate = candidate.resolve()
        if not str(candidate).startswith(str(images_root)):
            return None
        return candidate

    @app.get("/api/health")
    def health() -> PlainTextResponse:
        return PlainTextResponse("ok")

    @app.get("/api/classes")
    def classes() -> list[dict]:
        counts = Counter(r.label for r in index.records)
        return [{"name": name, "count": counts[name]} for name in sorted(counts)]

    @app.get("/api/images")
    def images(request: Request):
        params = request.query_params
        class_name = params.get("class")
        try:
            page = int(params.get("page", "0"))
            per = int(params.get("per", "20"))
        except ValueError:
            return JSONResponse({"detail": "page and per must be integers"}, status_code=400)
        if page < 0 or per < 1:
            return JSONResponse({"detail": "page must be >= 0 and per >= 1"}, status_code=400)
        records = [
            r for r in index.records if class_name is None or r.label == class_name
        ]
        window = records[page * per : (page + 1) * per]
        return [{"id": r.id, "label": r.label} for r in window]

    @app.get("/api/images/{record_id}/thumbnail")
    def thumbnail(record_id: int):
        record = index.get(record_id)
        if record is None:
            return JSONResponse({"detail": f"unknown image id {record_id}"}, status_code=404)
        path = resolve_image_path(record.path)
        if path is None or not path.is_file():
            return JSONResponse(
                {"detail": f"image file missing: {record.path}"}, status_code=404
            )
        try:
            img = decode_image(path.read_bytes())
        except DecodeError as exc:
            return JSONResponse({"detail": str(exc)}, status_code=404)
        scale = THUMBNAIL_SIDE / max(img.width, img.height)
        if scale < 1.0:
            img = bilinear_resize(
                img, max(1, round(img.width * scale)), max(1, round(img.height * scale))
            )
        buf = io.BytesIO()
        Image.fromarray(np.asarray(img.pixels)).save(buf, format="JPEG", quality=88)
        return Response(content=buf.getvalue(), media_type="image/jpeg")

    @app.post("/api/query")
    async def query(request: Request):
        content_type = request.headers.get("content-type", "")
        payload: bytes | None = None
        record_id: int | None = None
        k_raw: object = DEFAULT_K
        exclude_raw: object = False
        if content_type.startswith("multipart/"):
            form = await request.form()
            upload = form.get("image")
            if upload is not None:
                payload = await upload.read()
            raw_id = form.get("id")
            if raw_id not in (None, ""):
                try:
                    record_id = int(raw_id)
                except (TypeError, ValueError):
                    return JSONResponse({"detail": "id must be an integer"}, status_code=422)
            k_raw = form.get("k", DEFAULT_K)
            exclude_raw = form.get("exclude_self", "false")
        else:
            try:
                body = await request.json()
            except Exception:
                return JSONResponse({"detail": "body must be JSON or multipart"}, status_code=400)
            record_id = body.get("id")
            k_raw = body.get("k", DEFAULT_K)
            exclude_raw = body.get("exclude_self", False)

        try:
            k = int(k_raw)
        except (TypeError, ValueError):
            return JSONResponse({"detail": "k must be an integer"}, status_code=422)
        if not 1 <= k <= MAX_K:
            return JSONResponse(
                {"detail": f"k must be within [1, {MAX_K}]"}, status_code=422
            )
        exclude_self = str(exclude_raw).lower() in ("1", "true", "yes", "on")

        if (payload is None) == (record_id is None):
            return JSONResponse(
                {"detail": "provide exactly one of an image upload or an image id"},
                status_code=422,
            )

        exclude_id = None
        if payload is not None:
            if not payload:
                return JSONResponse({"detail": "empty image payload"}, status_code=400)
            try:
                descriptor = extract_descriptor(decode_image(payload))
            except DecodeError as exc:
                return JSONResponse({"detail": str(exc)}, status_code=400)
        else:
            record = index.get(record_id)
            if record is None:
                return JSONResponse(
                    {"detail": f"unknown image id {record_id}"}, status_code=404
                )
            descriptor = record.descriptor
            if exclude_self:
                exclude_id = record_id

        result = search_topk(index, descriptor, k, exclude_id=exclude_id)
        return _ranked_document(result)

    @app.get("/api/eval/summary")
    def eval_summary(request: Request):
        try:
            k = int(request.query_params.get("k", str(DEFAULT_K)))
        except ValueError:
            return JSONResponse({"detail": "k must be an integer"}, status_code=422)
        if not 1 <= k <= MAX_K:
            return JSONResponse(
                {"detail": f"k must be within [1, {MAX_K}]"}, status_code=422
            )
        with eval_lock:
            if k not in eval_cache:
                eval_cache[k] = _eval_document(index, k)
            return eval_cache[k]

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
