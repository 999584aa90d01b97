"""HTTP facade over ingestion, extraction, search, and flow queries.

Searches read an immutable store snapshot; ingestion goes through a single
writer lock (and a one-worker queue in async mode) so concurrent requests
never observe a half-applied write. Every error body has the same shape:
{"status", "code", "message", "detail"?} with a stable machine-readable code.
"""

from __future__ import annotations

import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from starlette.datastructures import UploadFile

from . import retrieval, store as store_mod
from .errors import (
    DuplicateError,
    ExtractionError,
    FlowError,
    InputError,
    NotFoundError,
    ProviderError,
    QueryError,
    StoreError,
    UnknownFacetError,
)
from .extraction import ExtractionConfig, extract_semantics, load_image
from .providers import EmbeddingProvider, MllmClient
from .retrieval import query_from_payload, response_to_payload
from .schema import FACET_ORDER, VocabularySet, validate_record
from .store import VectorStore, index_screen, save_store

MAX_UPLOAD_BYTES = 10 * 1024 * 1024
ACCEPTED_CONTENT_TYPES = {"image/png": "png", "image/jpeg": "jpeg", "image/webp": "webp"}


class ApiFailure(Exception):
    def __init__(self, status: int, code: str, message: str, detail: object = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail


@dataclass
class ServiceConfig:
    cors_origin: str | None = "*"
    max_upload_bytes: int = MAX_UPLOAD_BYTES
    persist_dir: str | None = None
    # directory that relative image_refs resolve against for GET .../image;
    # image hosting stays out of scope, this only streams local corpus files
    image_root: str | None = None
    extraction: ExtractionConfig = field(default_factory=ExtractionConfig)


@dataclass
class ServiceState:
    store: VectorStore
    vocab: VocabularySet
    mllm: MllmClient
    embedder: EmbeddingProvider
    config: ServiceConfig
    writer_lock: threading.Lock = field(default_factory=threading.Lock)
    jobs: dict = field(default_factory=dict)
    job_executor: ThreadPoolExecutor = field(
        default_factory=lambda: ThreadPoolExecutor(max_workers=1))


def _error_response(status: int, code: str, message: str, detail: object = None) -> JSONResponse:
    body: dict = {"status": status, "code": code, "message": message}
    if detail is not None:
        body["detail"] = detail
    return JSONResponse(status_code=status, content=body)


def _entry_detail(entry: store_mod.ScreenEntry) -> dict:
    return {
        "id": entry.id,
        "image_ref": entry.image_ref,
        "ingested_at": entry.ingested_at,
        "record": store_mod.record_to_plain(entry.record),
        "facets_embedded": [f.value for f in FACET_ORDER if f in entry.embeddings],
    }


def _report_payload(report) -> dict:
    return {
        "is_valid": report.is_valid,
        "hard_errors": [[f.value, m] for f, m in report.hard_errors],
        "soft_warnings": [[f.value, m, c] for f, m, c in report.soft_warnings],
    }


async def _read_upload(upload: UploadFile | None, max_bytes: int) -> bytes:
    if upload is None:
        raise ApiFailure(400, "image_missing", "multipart field 'image' is required")
    media = ACCEPTED_CONTENT_TYPES.get(upload.content_type or "")
    if media is None:
        raise ApiFailure(
            400, "unsupported_image_type",
            f"content type {upload.content_type!r} not accepted (png, jpeg, webp)")
    data = await upload.read()
    if len(data) > max_bytes:
        raise ApiFailure(400, "image_too_large", f"upload exceeds {max_bytes} bytes")
    if not data:
        raise ApiFailure(400, "image_empty", "uploaded file is empty")
    return data


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="uisearch", docs_url=None, redoc_url=None)

    if state.config.cors_origin:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=[state.config.cors_origin],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.exception_handler(ApiFailure)
    async def handle_api_failure(_request: Request, exc: ApiFailure) -> JSONResponse:
        return _error_response(exc.status, exc.code, exc.message, exc.detail)

    @app.exception_handler(Exception)
    async def handle_unexpected(_request: Request, exc: Exception) -> JSONResponse:
        return _error_response(500, "internal_error", str(exc))

    @app.get("/health")
    async def health() -> JSONResponse:
        return JSONResponse({
            "status": "ok",
            "screens": len(state.store),
            "dimension": state.store.dimension,
            "provider_tag": state.store.provider_tag,
        })

    @app.get("/vocab")
    async def vocab_route() -> JSONResponse:
        # read-only; lets the console offer dropdown suggestions for the
        # categorical facets without bundling its own copy of the lists
        from .schema import VOCABULARY_SECTIONS

        return JSONResponse({
            name: list(state.vocab.section(name)) for name in VOCABULARY_SECTIONS})

    @app.post("/search")
    async def search_route(request: Request) -> JSONResponse:
        try:
            payload = await request.json()
        except Exception as exc:
            raise ApiFailure(400, "query_invalid", f"body is not valid JSON: {exc}") from exc
        try:
            query = query_from_payload(payload)
            response = retrieval.search(state.store, query, state.embedder)
        except UnknownFacetError as exc:
            raise ApiFailure(400, "unknown_facet", str(exc)) from exc
        except QueryError as exc:
            raise ApiFailure(400, "query_invalid", str(exc)) from exc
        except StoreError as exc:
            raise ApiFailure(500, "internal_error", str(exc)) from exc
        except ProviderError as exc:
            raise ApiFailure(502, "provider_error", str(exc)) from exc
        return JSONResponse(response_to_payload(response))

    def _ingest(data: bytes, image_ref: str, screen_id: str | None) -> dict:
        try:
            image = load_image(data)
        except InputError as exc:
            raise ApiFailure(400, "image_undecodable", str(exc)) from exc
        try:
            outcome = extract_semantics(image, state.mllm, state.vocab, state.config.extraction)
        except (ProviderError, ExtractionError) as exc:
            raise ApiFailure(502, "provider_error", str(exc)) from exc
        with state.writer_lock:
            try:
                entry = index_screen(
                    state.store, outcome.record, image_ref, state.embedder,
                    screen_id=screen_id)
            except DuplicateError as exc:
                raise ApiFailure(409, "duplicate_screen", str(exc)) from exc
            except ProviderError as exc:
                raise ApiFailure(502, "provider_error", str(exc)) from exc
            if state.config.persist_dir:
                save_store(state.store, state.config.persist_dir)
        return {
            "id": entry.id,
            "image_ref": entry.image_ref,
            "attempts": outcome.attempts,
            "degraded": outcome.degraded,
            "facets_embedded": [f.value for f in FACET_ORDER if f in entry.embeddings],
        }

    @app.post("/screens")
    async def ingest_route(request: Request) -> JSONResponse:
        form = await request.form()
        upload = form.get("image")
        data = await _read_upload(upload if isinstance(upload, UploadFile) else None,
                                  state.config.max_upload_bytes)
        image_ref = str(form.get("image_ref") or (upload.filename or "upload"))
        screen_id = form.get("screen_id")
        screen_id = str(screen_id) if screen_id else None

        if request.query_params.get("mode") == "async":
            job_id = uuid.uuid4().hex
            state.jobs[job_id] = {"status": "pending"}

            def run_job() -> None:
                try:
                    result = _ingest(data, image_ref, screen_id)
                    state.jobs[job_id] = {"status": "done", "result": result}
                except ApiFailure as exc:
                    state.jobs[job_id] = {
                        "status": "error",
                        "error": {"status": exc.status, "code": exc.code, "message": exc.message},
                    }
                except Exception as exc:  # job must never vanish silently
                    state.jobs[job_id] = {
                        "status": "error",
                        "error": {"status": 500, "code": "internal_error", "message": str(exc)},
                    }

            state.job_executor.submit(run_job)
            return JSONResponse(status_code=202, content={"job_id": job_id})

        return JSONResponse(status_code=201, content=_ingest(data, image_ref, screen_id))

    @app.get("/jobs/{job_id}")
    async def job_route(job_id: str) -> JSONResponse:
        job = state.jobs.get(job_id)
        if job is None:
            raise ApiFailure(404, "not_found", f"unknown job id: {job_id}")
        return JSONResponse(job)

    @app.post("/extract")
    async def extract_route(request: Request) -> JSONResponse:
        form = await request.form()
        upload = form.get("image")
        data = await _read_upload(upload if isinstance(upload, UploadFile) else None,
                                  state.config.max_upload_bytes)
        try:
            image = load_image(data)
        except InputError as exc:
            raise ApiFailure(400, "image_undecodable", str(exc)) from exc
        try:
            outcome = extract_semantics(image, state.mllm, state.vocab, state.config.extraction)
        except (ProviderError, ExtractionError) as exc:
            raise ApiFailure(502, "provider_error", str(exc)) from exc
        report = validate_record(outcome.record, state.vocab)
        return JSONResponse({
            "record": store_mod.record_to_plain(outcome.record),
            "report": _report_payload(report),
            "attempts": outcome.attempts,
            "degraded": outcome.degraded,
        })

    @app.get("/screens/{screen_id}")
    async def detail_route(screen_id: str) -> JSONResponse:
        entry = state.store.get(screen_id)
        if entry is None:
            raise ApiFailure(404, "not_found", f"unknown screen id: {screen_id}")
        return JSONResponse(_entry_detail(entry))

    @app.get("/screens/{screen_id}/image")
    async def image_route(screen_id: str):
        from pathlib import Path as _Path

        from fastapi.responses import FileResponse

        entry = state.store.get(screen_id)
        if entry is None:
            raise ApiFailure(404, "not_found", f"unknown screen id: {screen_id}")
        candidate = _Path(entry.image_ref)
        if not candidate.is_absolute() and state.config.image_root:
            candidate = _Path(state.config.image_root) / candidate
        if not candidate.is_file():
            raise ApiFailure(404, "not_found", f"image for {screen_id} is not available here")
        return FileResponse(candidate)

    @app.get("/screens/{screen_id}/flow")
    async def flow_route(screen_id: str, direction: str = "next",
                         k: int = retrieval.DEFAULT_RESULT_COUNT) -> JSONResponse:
        try:
            results = retrieval.flow_search(
                state.store, screen_id, direction, k=k, provider=state.embedder)
        except NotFoundError as exc:
            raise ApiFailure(404, "not_found", str(exc)) from exc
        except FlowError as exc:
            raise ApiFailure(422, "flow_unavailable", str(exc)) from exc
        except InputError as exc:
            raise ApiFailure(400, "query_invalid", str(exc)) from exc
        except ProviderError as exc:
            raise ApiFailure(502, "provider_error", str(exc)) from exc
        return JSONResponse({
            "source_screen_id": screen_id,
            "direction": direction,
            "results": [retrieval.result_to_payload(r) for r in results],
        })

    return app
