"""HTTP API: ingest documents, analyze targets, refilter, read saliency.

Error responses always use the envelope {"error": {code, stage, message}}.
"""

from __future__ import annotations

from dataclasses import replace

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from ..docmodel import find_sentence
from ..errors import (
    BackendUnavailable,
    ClaimLensError,
    DocumentTooLong,
    EmptyDocument,
    IndexOutOfRange,
    OffsetOutOfBounds,
    PipelineError,
    SelfPair,
    StaleCache,
    TextTooLong,
)
from ..fusion import analyze, refilter
from ..nli import NLIEngine
from .schemas import AnalyzeRequest, IngestRequest, PolicyModel, RefilterRequest
from .settings import Settings
from .state import CacheEntry, ServiceState

_STATUS_BY_ERROR = {
    EmptyDocument: 422,
    DocumentTooLong: 422,
    TextTooLong: 422,
    BackendUnavailable: 503,
    IndexOutOfRange: 400,
    SelfPair: 400,
    OffsetOutOfBounds: 400,
    StaleCache: 409,
}

_STAGE_BY_ERROR = {
    EmptyDocument: "segmentation",
    DocumentTooLong: "attention",
    BackendUnavailable: "nli",
    TextTooLong: "nli",
}


def _envelope(code: str, stage: str, message: str, status: int,
              extra: dict | None = None) -> JSONResponse:
    body = {"error": {"code": code, "stage": stage, "message": message}}
    if extra:
        body.update(extra)
    return JSONResponse(status_code=status, content=body)


def _error_response(exc: Exception) -> JSONResponse:
    stage = "service"
    cause = exc
    if isinstance(exc, PipelineError):
        stage = exc.stage
        cause = exc.cause
    status = _STATUS_BY_ERROR.get(type(cause), 500)
    if not isinstance(exc, PipelineError):
        stage = _STAGE_BY_ERROR.get(type(cause), "service")
    extra = None
    if isinstance(cause, BackendUnavailable) and (cause.partial or cause.failed_indices):
        extra = {"partial": {
            "annotations": [
                {"index": i, "role": link.relation,
                 "nli_confidence": link.confidence}
                for i, link in sorted(cause.partial.items())
            ],
            "failed_indices": cause.failed_indices,
        }}
    return _envelope(type(cause).__name__, stage, str(cause), status, extra)


def create_app(settings: Settings | None = None) -> FastAPI:
    settings = settings or Settings.from_env()
    app = FastAPI(title="claimlens", version="0.1.0")
    state = ServiceState(settings)
    app.state.service = state

    @app.exception_handler(ClaimLensError)
    async def _claimlens_error(request: Request, exc: ClaimLensError):
        return _error_response(exc)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        return _envelope("ValidationError", "service", str(exc), 422)

    @app.middleware("http")
    async def _body_cap(request: Request, call_next):
        length = request.headers.get("content-length")
        if length and int(length) > settings.max_body_bytes:
            return _envelope(
                "BodyTooLarge", "service",
                f"body of {length} bytes exceeds cap {settings.max_body_bytes}",
                413)
        return await call_next(request)

    def _entry_or_404(doc_id: str) -> CacheEntry | JSONResponse:
        entry = state.cache.get(doc_id)
        if entry is None:
            return _envelope(
                "UnknownDocument", "service",
                f"doc_id {doc_id} is not cached; re-ingest the document", 404)
        return entry

    @app.post("/v1/documents")
    def ingest(body: IngestRequest):
        if len(body.text.encode("utf-8")) > settings.max_body_bytes:
            return _envelope(
                "BodyTooLarge", "service",
                f"text exceeds cap {settings.max_body_bytes}", 413)
        entry, cached, timings = state.ingest(body.text)
        return {
            "doc_id": entry.doc.doc_id,
            "sentences": entry.doc.to_dict()["sentences"],
            "cached": cached,
            "timings": timings,
        }

    @app.post("/v1/documents/{doc_id}/analyze")
    def analyze_target(doc_id: str, body: AnalyzeRequest):
        entry = _entry_or_404(doc_id)
        if isinstance(entry, JSONResponse):
            return entry

        if body.target_index is not None:
            target = body.target_index
        else:
            target = find_sentence(entry.doc, body.target_char_offset)

        policy_model = body.policy or PolicyModel()
        policy, tau_confirm = policy_model.to_policy()

        engine = entry.engine
        if body.nli_config is not None:
            engine = NLIEngine(
                entry.engine.backend,
                config=replace(entry.engine.config,
                               min_confidence=body.nli_config.min_confidence,
                               batch_size=body.nli_config.batch_size),
                cache=entry.engine.cache)

        result = analyze(entry.doc, target, nli=engine, policy=policy,
                         tau_confirm=tau_confirm,
                         saliency_matrix=entry.saliency)
        entry.analyses[target] = result
        entry.last_target = target
        return result.to_dict()

    @app.post("/v1/documents/{doc_id}/refilter")
    def refilter_target(doc_id: str, body: RefilterRequest):
        entry = _entry_or_404(doc_id)
        if isinstance(entry, JSONResponse):
            return entry

        target = body.target_index if body.target_index is not None else entry.last_target
        prior = entry.analyses.get(target) if target is not None else None
        if prior is None:
            return _envelope(
                "NoPriorAnalysis", "service",
                "refilter requires a prior analyze for this document and target",
                409)

        policy, tau_confirm = body.policy.to_policy()
        result = refilter(prior, entry.saliency, policy, doc=entry.doc,
                          nli=entry.engine, tau_confirm=tau_confirm)
        entry.analyses[target] = result
        return result.to_dict()

    @app.get("/v1/documents/{doc_id}/saliency")
    def get_saliency(doc_id: str):
        entry = _entry_or_404(doc_id)
        if isinstance(entry, JSONResponse):
            return entry
        return entry.saliency.to_dict()

    @app.get("/v1/health")
    def health():
        att = state.attention_provider.describe()
        nli = state.nli_backend.describe()
        status = "ok" if att["status"] == "ok" and nli["status"] == "ok" else "degraded"
        return {
            "status": status,
            "backends": {"attention": att["status"], "nli": nli["status"]},
            "models": {"attention_model_id": att.get("model_id", ""),
                       "nli_model_id": nli.get("model_id", "")},
        }

    return app
