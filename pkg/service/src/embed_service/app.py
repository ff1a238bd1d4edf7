"""HTTP embedding service.

Endpoints:

* ``POST /v1/embed`` with ``{"texts": [...], "mode": "tokens"|"sentence"}``
  returns ``{"model_id", "dimension", "results"}`` where each result is
  ``{"tokens": [...], "vectors_b64": ...}`` in tokens mode or
  ``{"vector_b64": ...}`` in sentence mode. Vectors travel as base64
  little-endian float32. With the service started in debug-JSON mode a
  request may set ``"encoding": "json"`` to get plain float arrays
  (fields ``vectors`` / ``vector``) instead.
* ``GET /v1/health`` returns 503 while the model loads, then 200 with
  ``{"status": "ok", "model_id", "dimension"}``.

The model loads in a background thread started at app startup, so the
service binds immediately and reports readiness through the health
endpoint. Configuration comes from the environment: ``MODEL_ID``
(default a compact paraphrase encoder; ``hashed`` for the hermetic
keyed-hash backend), ``MAX_BATCH`` (default 256), ``DEBUG_JSON``
(``1`` to allow JSON float responses), and ``PORT`` (server only).
"""

from __future__ import annotations

import base64
import os
import threading
from typing import Literal

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.encoders import jsonable_encoder
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from embed_service.encoders import DEFAULT_MODEL_ID, load_encoder

SCHEMA_BATCH_LIMIT = 256
MAX_TEXT_BYTES = 16 * 1024


class EmbedRequest(BaseModel):
    texts: list[str] = Field(min_length=1, max_length=SCHEMA_BATCH_LIMIT)
    mode: Literal["tokens", "sentence"]
    encoding: Literal["b64", "json"] = "b64"


def _b64(vectors: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(vectors, dtype="<f4").tobytes()).decode(
        "ascii"
    )


class _EncoderState:
    """Holds the encoder once loaded, or the load error if loading failed."""

    def __init__(self, model_id: str):
        self.model_id = model_id
        self.encoder = None
        self.error: str | None = None
        self._lock = threading.Lock()

    def start_loading(self):
        thread = threading.Thread(target=self._load, daemon=True)
        thread.start()

    def _load(self):
        try:
            encoder = load_encoder(self.model_id)
        except Exception as exc:
            with self._lock:
                self.error = f"{type(exc).__name__}: {exc}"
            return
        with self._lock:
            self.encoder = encoder


def create_app(
    model_id: str | None = None,
    max_batch: int | None = None,
    debug_json: bool | None = None,
) -> FastAPI:
    """Build the service app; arguments default to the environment."""
    if model_id is None:
        model_id = os.environ.get("MODEL_ID", DEFAULT_MODEL_ID)
    if max_batch is None:
        max_batch = int(os.environ.get("MAX_BATCH", str(SCHEMA_BATCH_LIMIT)))
    if debug_json is None:
        debug_json = os.environ.get("DEBUG_JSON", "").lower() in ("1", "true", "yes")
    if not 1 <= max_batch <= SCHEMA_BATCH_LIMIT:
        raise ValueError(f"MAX_BATCH must be in 1..{SCHEMA_BATCH_LIMIT}")

    state = _EncoderState(model_id)

    async def lifespan(app: FastAPI):
        state.start_loading()
        yield

    app = FastAPI(title="embed-service", lifespan=lifespan)

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400, content={"detail": jsonable_encoder(exc.errors())}
        )

    def ready_encoder():
        if state.encoder is None:
            detail = state.error or "model is loading"
            raise HTTPException(status_code=503, detail=detail)
        return state.encoder

    @app.get("/v1/health")
    def health():
        if state.encoder is None:
            body = {"status": "error" if state.error else "loading"}
            if state.error:
                body["detail"] = state.error
            return JSONResponse(status_code=503, content=body)
        return {
            "status": "ok",
            "model_id": state.encoder.model_id,
            "dimension": state.encoder.dimension,
        }

    @app.post("/v1/embed")
    def embed(request: EmbedRequest):
        encoder = ready_encoder()
        if len(request.texts) > max_batch:
            raise HTTPException(
                status_code=400,
                detail=f"batch of {len(request.texts)} exceeds limit {max_batch}",
            )
        if request.encoding == "json" and not debug_json:
            raise HTTPException(
                status_code=400, detail="JSON encoding requires DEBUG_JSON=1"
            )
        for i, text in enumerate(request.texts):
            size = len(text.encode("utf-8"))
            if size > MAX_TEXT_BYTES:
                raise HTTPException(
                    status_code=413,
                    detail=f"text {i} is {size} bytes, limit {MAX_TEXT_BYTES}",
                )
        try:
            if request.mode == "tokens":
                embedded = encoder.embed_tokens(request.texts)
                if request.encoding == "b64":
                    results = [
                        {"tokens": tokens, "vectors_b64": _b64(vectors)}
                        for tokens, vectors in embedded
                    ]
                else:
                    results = [
                        {"tokens": tokens, "vectors": vectors.astype(float).tolist()}
                        for tokens, vectors in embedded
                    ]
            else:
                sentences = encoder.embed_sentences(request.texts)
                if request.encoding == "b64":
                    results = [{"vector_b64": _b64(vec)} for vec in sentences]
                else:
                    results = [{"vector": vec.astype(float).tolist()} for vec in sentences]
        except HTTPException:
            raise
        except Exception as exc:
            raise HTTPException(status_code=500, detail=f"model failure: {exc}") from exc
        return {
            "model_id": encoder.model_id,
            "dimension": encoder.dimension,
            "results": results,
        }

    return app


app = create_app()
