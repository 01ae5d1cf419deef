"""HTTP service exposing mask-to-echo generation.

Wire format: masks and images travel as base64-encoded single-channel
PNGs whose pixel values are the labels (request) or 8-bit gray levels
(response). All error responses are ``{"error": message}`` with an
appropriate status code. Models are immutable after startup, so request
handling is safely concurrent and ``/models`` is constant for the
process lifetime.
"""

from __future__ import annotations

import base64
import binascii
import sys
from pathlib import Path

import uvicorn
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .errors import CorruptLabelError, ModelNotLoadedError
from .inference import (
    GenerationRequest,
    ModelRegistry,
    decode_mask_png,
    encode_frame_png,
    generate_from_mask,
    load_model,
)


class GenerateBody(BaseModel):
    checkpoint: str
    mask_png_b64: str
    output_size: int | None = None


def create_app(registry: ModelRegistry) -> FastAPI:
    app = FastAPI(title="echogen inference service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(HTTPException)
    async def http_error(_request: Request, exc: HTTPException):
        return JSONResponse(status_code=exc.status_code, content={"error": str(exc.detail)})

    @app.exception_handler(RequestValidationError)
    async def validation_error(_request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=422, content={"error": str(exc.errors())})

    @app.get("/health")
    def health():
        return {"status": "ok", "models": len(registry)}

    @app.get("/models")
    def models():
        return [
            {
                "checkpoint": m.checkpoint_id,
                "condition_name": m.condition.name,
                "condition_labels": sorted(m.condition.labels),
                "input_size": m.input_size,
            }
            for m in registry.list()
        ]

    @app.post("/generate")
    def generate(body: GenerateBody):
        try:
            model = registry.get(body.checkpoint)
        except ModelNotLoadedError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        try:
            mask_bytes = base64.b64decode(body.mask_png_b64, validate=True)
            mask = decode_mask_png(mask_bytes)
        except CorruptLabelError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except (binascii.Error, ValueError, OSError) as exc:
            raise HTTPException(status_code=400, detail=f"mask payload is not a valid base64 PNG: {exc}")
        response = generate_from_mask(
            GenerationRequest(mask=mask, checkpoint_id=body.checkpoint, output_size=body.output_size),
            model,
        )
        return {
            "image_png_b64": base64.b64encode(encode_frame_png(response.image)).decode("ascii"),
            "latency_ms": response.latency_ms,
            "checkpoint": response.checkpoint_id,
            "condition_name": response.condition.name,
        }

    return app


def build_registry(checkpoint_paths: list[Path | str]) -> ModelRegistry:
    """Load every checkpoint that parses; report the ones that do not."""
    models = []
    for path in checkpoint_paths:
        try:
            models.append(load_model(path))
        except Exception as exc:
            print(f"warning: skipping {path}: {exc}", file=sys.stderr)
    return ModelRegistry(models)


def discover_checkpoints(models_dir: Path | str) -> list[Path]:
    return sorted(Path(models_dir).glob("*.pt"))


def serve(host: str, port: int, checkpoint_paths: list[Path | str]) -> None:
    registry = build_registry(checkpoint_paths)
    if len(registry) == 0:
        print("error: no loadable checkpoints; refusing to start", file=sys.stderr)
        raise SystemExit(1)
    for m in registry.list():
        print(f"loaded {m.checkpoint_id}: condition {m.condition.name} {sorted(m.condition.labels)}, "
              f"input {m.input_size}x{m.input_size}")
    uvicorn.run(create_app(registry), host=host, port=port)
