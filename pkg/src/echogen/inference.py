"""Mask-to-echo generation from trained checkpoints.

A loaded model is immutable: the generator sits in eval mode, so for a
fixed checkpoint the generated frame is a pure function of the request
mask. Incoming masks are resized (nearest-neighbor) to the model's
input size and defensively filtered through the condition set the model
was trained with, so a hand-drawn mask containing out-of-spec labels
simply has those structures ignored.
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from . import dataio
from .dataio import ConditionSpec, EchoFrame, LabelMap
from .errors import ModelNotLoadedError
from .networks import Generator, ModelConfig, build_generator
from .trainer import read_checkpoint_payload


@dataclass
class LoadedModel:
    checkpoint_id: str
    generator: Generator
    condition: ConditionSpec
    model_config: ModelConfig

    @property
    def input_size(self) -> int:
        return self.model_config.image_size


@dataclass
class GenerationRequest:
    mask: LabelMap
    checkpoint_id: str = ""
    output_size: int | None = None  # None keeps the model's native size


@dataclass
class GenerationResponse:
    image: EchoFrame
    checkpoint_id: str
    condition: ConditionSpec
    latency_ms: float


def load_model(path: Path | str, checkpoint_id: str | None = None) -> LoadedModel:
    """Load a checkpoint's generator for inference (eval mode, frozen)."""
    path = Path(path)
    payload = read_checkpoint_payload(path)
    config = ModelConfig(**payload["model_config"])
    generator = build_generator(config, seed=0)
    generator.load_state_dict(payload["generator"])
    generator.eval()
    for p in generator.parameters():
        p.requires_grad_(False)
    condition = ConditionSpec.from_name(payload["condition"]["name"])
    return LoadedModel(
        checkpoint_id=checkpoint_id or path.stem,
        generator=generator,
        condition=condition,
        model_config=config,
    )


class ModelRegistry:
    """Immutable id -> model lookup for the service."""

    def __init__(self, models: list[LoadedModel]):
        self._models = {m.checkpoint_id: m for m in models}

    def get(self, checkpoint_id: str) -> LoadedModel:
        if checkpoint_id not in self._models:
            raise ModelNotLoadedError(f"no loaded checkpoint {checkpoint_id!r}; have {sorted(self._models)}")
        return self._models[checkpoint_id]

    def list(self) -> list[LoadedModel]:
        return [self._models[k] for k in sorted(self._models)]

    def __len__(self) -> int:
        return len(self._models)


def generate_from_mask(request: GenerationRequest, model: LoadedModel) -> GenerationResponse:
    """Deterministically synthesize one echo frame from a label mask."""
    start = time.perf_counter()
    mask = request.mask
    if mask.pixels.shape != (model.input_size, model.input_size):
        mask = dataio.resize_mask(mask, model.input_size)
    mask = dataio.filter_condition(mask, model.condition)
    condition = torch.from_numpy(mask.pixels.astype(np.float32))[None, None]
    with torch.no_grad():
        frame = model.generator(condition)[0, 0].numpy()
    result = EchoFrame(pixels=frame)
    if request.output_size is not None and request.output_size != model.input_size:
        result = dataio.resize_frame(result, request.output_size)
    latency_ms = (time.perf_counter() - start) * 1000.0
    return GenerationResponse(
        image=result,
        checkpoint_id=model.checkpoint_id,
        condition=model.condition,
        latency_ms=latency_ms,
    )


# ---------------------------------------------------------------------------
# Wire codecs (base64 payloads carry PNG bytes; see server)
# ---------------------------------------------------------------------------

def decode_mask_png(data: bytes) -> LabelMap:
    return LabelMap.from_array(dataio.decode_gray_png(data), source="mask payload")


def encode_frame_png(frame: EchoFrame) -> bytes:
    return dataio.encode_gray_png(dataio.quantize_to_uint8(frame.pixels))


# ---------------------------------------------------------------------------
# CLI generation
# ---------------------------------------------------------------------------

def _generate_file(mask_path: Path, model: LoadedModel, out_path: Path) -> None:
    mask = LabelMap.from_array(dataio.read_gray_png(mask_path), source=str(mask_path))
    response = generate_from_mask(GenerationRequest(mask=mask), model)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    dataio.write_gray_png(out_path, dataio.quantize_to_uint8(response.image.pixels))


def cli_generate(mask_path: Path | str, checkpoint_path: Path | str, out_path: Path | str) -> int:
    """Generate echo frame(s) for one mask file or a directory of masks.

    In batch mode every ``*.png`` under the mask directory produces an
    output with the same stem under the output directory. Returns a
    process exit code: 0 on success, 2 for a missing checkpoint, 1 for
    any other failure.
    """
    mask_path, checkpoint_path, out_path = Path(mask_path), Path(checkpoint_path), Path(out_path)
    if not checkpoint_path.exists():
        print(f"error: checkpoint not found: {checkpoint_path}", file=sys.stderr)
        return 2
    try:
        model = load_model(checkpoint_path)
        if mask_path.is_dir():
            mask_files = sorted(mask_path.glob("*.png"))
            if not mask_files:
                print(f"error: no *.png masks under {mask_path}", file=sys.stderr)
                return 1
            for mask_file in mask_files:
                _generate_file(mask_file, model, out_path / f"{mask_file.stem}.png")
        else:
            _generate_file(mask_path, model, out_path)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0
