"""Alternating adversarial training with checkpointing and the experiment runner.

Every step updates the discriminator first (on detached generator
output), then the generator; both use Adam. Given the seeds, the data
and the configs, a full run is deterministic on a single device.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np
import torch
import yaml

from . import dataio
from .dataio import ConditionSpec, SplitManifest, StudyRecord
from .errors import DivergenceError, EmptyDatasetError, IncompatibleCheckpointError, InvalidConfigError
from .networks import Discriminator, Generator, ModelConfig, build_discriminator, build_generator
from .objectives import LossReport, d_loss, g_adv_loss, g_total_loss, recon_loss

CHECKPOINT_FORMAT_VERSION = 1
LOSS_LOG_NAME = "loss_log.csv"


@dataclass(frozen=True)
class TrainConfig:
    lr_generator: float = 0.00013
    lr_discriminator: float = 0.00015
    batch_size: int = 8
    total_iterations: int = 100_000
    adv_weight: float = 0.01
    adam_beta1: float = 0.5
    adam_beta2: float = 0.999
    checkpoint_interval: int = 10_000
    seed: int = 0
    condition_name: str = "e"

    def __post_init__(self):
        if self.lr_generator <= 0 or self.lr_discriminator < 0:
            raise InvalidConfigError("learning rates must be positive (discriminator may be 0 for ablations)")
        if self.total_iterations < 1:
            raise InvalidConfigError(f"total_iterations must be >= 1, got {self.total_iterations}")
        if self.batch_size < 1:
            raise InvalidConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.adv_weight < 0:
            raise InvalidConfigError(f"adv_weight must be >= 0, got {self.adv_weight}")
        if self.checkpoint_interval < 1:
            raise InvalidConfigError("checkpoint_interval must be >= 1")
        if self.condition_name not in dataio.CONDITION_SETS:
            raise InvalidConfigError(f"condition_name must be one of {sorted(dataio.CONDITION_SETS)}")


@dataclass
class TrainingState:
    generator: Generator
    discriminator: Discriminator
    g_opt: torch.optim.Adam
    d_opt: torch.optim.Adam
    iteration: int
    train_config: TrainConfig
    model_config: ModelConfig
    condition: ConditionSpec
    manifest: SplitManifest | None = None


def init_training(train_config: TrainConfig, model_config: ModelConfig) -> TrainingState:
    """Fresh models and optimizers, deterministically seeded."""
    g = build_generator(model_config, train_config.seed)
    d = build_discriminator(model_config, train_config.seed + 1)
    g_opt = torch.optim.Adam(
        g.parameters(), lr=train_config.lr_generator, betas=(train_config.adam_beta1, train_config.adam_beta2)
    )
    d_opt = torch.optim.Adam(
        d.parameters(), lr=train_config.lr_discriminator, betas=(train_config.adam_beta1, train_config.adam_beta2)
    )
    return TrainingState(
        generator=g,
        discriminator=d,
        g_opt=g_opt,
        d_opt=d_opt,
        iteration=0,
        train_config=train_config,
        model_config=model_config,
        condition=ConditionSpec.from_name(train_config.condition_name),
    )


def _require_finite(state: TrainingState, term: str, value: float) -> None:
    if not math.isfinite(value):
        raise DivergenceError(state.iteration + 1, term, value)


def train_step(state: TrainingState, condition: torch.Tensor, image: torch.Tensor) -> LossReport:
    """One D update then one G update on a (condition, image) batch."""
    g, d = state.generator, state.discriminator
    g.train()
    d.train()
    fake = g(condition)

    # Discriminator: real pairs toward 1, detached fakes toward 0.
    state.d_opt.zero_grad()
    real_scores = d(torch.cat([condition, image], dim=1))
    fake_scores = d(torch.cat([condition, fake.detach()], dim=1))
    loss_d = d_loss(real_scores, fake_scores)
    loss_d.backward()
    state.d_opt.step()

    # Generator: adversarial term through the (just updated) discriminator
    # plus the L1 reconstruction term.
    state.g_opt.zero_grad()
    adv = g_adv_loss(d(torch.cat([condition, fake], dim=1)))
    recon = recon_loss(image, fake)
    total = g_total_loss(adv, recon, state.train_config.adv_weight)
    total.backward()
    state.g_opt.step()

    values = {"d_loss": loss_d.item(), "g_adv": adv.item(), "g_recon": recon.item(), "g_total": total.item()}
    for term, value in values.items():
        _require_finite(state, term, value)
    state.iteration += 1
    return LossReport(**values, adv_weight=state.train_config.adv_weight)


# ---------------------------------------------------------------------------
# Checkpointing
# ---------------------------------------------------------------------------

def save_checkpoint(state: TrainingState, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "iteration": state.iteration,
        "generator": state.generator.state_dict(),
        "discriminator": state.discriminator.state_dict(),
        "g_opt": state.g_opt.state_dict(),
        "d_opt": state.d_opt.state_dict(),
        "train_config": asdict(state.train_config),
        "model_config": asdict(state.model_config),
        "condition": {"name": state.condition.name, "labels": sorted(state.condition.labels)},
        "manifest": None
        if state.manifest is None
        else {
            "seed": state.manifest.seed,
            "train_ids": list(state.manifest.train_ids),
            "test_ids": list(state.manifest.test_ids),
        },
    }
    torch.save(payload, path)
    return path


def read_checkpoint_payload(path: Path | str) -> dict:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    try:
        payload = torch.load(path, map_location="cpu", weights_only=False)
    except Exception as exc:
        raise OSError(f"cannot read checkpoint {path}: {exc}") from exc
    if not isinstance(payload, dict) or "format_version" not in payload:
        raise OSError(f"checkpoint {path} has no format marker")
    if payload["format_version"] != CHECKPOINT_FORMAT_VERSION:
        raise IncompatibleCheckpointError(
            f"checkpoint {path} has format version {payload['format_version']}, "
            f"expected {CHECKPOINT_FORMAT_VERSION}"
        )
    return payload


def load_checkpoint(path: Path | str) -> TrainingState:
    """Rebuild a TrainingState that resumes bitwise-identically."""
    payload = read_checkpoint_payload(path)
    train_config = TrainConfig(**payload["train_config"])
    model_config = ModelConfig(**payload["model_config"])
    state = init_training(train_config, model_config)
    state.generator.load_state_dict(payload["generator"])
    state.discriminator.load_state_dict(payload["discriminator"])
    state.g_opt.load_state_dict(payload["g_opt"])
    state.d_opt.load_state_dict(payload["d_opt"])
    state.iteration = payload["iteration"]
    if payload.get("manifest"):
        m = payload["manifest"]
        state.manifest = SplitManifest(seed=m["seed"], train_ids=m["train_ids"], test_ids=m["test_ids"])
    return state


# ---------------------------------------------------------------------------
# Experiment runner
# ---------------------------------------------------------------------------

def load_training_tensors(
    records: list[StudyRecord], spec: ConditionSpec
) -> tuple[torch.Tensor, torch.Tensor]:
    conditions, images = dataio.stack_condition_pairs(records, spec)
    return torch.from_numpy(conditions).unsqueeze(1), torch.from_numpy(images).unsqueeze(1)


def run_experiment(
    train_config: TrainConfig,
    model_config: ModelConfig,
    manifest: SplitManifest,
    data_root: Path | str,
    out_dir: Path | str,
    resume: Path | str | None = None,
    log_every: int = 100,
) -> Path:
    """Train one condition experiment on the manifest's train split.

    Returns the path of the final checkpoint. Periodic checkpoints and
    the per-iteration loss log are written into out_dir.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not manifest.train_ids:
        raise EmptyDatasetError("manifest has no train ids")

    if resume is not None:
        state = load_checkpoint(resume)
        train_config, model_config = state.train_config, state.model_config
    else:
        state = init_training(train_config, model_config)
    state.manifest = manifest

    records = [
        dataio.preprocess(dataio.load_study(data_root, pid), size=model_config.image_size)
        for pid in manifest.train_ids
    ]
    conditions, images = load_training_tensors(records, state.condition)

    # The batch order is a pure function of (seed, step count), so a
    # resumed run skips exactly the batches it already consumed.
    index_stream = dataio.batch_index_stream(len(records), train_config.batch_size, train_config.seed)
    index_stream = itertools.islice(index_stream, state.iteration, None)

    log_path = out_dir / LOSS_LOG_NAME
    log_mode = "a" if resume is not None and log_path.exists() else "w"
    with open(log_path, log_mode) as log:
        if log_mode == "w":
            log.write(LossReport.CSV_HEADER + "\n")
        while state.iteration < train_config.total_iterations:
            idx = torch.from_numpy(np.ascontiguousarray(next(index_stream)))
            report = train_step(state, conditions[idx], images[idx])
            log.write(report.csv_row(state.iteration) + "\n")
            if log_every and state.iteration % log_every == 0:
                print(
                    f"[{train_config.condition_name}] iter {state.iteration}/{train_config.total_iterations} "
                    f"d={report.d_loss:.4f} g_adv={report.g_adv:.4f} g_recon={report.g_recon:.4f}",
                    flush=True,
                )
            if state.iteration % train_config.checkpoint_interval == 0:
                save_checkpoint(state, out_dir / f"checkpoint_{state.iteration:07d}.pt")
    final_path = save_checkpoint(state, out_dir / "checkpoint_final.pt")
    return final_path


def desk_preset(condition_name: str = "e", seed: int = 0) -> tuple[TrainConfig, ModelConfig]:
    """Reduced-cost preset for desk-scale runs and tests.

    Keeps the full 7-stage generator / 5-layer discriminator topology
    and all training mechanics; shrinks resolution to 128, batch to 4,
    channel width to 32 and the schedule to 2000 iterations so a run
    fits in minutes on a laptop CPU.
    """
    train = TrainConfig(
        batch_size=4,
        total_iterations=2000,
        checkpoint_interval=500,
        condition_name=condition_name,
        seed=seed,
    )
    model = ModelConfig(image_size=128, gen_base_channels=32, disc_base_channels=32)
    return train, model


# ---------------------------------------------------------------------------
# Config file I/O
# ---------------------------------------------------------------------------

def save_config(path: Path | str, train_config: TrainConfig, model_config: ModelConfig) -> None:
    payload = {"train": asdict(train_config), "model": asdict(model_config)}
    Path(path).write_text(yaml.safe_dump(payload, sort_keys=False))


def load_config(path: Path | str) -> tuple[TrainConfig, ModelConfig]:
    """Read a config file; unknown keys fail loudly, missing keys take defaults."""
    payload = yaml.safe_load(Path(path).read_text()) or {}
    unknown_sections = set(payload) - {"train", "model"}
    if unknown_sections:
        raise InvalidConfigError(f"unknown config sections: {sorted(unknown_sections)}")
    try:
        train_config = TrainConfig(**(payload.get("train") or {}))
        model_config = ModelConfig(**(payload.get("model") or {}))
    except TypeError as exc:
        raise InvalidConfigError(f"bad config field in {path}: {exc}") from exc
    return train_config, model_config


def with_condition(train_config: TrainConfig, condition_name: str) -> TrainConfig:
    return replace(train_config, condition_name=condition_name)
