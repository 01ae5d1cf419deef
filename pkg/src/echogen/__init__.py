"""Patch-conditional GAN for synthesizing 4CH echocardiogram frames from segmentation masks."""

from .dataio import (
    CONDITION_SETS,
    ConditionSpec,
    EchoFrame,
    LabelMap,
    SplitManifest,
    StudyRecord,
    batch_iterator,
    filter_condition,
    load_study,
    make_split,
    make_synthetic_fixture,
    preprocess,
)
from .inference import GenerationRequest, GenerationResponse, LoadedModel, generate_from_mask, load_model
from .networks import Discriminator, Generator, ModelConfig, build_discriminator, build_generator
from .objectives import LossReport, d_loss, g_adv_loss, g_total_loss, recon_loss
from .trainer import TrainConfig, desk_preset, init_training, load_checkpoint, run_experiment, save_checkpoint, train_step

__version__ = "0.1.0"

__all__ = [
    "CONDITION_SETS",
    "ConditionSpec",
    "Discriminator",
    "EchoFrame",
    "GenerationRequest",
    "GenerationResponse",
    "Generator",
    "LabelMap",
    "LoadedModel",
    "LossReport",
    "ModelConfig",
    "SplitManifest",
    "StudyRecord",
    "TrainConfig",
    "batch_iterator",
    "build_discriminator",
    "build_generator",
    "d_loss",
    "desk_preset",
    "filter_condition",
    "g_adv_loss",
    "g_total_loss",
    "generate_from_mask",
    "init_training",
    "load_checkpoint",
    "load_model",
    "load_study",
    "make_split",
    "make_synthetic_fixture",
    "preprocess",
    "recon_loss",
    "run_experiment",
    "save_checkpoint",
    "train_step",
    "__version__",
]
