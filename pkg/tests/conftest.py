import numpy as np
import pytest
import torch

from echogen.dataio import ConditionSpec, EchoFrame, LabelMap, StudyRecord, make_synthetic_fixture
from echogen.networks import ModelConfig
from echogen.trainer import TrainConfig, init_training, load_training_tensors, save_checkpoint, train_step


def tiny_configs(condition_name="e", seed=0, iterations=50):
    """Smallest legal setup: 128 px (the 7-stage minimum), 8 base channels."""
    train = TrainConfig(
        batch_size=4,
        total_iterations=iterations,
        checkpoint_interval=25,
        seed=seed,
        condition_name=condition_name,
    )
    model = ModelConfig(image_size=128, gen_base_channels=8, disc_base_channels=8)
    return train, model


def records_to_batch(records, spec, idx=None):
    conditions, images = load_training_tensors(list(records), spec)
    if idx is not None:
        conditions, images = conditions[idx], images[idx]
    return conditions, images


@pytest.fixture(scope="session")
def fixture_records():
    return make_synthetic_fixture(count=8, seed=123, size=128)


@pytest.fixture(scope="session")
def tiny_checkpoints(tmp_path_factory, fixture_records):
    """Briefly-trained checkpoints for experiments 'a' and 'e' (for inference/server tests)."""
    out = tmp_path_factory.mktemp("ckpts")
    paths = {}
    for name in ("a", "e"):
        train_cfg, model_cfg = tiny_configs(condition_name=name, seed=11)
        state = init_training(train_cfg, model_cfg)
        conditions, images = records_to_batch(fixture_records, state.condition, idx=torch.arange(4))
        for _ in range(3):
            train_step(state, conditions, images)
        paths[name] = save_checkpoint(state, out / f"exp_{name}.pt")
    return paths


def random_label_map(rng, size=24):
    return LabelMap.from_array(rng.integers(0, 4, size=(size, size), dtype=np.uint8))


def make_record(patient_id, mask_pixels, image_pixels=None):
    mask = LabelMap.from_array(np.asarray(mask_pixels, dtype=np.uint8))
    if image_pixels is None:
        image_pixels = np.zeros(mask.pixels.shape, dtype=np.float32)
    return StudyRecord(patient_id=patient_id, image=EchoFrame(np.asarray(image_pixels, np.float32)), mask=mask)


def brute_force_filter(mask_pixels, labels):
    """Independent per-pixel membership oracle for condition filtering."""
    out = np.zeros_like(mask_pixels)
    h, w = mask_pixels.shape
    for i in range(h):
        for j in range(w):
            v = mask_pixels[i, j]
            out[i, j] = v if v in labels else 0
    return out
