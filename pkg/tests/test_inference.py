import numpy as np
import pytest

from echogen import dataio
from echogen.dataio import LabelMap, filter_condition, make_synthetic_fixture, resize_mask
from echogen.errors import CorruptLabelError, ModelNotLoadedError
from echogen.inference import (
    GenerationRequest,
    ModelRegistry,
    cli_generate,
    decode_mask_png,
    encode_frame_png,
    generate_from_mask,
    load_model,
)


@pytest.fixture(scope="module")
def model(tiny_checkpoints):
    return load_model(tiny_checkpoints["e"])


@pytest.fixture(scope="module")
def model_a(tiny_checkpoints):
    return load_model(tiny_checkpoints["a"])


def sample_mask(size=128, seed=0):
    return make_synthetic_fixture(count=1, seed=seed, size=size)[0].mask


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

def test_load_model_metadata(model, model_a, tiny_checkpoints):
    assert model.checkpoint_id == tiny_checkpoints["e"].stem
    assert model.condition.name == "e"
    assert model.input_size == 128
    assert model_a.condition.labels == {1}
    assert not any(p.requires_grad for p in model.generator.parameters())


def test_registry_lookup(model, model_a):
    registry = ModelRegistry([model, model_a])
    assert registry.get(model.checkpoint_id) is model
    assert len(registry) == 2
    with pytest.raises(ModelNotLoadedError):
        registry.get("nope")


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------

def test_generation_deterministic(model):
    request = GenerationRequest(mask=sample_mask())
    a = generate_from_mask(request, model)
    b = generate_from_mask(request, model)
    assert np.array_equal(a.image.pixels, b.image.pixels)
    assert a.image.pixels.shape == (128, 128)
    assert a.latency_ms > 0


def test_generation_output_range(model):
    response = generate_from_mask(GenerationRequest(mask=sample_mask(seed=5)), model)
    assert response.image.pixels.min() >= 0.0
    assert response.image.pixels.max() <= 1.0


def test_out_of_spec_labels_are_zeroed_not_rejected(model_a):
    mask = sample_mask()  # contains labels 1, 2, 3
    assert {2, 3} <= mask.value_set()
    full = generate_from_mask(GenerationRequest(mask=mask), model_a)
    prefiltered = filter_condition(mask, model_a.condition)
    manual = generate_from_mask(GenerationRequest(mask=prefiltered), model_a)
    assert np.array_equal(full.image.pixels, manual.image.pixels)


def test_all_zero_mask_is_valid(model):
    response = generate_from_mask(GenerationRequest(mask=LabelMap.from_array(np.zeros((128, 128), np.uint8))), model)
    assert response.image.pixels.shape == (128, 128)


def test_arbitrary_mask_size_resized(model):
    big = sample_mask(size=256, seed=3)
    response = generate_from_mask(GenerationRequest(mask=big), model)
    assert response.image.pixels.shape == (128, 128)
    resized_first = generate_from_mask(GenerationRequest(mask=resize_mask(big, 128)), model)
    assert np.array_equal(response.image.pixels, resized_first.image.pixels)


def test_requested_output_size(model):
    response = generate_from_mask(GenerationRequest(mask=sample_mask(), output_size=256), model)
    assert response.image.pixels.shape == (256, 256)
    assert response.image.pixels.min() >= 0.0
    assert response.image.pixels.max() <= 1.0


# ---------------------------------------------------------------------------
# Wire codecs
# ---------------------------------------------------------------------------

def test_mask_png_roundtrip():
    mask = sample_mask(seed=9)
    decoded = decode_mask_png(dataio.encode_gray_png(mask.pixels))
    assert np.array_equal(decoded.pixels, mask.pixels)


def test_mask_png_rejects_bad_labels():
    with pytest.raises(CorruptLabelError):
        decode_mask_png(dataio.encode_gray_png(np.full((8, 8), 9, np.uint8)))


def test_frame_quantization_idempotent(model):
    response = generate_from_mask(GenerationRequest(mask=sample_mask()), model)
    first = encode_frame_png(response.image)
    reread = dataio.decode_gray_png(first)
    second = encode_frame_png(dataio.EchoFrame.from_uint8(reread))
    assert first == second  # byte-identical after one quantization pass


# ---------------------------------------------------------------------------
# CLI generation
# ---------------------------------------------------------------------------

def test_cli_generate_single_file(tmp_path, tiny_checkpoints):
    mask_path = tmp_path / "mask.png"
    dataio.write_gray_png(mask_path, sample_mask().pixels)
    out_path = tmp_path / "echo.png"
    code = cli_generate(mask_path, tiny_checkpoints["e"], out_path)
    assert code == 0
    out = dataio.read_gray_png(out_path)
    assert out.shape == (128, 128)
    assert out.dtype == np.uint8
    assert len(np.unique(out)) > 1


def test_cli_generate_missing_checkpoint(tmp_path, capsys):
    mask_path = tmp_path / "mask.png"
    dataio.write_gray_png(mask_path, sample_mask().pixels)
    code = cli_generate(mask_path, tmp_path / "no_such.pt", tmp_path / "out.png")
    assert code == 2
    assert "checkpoint" in capsys.readouterr().err


def test_cli_generate_bad_mask(tmp_path, tiny_checkpoints, capsys):
    mask_path = tmp_path / "bad.png"
    dataio.write_gray_png(mask_path, np.full((64, 64), 200, np.uint8))
    code = cli_generate(mask_path, tiny_checkpoints["e"], tmp_path / "out.png")
    assert code == 1
    assert "label" in capsys.readouterr().err


def test_cli_generate_batch_mode(tmp_path, tiny_checkpoints):
    mask_dir = tmp_path / "masks"
    mask_dir.mkdir()
    stems = []
    for i in range(3):
        stem = f"case{i}"
        dataio.write_gray_png(mask_dir / f"{stem}.png", sample_mask(seed=i).pixels)
        stems.append(stem)
    out_dir = tmp_path / "outs"
    code = cli_generate(mask_dir, tiny_checkpoints["e"], out_dir)
    assert code == 0
    assert sorted(p.stem for p in out_dir.glob("*.png")) == stems
