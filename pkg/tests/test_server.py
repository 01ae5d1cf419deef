import base64

import numpy as np
import pytest
from fastapi.testclient import TestClient

from echogen import dataio
from echogen.dataio import make_synthetic_fixture
from echogen.inference import GenerationRequest, generate_from_mask, load_model
from echogen.server import build_registry, create_app, discover_checkpoints


@pytest.fixture(scope="module")
def client(tiny_checkpoints):
    registry = build_registry([tiny_checkpoints["a"], tiny_checkpoints["e"]])
    return TestClient(create_app(registry))


def mask_b64(seed=0, size=128):
    mask = make_synthetic_fixture(count=1, seed=seed, size=size)[0].mask
    return base64.b64encode(dataio.encode_gray_png(mask.pixels)).decode("ascii")


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "ok"


def test_models_inventory(client, tiny_checkpoints):
    response = client.get("/models")
    assert response.status_code == 200
    entries = {e["checkpoint"]: e for e in response.json()}
    assert set(entries) == {tiny_checkpoints["a"].stem, tiny_checkpoints["e"].stem}
    exp_a = entries[tiny_checkpoints["a"].stem]
    assert exp_a["condition_name"] == "a"
    assert exp_a["condition_labels"] == [1]
    assert exp_a["input_size"] == 128


def test_models_constant_across_requests(client):
    assert client.get("/models").json() == client.get("/models").json()


def test_generate_roundtrip(client, tiny_checkpoints):
    checkpoint = tiny_checkpoints["e"].stem
    body = {"checkpoint": checkpoint, "mask_png_b64": mask_b64()}
    response = client.post("/generate", json=body)
    assert response.status_code == 200
    payload = response.json()
    assert payload["checkpoint"] == checkpoint
    assert payload["latency_ms"] > 0
    image = dataio.decode_gray_png(base64.b64decode(payload["image_png_b64"]))
    assert image.shape == (128, 128)
    assert image.dtype == np.uint8

    # end-to-end oracle: the wire result equals direct in-process generation
    model = load_model(tiny_checkpoints["e"])
    mask = make_synthetic_fixture(count=1, seed=0, size=128)[0].mask
    direct = generate_from_mask(GenerationRequest(mask=mask), model)
    assert np.array_equal(image, dataio.quantize_to_uint8(direct.image.pixels))


def test_generate_is_deterministic_over_the_wire(client, tiny_checkpoints):
    body = {"checkpoint": tiny_checkpoints["e"].stem, "mask_png_b64": mask_b64(seed=4)}
    first = client.post("/generate", json=body).json()["image_png_b64"]
    second = client.post("/generate", json=body).json()["image_png_b64"]
    assert first == second


def test_generate_unknown_checkpoint(client):
    response = client.post("/generate", json={"checkpoint": "ghost", "mask_png_b64": mask_b64()})
    assert response.status_code == 404
    assert "error" in response.json()


def test_generate_bad_base64(client, tiny_checkpoints):
    response = client.post(
        "/generate", json={"checkpoint": tiny_checkpoints["e"].stem, "mask_png_b64": "@@not base64@@"}
    )
    assert response.status_code == 400
    assert "error" in response.json()


def test_generate_bad_labels(client, tiny_checkpoints):
    bad = base64.b64encode(dataio.encode_gray_png(np.full((32, 32), 7, np.uint8))).decode("ascii")
    response = client.post("/generate", json={"checkpoint": tiny_checkpoints["e"].stem, "mask_png_b64": bad})
    assert response.status_code == 400
    assert "label" in response.json()["error"]


def test_generate_missing_field(client):
    response = client.post("/generate", json={"mask_png_b64": mask_b64()})
    assert response.status_code == 422
    assert "error" in response.json()


def test_discover_and_skip_unloadable(tmp_path, tiny_checkpoints, capsys):
    import shutil

    shutil.copy(tiny_checkpoints["a"], tmp_path / "good.pt")
    (tmp_path / "broken.pt").write_bytes(b"nope")
    paths = discover_checkpoints(tmp_path)
    assert [p.name for p in paths] == ["broken.pt", "good.pt"]
    registry = build_registry(paths)
    assert len(registry) == 1
    assert "skipping" in capsys.readouterr().err
