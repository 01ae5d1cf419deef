"""Dataset ingestion, preprocessing, condition filtering, splits and batching.

Studies live on disk as one directory per patient holding two 8-bit
single-channel PNGs: the end-diastolic 4CH frame and its segmentation
mask. Mask pixel values ARE the labels (0 background, 1 left ventricle,
2 myocardium, 3 left atrium). A thin adapter also accepts the
``<id>_4CH_ED.png`` / ``<id>_4CH_ED_gt.png`` naming used by PNG exports
of the CAMUS corpus.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
import yaml
from PIL import Image

from .errors import (
    CorruptLabelError,
    EmptyDatasetError,
    InvalidDimensionsError,
    InvalidSplitError,
)

LABEL_BACKGROUND = 0
LABEL_VENTRICLE = 1
LABEL_MYOCARDIUM = 2
LABEL_ATRIUM = 3
VALID_LABELS = frozenset({LABEL_BACKGROUND, LABEL_VENTRICLE, LABEL_MYOCARDIUM, LABEL_ATRIUM})

# The five condition experiments: which labels survive in the mask fed
# to the generator.
CONDITION_SETS = {
    "a": frozenset({LABEL_VENTRICLE}),
    "b": frozenset({LABEL_ATRIUM}),
    "c": frozenset({LABEL_VENTRICLE, LABEL_MYOCARDIUM}),
    "d": frozenset({LABEL_VENTRICLE, LABEL_ATRIUM}),
    "e": frozenset({LABEL_VENTRICLE, LABEL_MYOCARDIUM, LABEL_ATRIUM}),
}

WORKING_SIZE = 256

# Filenames for the canonical per-patient layout.
IMAGE_FILENAME = "ed_image.png"
MASK_FILENAME = "ed_mask.png"


@dataclass(frozen=True)
class ConditionSpec:
    """Subset of anatomical labels kept as the generator's condition."""

    name: str
    labels: frozenset[int]

    def __post_init__(self):
        if self.name not in CONDITION_SETS:
            raise ValueError(f"unknown condition spec {self.name!r}; expected one of {sorted(CONDITION_SETS)}")
        if self.labels != CONDITION_SETS[self.name]:
            raise ValueError(f"labels {sorted(self.labels)} do not match spec {self.name!r}")

    @classmethod
    def from_name(cls, name: str) -> "ConditionSpec":
        if name not in CONDITION_SETS:
            raise ValueError(f"unknown condition spec {name!r}; expected one of {sorted(CONDITION_SETS)}")
        return cls(name=name, labels=CONDITION_SETS[name])


@dataclass
class LabelMap:
    """Integer-labeled segmentation raster with values in {0,1,2,3}."""

    pixels: np.ndarray  # uint8, shape (H, W)

    @classmethod
    def from_array(cls, pixels: np.ndarray, source=None) -> "LabelMap":
        pixels = np.asarray(pixels)
        if pixels.ndim != 2:
            raise InvalidDimensionsError(f"label map must be 2-D, got shape {pixels.shape}")
        if pixels.size == 0:
            raise InvalidDimensionsError("label map has zero size")
        bad = np.setdiff1d(np.unique(pixels), sorted(VALID_LABELS))
        if bad.size:
            raise CorruptLabelError(bad[0], source=source)
        return cls(pixels=pixels.astype(np.uint8))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def value_set(self) -> set[int]:
        return set(int(v) for v in np.unique(self.pixels))


@dataclass
class EchoFrame:
    """Grayscale image raster with intensities in [0, 1]."""

    pixels: np.ndarray  # float32, shape (H, W)

    @classmethod
    def from_uint8(cls, pixels: np.ndarray) -> "EchoFrame":
        pixels = np.asarray(pixels)
        if pixels.ndim != 2 or pixels.size == 0:
            raise InvalidDimensionsError(f"image must be a non-empty 2-D raster, got shape {pixels.shape}")
        return cls(pixels=(pixels.astype(np.float32) / 255.0))

    @classmethod
    def from_float(cls, pixels: np.ndarray) -> "EchoFrame":
        pixels = np.asarray(pixels, dtype=np.float32)
        if pixels.ndim != 2 or pixels.size == 0:
            raise InvalidDimensionsError(f"image must be a non-empty 2-D raster, got shape {pixels.shape}")
        if pixels.min() < 0.0 or pixels.max() > 1.0:
            raise ValueError("image intensities must lie in [0, 1]")
        return cls(pixels=pixels)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass
class StudyRecord:
    """One patient study: the ED frame and its segmentation mask."""

    patient_id: str
    image: EchoFrame
    mask: LabelMap
    frame_tag: str = "ED"

    def __post_init__(self):
        if self.image.pixels.shape != self.mask.pixels.shape:
            raise InvalidDimensionsError(
                f"image {self.image.pixels.shape} and mask {self.mask.pixels.shape} "
                f"differ for patient {self.patient_id}"
            )
        if self.frame_tag != "ED":
            raise ValueError(f"only ED frames are supported, got {self.frame_tag!r}")


@dataclass
class SplitManifest:
    """Persistent train/test id split shared by all experiments."""

    seed: int
    train_ids: list[str]
    test_ids: list[str]

    def __post_init__(self):
        overlap = set(self.train_ids) & set(self.test_ids)
        if overlap:
            raise InvalidSplitError(f"train and test ids overlap: {sorted(overlap)[:5]}")

    def save(self, path: Path | str) -> None:
        payload = {"seed": self.seed, "train_ids": list(self.train_ids), "test_ids": list(self.test_ids)}
        Path(path).write_text(yaml.safe_dump(payload, sort_keys=False))

    @classmethod
    def load(cls, path: Path | str) -> "SplitManifest":
        payload = yaml.safe_load(Path(path).read_text())
        return cls(
            seed=int(payload["seed"]),
            train_ids=[str(i) for i in payload["train_ids"]],
            test_ids=[str(i) for i in payload["test_ids"]],
        )


# ---------------------------------------------------------------------------
# Raster I/O
# ---------------------------------------------------------------------------

def quantize_to_uint8(pixels: np.ndarray) -> np.ndarray:
    """Map [0,1] floats to 8-bit gray levels, rounding half up."""
    return np.clip(np.floor(np.asarray(pixels, dtype=np.float64) * 255.0 + 0.5), 0, 255).astype(np.uint8)


def read_gray_png(path: Path | str) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("L"))


def write_gray_png(path: Path | str, pixels: np.ndarray) -> None:
    Image.fromarray(np.asarray(pixels, dtype=np.uint8), mode="L").save(path, format="PNG")


def encode_gray_png(pixels: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(np.asarray(pixels, dtype=np.uint8), mode="L").save(buf, format="PNG")
    return buf.getvalue()


def decode_gray_png(data: bytes) -> np.ndarray:
    with Image.open(io.BytesIO(data)) as im:
        return np.asarray(im.convert("L"))


def _study_paths(root: Path, patient_id: str) -> tuple[Path, Path]:
    """Resolve image/mask paths, accepting the canonical and CAMUS-PNG layouts."""
    study_dir = root / patient_id
    canonical = (study_dir / IMAGE_FILENAME, study_dir / MASK_FILENAME)
    if canonical[0].exists() and canonical[1].exists():
        return canonical
    camus = (study_dir / f"{patient_id}_4CH_ED.png", study_dir / f"{patient_id}_4CH_ED_gt.png")
    if camus[0].exists() and camus[1].exists():
        return camus
    missing = canonical[0] if not canonical[0].exists() else canonical[1]
    raise FileNotFoundError(f"no ED image/mask pair for {patient_id!r} under {study_dir} (tried {missing.name})")


def load_study(root: Path | str, patient_id: str) -> StudyRecord:
    """Read one study's raw (unresized) ED frame and mask from disk."""
    image_path, mask_path = _study_paths(Path(root), patient_id)
    image = EchoFrame.from_uint8(read_gray_png(image_path))
    mask = LabelMap.from_array(read_gray_png(mask_path), source=str(mask_path))
    return StudyRecord(patient_id=patient_id, image=image, mask=mask)


def list_patient_ids(root: Path | str) -> list[str]:
    """All patient ids that have a loadable ED image/mask pair under root."""
    root = Path(root)
    ids = []
    for entry in sorted(root.iterdir()) if root.exists() else []:
        if not entry.is_dir():
            continue
        try:
            _study_paths(root, entry.name)
        except FileNotFoundError:
            continue
        ids.append(entry.name)
    return ids


def write_study(root: Path | str, record: StudyRecord) -> Path:
    """Materialize a record in the canonical per-patient layout."""
    study_dir = Path(root) / record.patient_id
    study_dir.mkdir(parents=True, exist_ok=True)
    write_gray_png(study_dir / IMAGE_FILENAME, quantize_to_uint8(record.image.pixels))
    write_gray_png(study_dir / MASK_FILENAME, record.mask.pixels)
    return study_dir


# ---------------------------------------------------------------------------
# Preprocessing
# ---------------------------------------------------------------------------

def resize_frame(frame: EchoFrame, size: int) -> EchoFrame:
    """Bilinear resize; bilinear interpolation keeps values inside [0, 1]."""
    im = Image.fromarray(frame.pixels, mode="F").resize((size, size), Image.BILINEAR)
    return EchoFrame(pixels=np.asarray(im, dtype=np.float32))


def resize_mask(mask: LabelMap, size: int) -> LabelMap:
    """Nearest-neighbor resize so no interpolated labels appear."""
    im = Image.fromarray(mask.pixels, mode="L").resize((size, size), Image.NEAREST)
    return LabelMap(pixels=np.asarray(im, dtype=np.uint8))


def preprocess(record: StudyRecord, size: int = WORKING_SIZE) -> StudyRecord:
    """Resize a study to the working resolution.

    Intensities were already mapped to [0,1] at load time (v/255 for
    8-bit sources); beyond the resize no other transformation is applied
    and no augmentation happens anywhere in the pipeline.
    """
    if record.image.height == 0 or record.image.width == 0:
        raise InvalidDimensionsError(f"study {record.patient_id} has zero-sized rasters")
    return StudyRecord(
        patient_id=record.patient_id,
        image=resize_frame(record.image, size),
        mask=resize_mask(record.mask, size),
        frame_tag=record.frame_tag,
    )


def filter_condition(mask: LabelMap, spec: ConditionSpec) -> LabelMap:
    """Zero every pixel whose label is outside the spec; keep raw values."""
    keep = np.isin(mask.pixels, sorted(spec.labels))
    return LabelMap(pixels=np.where(keep, mask.pixels, 0).astype(np.uint8))


# ---------------------------------------------------------------------------
# Splitting
# ---------------------------------------------------------------------------

def make_split(ids: Sequence[str], seed: int, test_count: int = 22) -> SplitManifest:
    """Deterministic shuffle-split of patient ids.

    The manifest is meant to be persisted once and reused by every
    experiment, so the held-out cases stay identical across runs.
    """
    ids = list(ids)
    if test_count < 0 or test_count >= len(ids):
        raise InvalidSplitError(f"test_count {test_count} invalid for {len(ids)} ids")
    order = np.random.default_rng(seed).permutation(len(ids))
    test_ids = sorted(ids[i] for i in order[:test_count])
    train_ids = sorted(ids[i] for i in order[test_count:])
    return SplitManifest(seed=seed, train_ids=train_ids, test_ids=test_ids)


# ---------------------------------------------------------------------------
# Synthetic fixtures
# ---------------------------------------------------------------------------

# Base intensity per label for pseudo-echo rendering: blood pools (LV,
# LA) dark, myocardium bright, background mid-gray so the label-1 vs
# label-0 contrast stays well above 0.2.
_FIXTURE_INTENSITY = np.array([0.35, 0.08, 0.75, 0.12], dtype=np.float32)
_FIXTURE_SPECKLE_STD = 0.05
MIN_FIXTURE_SIZE = 32


def _draw_fixture_mask(rng: np.random.Generator, size: int) -> np.ndarray:
    """Cartoon 4CH anatomy: LV ellipse, myocardial ring, atrium below."""
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    cy = size * (0.30 + 0.10 * rng.random())
    cx = size * (0.40 + 0.15 * rng.random())
    ry = size * (0.14 + 0.06 * rng.random())
    rx = size * (0.09 + 0.05 * rng.random())
    tilt = (rng.random() - 0.5) * 0.5
    u = (xx - cx) * np.cos(tilt) - (yy - cy) * np.sin(tilt)
    v = (xx - cx) * np.sin(tilt) + (yy - cy) * np.cos(tilt)
    lv = (v / ry) ** 2 + (u / rx) ** 2 <= 1.0
    ring = 1.25 + 0.15 * rng.random()
    myo = ((v / (ry * ring)) ** 2 + (u / (rx * ring)) ** 2 <= 1.0) & ~lv
    a_cy = cy + ry * (1.8 + 0.3 * rng.random())
    a_ry = ry * (0.55 + 0.15 * rng.random())
    a_rx = rx * (0.8 + 0.2 * rng.random())
    atrium = ((yy - a_cy) / a_ry) ** 2 + ((xx - cx) / a_rx) ** 2 <= 1.0
    mask = np.zeros((size, size), dtype=np.uint8)
    mask[myo] = LABEL_MYOCARDIUM
    mask[atrium] = LABEL_ATRIUM
    mask[lv] = LABEL_VENTRICLE
    return mask


def make_synthetic_fixture(count: int, seed: int, size: int = 128) -> list[StudyRecord]:
    """Procedural studies for desk-scale tests; bit-reproducible from the arguments."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if size < MIN_FIXTURE_SIZE:
        raise InvalidDimensionsError(f"fixture size must be >= {MIN_FIXTURE_SIZE}, got {size}")
    rng = np.random.default_rng(seed)
    records = []
    for i in range(count):
        mask = _draw_fixture_mask(rng, size)
        base = _FIXTURE_INTENSITY[mask]
        speckle = rng.normal(0.0, _FIXTURE_SPECKLE_STD, mask.shape)
        image = np.clip(base + speckle, 0.0, 1.0).astype(np.float32)
        records.append(
            StudyRecord(
                patient_id=f"synth{i:04d}",
                image=EchoFrame(pixels=image),
                mask=LabelMap(pixels=mask),
            )
        )
    return records


def write_fixture_tree(root: Path | str, count: int, seed: int, size: int = 128) -> list[str]:
    """Generate fixtures and write them in the canonical on-disk layout."""
    records = make_synthetic_fixture(count, seed, size)
    for record in records:
        write_study(root, record)
    return [r.patient_id for r in records]


# ---------------------------------------------------------------------------
# Batching
# ---------------------------------------------------------------------------

def batch_index_stream(
    n_records: int, batch_size: int, seed: int, max_epochs: int | None = None
) -> Iterator[np.ndarray]:
    """Epoch-cycling shuffled index batches; partial final batches are dropped."""
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    if n_records == 0:
        raise EmptyDatasetError("no records to batch")
    if n_records < batch_size:
        raise EmptyDatasetError(f"{n_records} records cannot fill a batch of {batch_size}")
    rng = np.random.default_rng(seed)
    epoch = 0
    while max_epochs is None or epoch < max_epochs:
        order = rng.permutation(n_records)
        for start in range(0, n_records - batch_size + 1, batch_size):
            yield order[start : start + batch_size]
        epoch += 1


def stack_condition_pairs(
    records: Sequence[StudyRecord], spec: ConditionSpec
) -> tuple[np.ndarray, np.ndarray]:
    """Stack (filtered condition, target image) arrays for the whole dataset.

    Conditions carry the raw label values {0,1,2,3} as float32 in a
    single channel; they are not one-hot encoded and not rescaled.
    """
    if not records:
        raise EmptyDatasetError("no records to stack")
    shapes = {r.mask.pixels.shape for r in records}
    if len(shapes) != 1:
        raise InvalidDimensionsError(f"records have mixed shapes: {sorted(shapes)}")
    conditions = np.stack([filter_condition(r.mask, spec).pixels for r in records]).astype(np.float32)
    images = np.stack([r.image.pixels for r in records]).astype(np.float32)
    return conditions, images


def batch_iterator(
    records: Sequence[StudyRecord],
    spec: ConditionSpec,
    batch_size: int,
    seed: int,
    max_epochs: int | None = None,
) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield shuffled (condition batch, image batch) pairs of shape (B, H, W)."""
    conditions, images = stack_condition_pairs(records, spec)
    for idx in batch_index_stream(len(records), batch_size, seed, max_epochs=max_epochs):
        yield conditions[idx], images[idx]
