"""Batch-classify a directory of images and export the probability matrix.

The bridge between real image classifiers and the scoring toolkit: every
image becomes one row of post-softmax class probabilities, rows ordered by
the lexicographic relative path of the image (never by filesystem
enumeration order), written as PMAT or CSV with a JSON manifest recording
the classifier identifier, preprocessing constants, and exact image order.
Scores are known to be sensitive to the classifier's weights, so the
manifest provenance is mandatory, not optional.

Inference runs in deterministic eval mode: exporting the same directory
twice produces row-identical output.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from PIL import Image, UnidentifiedImageError

from . import __version__
from .formats import file_digest, write_csv, write_pmat

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".gif", ".tiff", ".webp")

# ImageNet normalization constants, the default for torchvision classifiers.
IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)


class ExportError(Exception):
    """Unusable job configuration or image source."""


@dataclass(frozen=True)
class PreprocessSpec:
    """Resize + per-channel normalization applied to every image."""

    resize: tuple[int, int] = (64, 64)  # (height, width)
    mean: tuple[float, float, float] = IMAGENET_MEAN
    std: tuple[float, float, float] = IMAGENET_STD

    def __post_init__(self) -> None:
        if any(v < 1 for v in self.resize):
            raise ExportError(f"resize dims must be positive, got {self.resize}")
        if any(s <= 0 for s in self.std):
            raise ExportError(f"std must be positive, got {self.std}")

    def apply(self, image: Image.Image) -> np.ndarray:
        """PIL image -> normalized CHW float32 array."""
        h, w = self.resize
        rgb = image.convert("RGB").resize((w, h), Image.BILINEAR)
        arr = np.asarray(rgb, dtype=np.float32) / 255.0
        arr = (arr - np.asarray(self.mean, dtype=np.float32)) / np.asarray(
            self.std, dtype=np.float32
        )
        return arr.transpose(2, 0, 1)


@dataclass(frozen=True)
class ExportJob:
    """Everything needed to turn an image directory into a matrix file."""

    image_dir: str
    classifier: str = "torchvision:resnet18"
    weights: str | None = None  # None = seeded random init; "pretrained"; or a path
    init_seed: int = 0
    preprocess: PreprocessSpec = field(default_factory=PreprocessSpec)
    output_path: str = "probs.pmat"
    output_format: str = "pmat"
    batch_size: int = 32
    on_error: str = "abort"  # or "skip"
    expect_classes: int | None = None

    def __post_init__(self) -> None:
        if self.output_format not in ("pmat", "csv"):
            raise ExportError(f"unknown output format {self.output_format!r}")
        if self.on_error not in ("abort", "skip"):
            raise ExportError(f"on_error must be 'abort' or 'skip', got {self.on_error!r}")
        if self.batch_size < 1:
            raise ExportError(f"batch_size must be positive, got {self.batch_size}")


@dataclass(frozen=True)
class ExportResult:
    output_path: str
    manifest_path: str
    n_rows: int
    n_classes: int
    skipped: tuple[str, ...]


def list_images(image_dir: str | Path) -> list[Path]:
    """Image files under the directory, sorted by relative POSIX path.

    Sorting happens on the path string, so row order is a pure function of
    the input paths regardless of how the filesystem enumerates them.
    """
    root = Path(image_dir)
    if not root.is_dir():
        raise ExportError(f"{root} is not a directory")
    found = [
        p for p in root.rglob("*")
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    ]
    return sorted(found, key=lambda p: p.relative_to(root).as_posix())


def build_classifier(spec: str, weights: str | None, init_seed: int) -> torch.nn.Module:
    """Instantiate the classifier named by ``spec`` in deterministic eval mode."""
    if not spec.startswith("torchvision:"):
        raise ExportError(
            f"unknown classifier {spec!r}; expected 'torchvision:<model-name>'"
        )
    name = spec.split(":", 1)[1]
    from torchvision.models import get_model

    try:
        if weights is None:
            # seeded random initialization; usable offline and hermetic for tests
            torch.manual_seed(init_seed)
            model = get_model(name, weights=None)
        elif weights == "pretrained":
            model = get_model(name, weights="DEFAULT")
        else:
            model = get_model(name, weights=None)
            state = torch.load(weights, map_location="cpu", weights_only=True)
            model.load_state_dict(state)
    except (ValueError, RuntimeError, FileNotFoundError) as exc:
        raise ExportError(f"cannot build classifier {spec!r}: {exc}") from exc
    model.eval()
    return model


def _load_batch(paths: list[Path], spec: PreprocessSpec, on_error: str):
    arrays = []
    kept: list[Path] = []
    skipped: list[Path] = []
    for path in paths:
        try:
            with Image.open(path) as img:
                arrays.append(spec.apply(img))
            kept.append(path)
        except (OSError, UnidentifiedImageError) as exc:
            if on_error == "abort":
                raise ExportError(f"cannot read image {path}: {exc}") from exc
            warnings.warn(f"skipping unreadable image {path}: {exc}", stacklevel=2)
            skipped.append(path)
    return arrays, kept, skipped


def export(job: ExportJob) -> ExportResult:
    """Classify every image and write the matrix plus its manifest."""
    paths = list_images(job.image_dir)
    if not paths:
        raise ExportError(f"no images found under {job.image_dir}")
    model = build_classifier(job.classifier, job.weights, job.init_seed)

    root = Path(job.image_dir)
    row_chunks: list[np.ndarray] = []
    kept_paths: list[Path] = []
    skipped_paths: list[Path] = []
    with torch.no_grad():
        for start in range(0, len(paths), job.batch_size):
            batch_paths = paths[start : start + job.batch_size]
            arrays, kept, skipped = _load_batch(batch_paths, job.preprocess, job.on_error)
            kept_paths.extend(kept)
            skipped_paths.extend(skipped)
            if not arrays:
                continue
            logits = model(torch.from_numpy(np.stack(arrays)))
            probs = torch.softmax(logits, dim=1).numpy().astype(np.float64)
            # float32 softmax sums drift ~1e-7; renormalize in float64 so the
            # consumer's loader accepts every row without renormalizing again
            probs /= probs.sum(axis=1, keepdims=True)
            row_chunks.append(probs)

    if not row_chunks:
        raise ExportError(f"no readable images under {job.image_dir}")
    rows = np.vstack(row_chunks)
    k = rows.shape[1]
    if job.expect_classes is not None and k != job.expect_classes:
        raise ExportError(
            f"classifier emits {k} classes, expected {job.expect_classes}"
        )

    if job.output_format == "pmat":
        write_pmat(rows, job.output_path)
    else:
        write_csv(rows, job.output_path)

    manifest = {
        "exporter": "prob-exporter",
        "version": __version__,
        "classifier": job.classifier,
        "weights": job.weights if job.weights is not None else f"random(seed={job.init_seed})",
        "preprocessing": {
            "resize": list(job.preprocess.resize),
            "mean": list(job.preprocess.mean),
            "std": list(job.preprocess.std),
        },
        "image_dir": str(root),
        "images": [p.relative_to(root).as_posix() for p in kept_paths],
        "skipped": [p.relative_to(root).as_posix() for p in skipped_paths],
        "n_rows": int(rows.shape[0]),
        "n_classes": int(k),
        "output": str(job.output_path),
        "output_format": job.output_format,
        "output_digest": file_digest(job.output_path),
    }
    manifest_path = str(job.output_path) + ".manifest.json"
    with open(manifest_path, "w") as f:
        json.dump(manifest, f, sort_keys=True, indent=2)
        f.write("\n")

    return ExportResult(
        output_path=str(job.output_path),
        manifest_path=manifest_path,
        n_rows=int(rows.shape[0]),
        n_classes=int(k),
        skipped=tuple(str(p) for p in skipped_paths),
    )
