"""Image folder to feature matrix pipeline."""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import torch
from PIL import Image, UnidentifiedImageError

from .model import EmbeddingModel
from .tfea import write_tfea


class NoImagesError(RuntimeError):
    """The directory yielded no decodable images."""


def _decode(path: Path):
    try:
        with Image.open(path) as img:
            img.load()
            return img.convert("RGB")
    except (UnidentifiedImageError, OSError, ValueError):
        return None


def extract_features(
    image_dir,
    model: EmbeddingModel,
    batch_size: int = 32,
) -> tuple[np.ndarray, str, list[str]]:
    """Embed every decodable image under image_dir, sorted by filename.

    Returns (n x 2048 float32 matrix, provenance trailer, skipped names).
    Undecodable files are skipped with a warning on stderr and recorded
    in the trailer.
    """
    root = Path(image_dir)
    if not root.is_dir():
        raise NotADirectoryError(f"{root} is not a directory")
    if batch_size < 1:
        raise ValueError("batch_size must be positive")
    candidates = sorted(p for p in root.iterdir() if p.is_file())
    rows: list[torch.Tensor] = []
    skipped: list[str] = []
    pending: list[torch.Tensor] = []

    def flush():
        if pending:
            rows.append(model.embed_batch(torch.stack(pending)))
            pending.clear()

    for path in candidates:
        image = _decode(path)
        if image is None:
            skipped.append(path.name)
            print(f"tfea-extract: warning: skipping undecodable file {path.name}",
                  file=sys.stderr)
            continue
        pending.append(model.preprocess(image))
        if len(pending) == batch_size:
            flush()
    flush()
    if not rows:
        raise NoImagesError(f"no decodable images in {root}")
    matrix = torch.cat(rows).numpy().astype(np.float32)
    trailer = f"{model.describe()} source={root.name} n={matrix.shape[0]}"
    if skipped:
        trailer += " skipped=" + ",".join(skipped)
    return matrix, trailer, skipped


def extract_to_file(image_dir, out_path, model: EmbeddingModel, batch_size: int = 32) -> int:
    """Full pipeline: embed a folder and write the TFEA file; returns n."""
    matrix, trailer, _ = extract_features(image_dir, model, batch_size)
    write_tfea(matrix, out_path, trailer)
    return matrix.shape[0]
