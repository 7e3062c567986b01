"""Pipeline tests run with seeded random weights: no checkpoint download
is needed, and every contract (shape, nonnegativity, ordering,
determinism, TFEA validity, consumption by the scoring CLI) is identical
to the pretrained path."""

import json
import subprocess
import sys

import numpy as np
import pytest
from PIL import Image

from tfea_extractor.cli import main
from tfea_extractor.extract import NoImagesError, extract_features, extract_to_file
from tfea_extractor.model import FEATURE_DIM, EmbeddingModel
from tfea_extractor.tfea import read_tfea


@pytest.fixture(scope="module")
def model():
    return EmbeddingModel(weights="random", seed=0)


@pytest.fixture
def image_dir(tmp_path):
    rng = np.random.default_rng(99)
    folder = tmp_path / "images"
    folder.mkdir()
    for i in range(16):
        pixels = rng.integers(0, 256, size=(64, 64, 3), dtype=np.uint8)
        Image.fromarray(pixels).save(folder / f"img_{i:03d}.png")
    return folder


def test_extract_shapes_and_nonnegativity(model, image_dir):
    matrix, trailer, skipped = extract_features(image_dir, model, batch_size=8)
    assert matrix.shape == (16, FEATURE_DIM)
    assert matrix.dtype == np.float32
    assert float(matrix.min()) >= 0.0
    assert skipped == []
    assert "inception_v3" in trailer and "sha256=" in trailer


def test_extract_row_order_is_sorted_filenames(model, image_dir):
    matrix, _, _ = extract_features(image_dir, model, batch_size=16)
    single = Image.open(image_dir / "img_003.png")
    batch = model.preprocess(single).unsqueeze(0)
    row = model.embed_batch(batch).numpy()[0]
    np.testing.assert_allclose(matrix[3], row, atol=1e-5)


def test_extract_deterministic_bytes(model, image_dir, tmp_path):
    out1, out2 = tmp_path / "a.tfea", tmp_path / "b.tfea"
    extract_to_file(image_dir, out1, model, batch_size=8)
    extract_to_file(image_dir, out2, model, batch_size=8)
    assert out1.read_bytes() == out2.read_bytes()


def test_undecodable_files_skipped_and_recorded(model, image_dir, capsys):
    (image_dir / "broken.png").write_bytes(b"this is not an image")
    matrix, trailer, skipped = extract_features(image_dir, model, batch_size=8)
    assert matrix.shape[0] == 16
    assert skipped == ["broken.png"]
    assert "broken.png" in trailer
    assert "skipping" in capsys.readouterr().err


def test_empty_directory_errors(model, tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    with pytest.raises(NoImagesError):
        extract_features(empty, model)


def test_cli_end_to_end(image_dir, tmp_path, capsys):
    out = tmp_path / "features.tfea"
    code = main([str(image_dir), "--out", str(out), "--weights", "random",
                 "--batch-size", "8"])
    assert code == 0
    assert "wrote 16 x 2048" in capsys.readouterr().out
    values, tag = read_tfea(out)
    assert values.shape == (16, FEATURE_DIM)
    assert "weights=random" in tag


def test_cli_missing_directory(tmp_path, capsys):
    code = main([str(tmp_path / "nowhere"), "--out", str(tmp_path / "x.tfea"),
                 "--weights", "random"])
    assert code == 3


def test_acceptance_10_scoring_cli_consumes_output(image_dir, tmp_path):
    """A folder of 16 images yields a valid TFEA file that the scoring
    CLI fits without error (its documented external interface)."""
    out = tmp_path / "features.tfea"
    code = main([str(image_dir), "--out", str(out), "--weights", "random",
                 "--batch-size", "8"])
    assert code == 0
    values, _ = read_tfea(out)
    ok_shape = values.shape == (16, FEATURE_DIM) and float(values.min()) >= 0.0

    proc = subprocess.run(
        [sys.executable, "-m", "trend.cli", "--format", "records",
         "fit", str(out), "--min-samples", "8"],
        capture_output=True,
    )
    ok_fit = proc.returncode == 0
    if ok_fit:
        record = json.loads(proc.stdout)
        ok_fit = record["d"] == FEATURE_DIM and record["n"] == 16
    print(f"ACCEPTANCE 10 extractor integration: {'PASS' if (ok_shape and ok_fit) else 'FAIL'}")
    assert ok_shape
    assert ok_fit, proc.stderr.decode()
