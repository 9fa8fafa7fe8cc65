"""Exporter behavior: ordering, determinism, error handling, formats."""

import json
import struct

import numpy as np
import pytest

from prob_exporter import ExportError, ExportJob, PreprocessSpec, export, list_images


def read_pmat(path):
    raw = path.read_bytes()
    magic, version, n, k = struct.unpack("<4sHQI", raw[:18])
    assert magic == b"PMAT" and version == 1
    return np.frombuffer(raw[18:], dtype="<f8").reshape(n, k)


def job_for(image_dir, output, **overrides):
    base = dict(
        image_dir=str(image_dir),
        classifier="torchvision:resnet18",
        weights=None,
        init_seed=0,
        output_path=str(output),
        batch_size=48,
    )
    base.update(overrides)
    return ExportJob(**base)


class TestListing:
    def test_lexicographic_order(self, image_corpus):
        paths = list_images(image_corpus)
        rel = [p.relative_to(image_corpus).as_posix() for p in paths]
        assert rel == sorted(rel)
        assert len(rel) == 120

    def test_subdirectories_included(self, image_corpus):
        rel = [p.relative_to(image_corpus).as_posix() for p in list_images(image_corpus)]
        assert any(r.startswith("sub/") for r in rel)

    def test_missing_directory(self, tmp_path):
        with pytest.raises(ExportError):
            list_images(tmp_path / "nope")


class TestPreprocess:
    def test_output_shape_and_range(self, image_corpus):
        from PIL import Image

        spec = PreprocessSpec(resize=(32, 40))
        path = list_images(image_corpus)[0]
        with Image.open(path) as img:
            arr = spec.apply(img)
        assert arr.shape == (3, 32, 40)
        assert np.isfinite(arr).all()

    def test_bad_spec_rejected(self):
        with pytest.raises(ExportError):
            PreprocessSpec(resize=(0, 10))
        with pytest.raises(ExportError):
            PreprocessSpec(std=(0.0, 1.0, 1.0))


@pytest.fixture(scope="module")
def result_and_rows(image_corpus, tmp_path_factory):
    out = tmp_path_factory.mktemp("out") / "probs.pmat"
    result = export(job_for(image_corpus, out))
    return result, read_pmat(out)


class TestExport:
    def test_one_row_per_image(self, result_and_rows):
        result, rows = result_and_rows
        assert result.n_rows == rows.shape[0] == 120
        assert result.n_classes == rows.shape[1] == 1000

    def test_rows_are_normalized_float64(self, result_and_rows):
        _, rows = result_and_rows
        np.testing.assert_allclose(rows.sum(axis=1), 1.0, atol=1e-12)
        assert rows.min() >= 0.0

    def test_manifest_records_provenance(self, result_and_rows):
        result, _ = result_and_rows
        with open(result.manifest_path) as f:
            manifest = json.load(f)
        assert manifest["classifier"] == "torchvision:resnet18"
        assert manifest["weights"] == "random(seed=0)"
        assert manifest["n_rows"] == 120
        assert manifest["images"] == sorted(manifest["images"])
        assert manifest["preprocessing"]["resize"] == [64, 64]
        assert manifest["output_digest"]

    def test_reexport_is_row_identical(self, image_corpus, tmp_path):
        out1 = tmp_path / "a.pmat"
        out2 = tmp_path / "b.pmat"
        export(job_for(image_corpus, out1))
        export(job_for(image_corpus, out2))
        assert out1.read_bytes() == out2.read_bytes()

    def test_different_seed_changes_rows(self, image_corpus, tmp_path):
        out1 = tmp_path / "a.pmat"
        out2 = tmp_path / "b.pmat"
        export(job_for(image_corpus, out1, init_seed=0))
        export(job_for(image_corpus, out2, init_seed=1))
        assert not np.array_equal(read_pmat(out1), read_pmat(out2))

    def test_csv_format(self, image_corpus, tmp_path):
        out = tmp_path / "probs.csv"
        result = export(job_for(image_corpus, out, output_format="csv", batch_size=64))
        text = out.read_text().splitlines()
        assert text[0].startswith("class_0,")
        assert len(text) == 1 + result.n_rows

    def test_expect_classes_mismatch_aborts(self, image_corpus, tmp_path):
        with pytest.raises(ExportError, match="1000 classes"):
            export(job_for(image_corpus, tmp_path / "x.pmat", expect_classes=10))

    def test_unknown_classifier(self, image_corpus, tmp_path):
        with pytest.raises(ExportError):
            export(job_for(image_corpus, tmp_path / "x.pmat", classifier="magic:net"))
        with pytest.raises(ExportError):
            export(job_for(image_corpus, tmp_path / "x.pmat",
                           classifier="torchvision:definitely_not_a_model"))


class TestCorruptImages:
    @pytest.fixture
    def dirty_dir(self, image_corpus, tmp_path):
        clone = tmp_path / "imgs"
        clone.mkdir()
        for p in list_images(image_corpus)[:10]:
            (clone / p.name).write_bytes(p.read_bytes())
        (clone / "k_broken.png").write_bytes(b"this is not a png")
        return clone

    def test_abort_mode(self, dirty_dir, tmp_path):
        with pytest.raises(ExportError, match="k_broken"):
            export(job_for(dirty_dir, tmp_path / "x.pmat", on_error="abort"))

    def test_skip_mode_warns_and_records(self, dirty_dir, tmp_path):
        out = tmp_path / "x.pmat"
        with pytest.warns(UserWarning, match="k_broken"):
            result = export(job_for(dirty_dir, out, on_error="skip"))
        assert result.n_rows == 10
        assert len(result.skipped) == 1
        manifest = json.loads(open(result.manifest_path).read())
        assert manifest["skipped"] == ["k_broken.png"]
        assert len(manifest["images"]) == 10
