"""File formats: PMAT/CSV round-trips, validation, SLMD models, digests."""

import struct
import warnings

import numpy as np
import pytest

import scorelab as sl
from scorelab import synthetic
from scorelab.errors import InvalidInputError, LoadError
from scorelab.formats import (
    RenormalizationWarning,
    file_digest,
    fnv1a64,
    load_matrix,
    load_model,
    save_csv,
    save_matrix,
    save_model,
    save_pmat,
)


@pytest.fixture
def matrix():
    rng = np.random.default_rng(0)
    rows = np.vstack(
        [synthetic.random_matrix(rng, 40, 7).rows, synthetic.one_hot_cycle(7, 7).rows]
    )
    return sl.ProbMatrix(rows)


class TestPmat:
    def test_round_trip_bitwise(self, matrix, tmp_path):
        path = tmp_path / "m.pmat"
        save_pmat(matrix, path)
        loaded = load_matrix(path)
        np.testing.assert_array_equal(loaded.rows, matrix.rows)
        assert loaded.rows.tobytes() == matrix.rows.tobytes()

    def test_header_layout(self, matrix, tmp_path):
        path = tmp_path / "m.pmat"
        save_pmat(matrix, path)
        raw = path.read_bytes()
        magic, version, n, k = struct.unpack("<4sHQI", raw[:18])
        assert magic == b"PMAT"
        assert version == 1
        assert (n, k) == (matrix.n, matrix.class_count)
        assert len(raw) == 18 + n * k * 8

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.pmat"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(LoadError, match="magic"):
            load_matrix(path, fmt="pmat")

    def test_bad_version(self, tmp_path):
        path = tmp_path / "bad.pmat"
        path.write_bytes(struct.pack("<4sHQI", b"PMAT", 9, 1, 2) + b"\x00" * 16)
        with pytest.raises(LoadError, match="version"):
            load_matrix(path)

    def test_truncated_payload(self, matrix, tmp_path):
        path = tmp_path / "m.pmat"
        save_pmat(matrix, path)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(LoadError, match="payload"):
            load_matrix(path)

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "m.pmat"
        path.write_bytes(b"PMAT\x01")
        with pytest.raises(LoadError, match="header"):
            load_matrix(path)


class TestCsv:
    def test_round_trip_matches_pmat_exactly(self, matrix, tmp_path):
        pmat = tmp_path / "m.pmat"
        csv = tmp_path / "m.csv"
        save_pmat(matrix, pmat)
        save_csv(matrix, csv)
        a = load_matrix(pmat)
        b = load_matrix(csv)
        # 17 significant digits round-trip float64 exactly
        np.testing.assert_array_equal(a.rows, b.rows)

    def test_header_optional(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("0.5,0.5\n0.25,0.75\n")
        loaded = load_matrix(path)
        assert loaded.n == 2

    def test_parse_error_cites_line(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("class_0,class_1\n0.5,0.5\n0.25,oops\n")
        with pytest.raises(LoadError, match=":3:"):
            load_matrix(path)

    def test_ragged_row_cites_line(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("0.5,0.5\n0.2,0.3,0.5\n")
        with pytest.raises(LoadError, match=":2:"):
            load_matrix(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("")
        with pytest.raises(LoadError, match="no data"):
            load_matrix(path)


class TestValidation:
    def test_row_sum_violation_names_row(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("0.5,0.5\n0.4,0.5\n")
        with pytest.raises(LoadError, match="row 1"):
            load_matrix(path)

    def test_negative_entry_names_row(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("-0.5,1.5\n")
        with pytest.raises(LoadError, match="row 0"):
            load_matrix(path)

    def test_renormalization_warns_and_fixes(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("0.5000003,0.5\n0.5,0.5\n")  # off by 3e-7, within 1e-6
        with pytest.warns(RenormalizationWarning, match="1 rows"):
            loaded = load_matrix(path)
        np.testing.assert_allclose(loaded.rows.sum(axis=1), 1.0, atol=1e-15)

    def test_clean_load_emits_no_warning(self, matrix, tmp_path):
        path = tmp_path / "m.pmat"
        save_pmat(matrix, path)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            load_matrix(path)

    def test_tolerance_configurable(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("0.52,0.5\n")  # off by 0.02
        with pytest.raises(LoadError):
            load_matrix(path)
        with pytest.warns(RenormalizationWarning):
            loaded = load_matrix(path, row_sum_tol=0.05)
        assert loaded.rows.sum() == pytest.approx(1.0)

    def test_no_validate_loads_raw(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("0.9,0.0\n0.5,0.5\n")
        with pytest.raises(LoadError):
            load_matrix(path)
        loaded = load_matrix(path, validate=False)
        assert loaded.rows[0, 0] == 0.9


class TestAutoDetection:
    def test_magic_wins_over_extension(self, matrix, tmp_path):
        path = tmp_path / "actually_binary.csv"
        save_pmat(matrix, path)
        loaded = load_matrix(path)
        np.testing.assert_array_equal(loaded.rows, matrix.rows)

    def test_extension_fallback(self, matrix, tmp_path):
        path = tmp_path / "m.csv"
        save_csv(matrix, path)
        assert load_matrix(path).n == matrix.n

    def test_unknown_format_rejected(self, tmp_path):
        path = tmp_path / "m.dat"
        path.write_text("0.5,0.5\n")
        with pytest.raises(LoadError, match="format"):
            load_matrix(path)

    def test_save_format_dispatch(self, matrix, tmp_path):
        csv_path = tmp_path / "a.csv"
        pmat_path = tmp_path / "a.pmat"
        save_matrix(matrix, csv_path)
        save_matrix(matrix, pmat_path)
        assert csv_path.read_bytes()[:6] != b"PMAT\x01\x00"
        assert pmat_path.read_bytes()[:4] == b"PMAT"

    def test_missing_file(self, tmp_path):
        with pytest.raises(LoadError):
            load_matrix(tmp_path / "absent.pmat")


class TestSlmdModels:
    def test_linear_round_trip(self, tmp_path):
        model = sl.SoftmaxLinear.random(5, 3, seed=1)
        path = tmp_path / "m.slmd"
        save_model(model, path)
        loaded = load_model(path)
        assert isinstance(loaded, sl.SoftmaxLinear)
        np.testing.assert_array_equal(loaded.weights, model.weights)
        np.testing.assert_array_equal(loaded.biases, model.biases)

    @pytest.mark.parametrize("activation", ["relu", "tanh"])
    def test_mlp_round_trip(self, tmp_path, activation):
        model = sl.MLPClassifier.random(6, 9, 4, seed=2, activation=activation)
        path = tmp_path / "m.slmd"
        save_model(model, path)
        loaded = load_model(path)
        assert isinstance(loaded, sl.MLPClassifier)
        assert loaded.activation == activation
        for a, b in ((loaded.w1, model.w1), (loaded.b1, model.b1), (loaded.w2, model.w2), (loaded.b2, model.b2)):
            np.testing.assert_array_equal(a, b)

    def test_magic_checked(self, tmp_path):
        path = tmp_path / "m.slmd"
        path.write_bytes(b"XXXX" + b"\x00" * 16)
        with pytest.raises(LoadError):
            load_model(path)

    def test_truncated_parameters(self, tmp_path):
        model = sl.SoftmaxLinear.random(5, 3, seed=1)
        path = tmp_path / "m.slmd"
        save_model(model, path)
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(LoadError, match="truncated"):
            load_model(path)

    def test_trailing_bytes_rejected(self, tmp_path):
        model = sl.SoftmaxLinear.random(2, 2, seed=1)
        path = tmp_path / "m.slmd"
        save_model(model, path)
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(LoadError, match="trailing"):
            load_model(path)

    def test_round_trip_preserves_predictions(self, blob_classifier, tmp_path):
        path = tmp_path / "blob.slmd"
        save_model(blob_classifier, path)
        loaded = load_model(path)
        x = np.linspace(-1, 1, 16)
        np.testing.assert_array_equal(
            sl.predict_proba(loaded, x), sl.predict_proba(blob_classifier, x)
        )


class TestScale:
    def test_large_matrix_loads_quickly(self, tmp_path):
        import time

        big = synthetic.one_hot_cycle(50_000, 1000)
        path = tmp_path / "big.pmat"
        save_pmat(big, path)
        t0 = time.perf_counter()
        loaded = load_matrix(path)
        elapsed = time.perf_counter() - t0
        assert elapsed < 5.0
        assert (loaded.n, loaded.class_count) == (50_000, 1000)


class TestDigest:
    def test_known_vectors(self):
        assert fnv1a64(b"") == 0xCBF29CE484222325
        assert fnv1a64(b"a") == 0xAF63DC4C8601EC8C

    def test_file_digest_stable(self, tmp_path):
        path = tmp_path / "f.bin"
        path.write_bytes(b"hello")
        assert file_digest(path) == file_digest(path)
        assert len(file_digest(path)) == 16
