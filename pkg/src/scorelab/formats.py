"""File formats: PMAT probability matrices, CSV interchange, SLMD models.

PMAT layout (all little-endian):
    magic   4 bytes  b"PMAT"
    version u16      currently 1
    N       u64      row count
    K       u32      class count
    payload N*K float64, row-major

SLMD layout (all little-endian):
    magic   4 bytes  b"SLMD"
    version u16      currently 1
    arch    u16      1 = softmax-linear, 2 = one-hidden-layer MLP
    arch 1: d u32, K u32, then weights (K*d) and biases (K) as float64
    arch 2: d u32, h u32, K u32, activation u16 (0 = tanh, 1 = relu),
            then w1 (h*d), b1 (h), w2 (K*h), b2 (K) as float64

CSV matrices carry an optional "class_0,...,class_{K-1}" header and one
sample per line; floats are written with 17 significant digits so a CSV
round-trip preserves float64 exactly.

Loaded rows are validated (finite, non-negative, sums within a tolerance of
1; default 1e-6) and renormalized when the sum deviates by more than the
internal 1e-9 tolerance -- each such load emits a RenormalizationWarning.
Matrices our own writers produced are loaded bit-for-bit untouched.
"""

from __future__ import annotations

import os
import struct
import warnings

import numpy as np

from .classifiers import Classifier, MLPClassifier, SoftmaxLinear
from .errors import InvalidInputError, LoadError
from .metrics import SUM_TOL, ProbMatrix

PMAT_MAGIC = b"PMAT"
SLMD_MAGIC = b"SLMD"
PMAT_VERSION = 1
SLMD_VERSION = 1

_PMAT_HEADER = struct.Struct("<4sHQI")
_ARCH_LINEAR = 1
_ARCH_MLP = 2
_ACT_CODES = {"tanh": 0, "relu": 1}
_ACT_NAMES = {v: k for k, v in _ACT_CODES.items()}

DEFAULT_ROW_SUM_TOL = 1e-6


class RenormalizationWarning(UserWarning):
    """Rows needed renormalization on load (sums off by more than 1e-9)."""


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash of a byte string."""
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def file_digest(path: str | os.PathLike) -> str:
    """Hex FNV-1a digest of a file's bytes."""
    with open(path, "rb") as f:
        return f"{fnv1a64(f.read()):016x}"


# ---------------------------------------------------------------------------
# PMAT
# ---------------------------------------------------------------------------

def save_pmat(matrix: ProbMatrix, path: str | os.PathLike) -> None:
    with open(path, "wb") as f:
        f.write(_PMAT_HEADER.pack(PMAT_MAGIC, PMAT_VERSION, matrix.n, matrix.class_count))
        f.write(np.ascontiguousarray(matrix.rows, dtype="<f8").tobytes())


def _read_pmat_payload(path: str | os.PathLike) -> np.ndarray:
    with open(path, "rb") as f:
        header = f.read(_PMAT_HEADER.size)
        if len(header) < _PMAT_HEADER.size:
            raise LoadError(f"{path}: truncated PMAT header")
        magic, version, n, k = _PMAT_HEADER.unpack(header)
        if magic != PMAT_MAGIC:
            raise LoadError(f"{path}: bad magic {magic!r}, expected {PMAT_MAGIC!r}")
        if version != PMAT_VERSION:
            raise LoadError(f"{path}: unsupported PMAT version {version}")
        if n < 1 or k < 2:
            raise LoadError(f"{path}: invalid dimensions N={n}, K={k}")
        payload = f.read()
    expected = n * k * 8
    if len(payload) != expected:
        raise LoadError(
            f"{path}: payload is {len(payload)} bytes, expected {expected} for N={n}, K={k}"
        )
    return np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(n, k)


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def save_csv(matrix: ProbMatrix, path: str | os.PathLike, header: bool = True) -> None:
    with open(path, "w") as f:
        if header:
            f.write(",".join(f"class_{i}" for i in range(matrix.class_count)) + "\n")
        for row in matrix.rows:
            f.write(",".join(f"{v:.17g}" for v in row) + "\n")


def _read_csv_payload(path: str | os.PathLike) -> np.ndarray:
    rows: list[list[float]] = []
    width: int | None = None
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if lineno == 1 and cells[0].strip().startswith("class_"):
                continue
            try:
                values = [float(c) for c in cells]
            except ValueError as exc:
                raise LoadError(f"{path}:{lineno}: unparseable value ({exc})") from exc
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise LoadError(
                    f"{path}:{lineno}: row has {len(values)} columns, expected {width}"
                )
            rows.append(values)
    if not rows:
        raise LoadError(f"{path}: no data rows")
    return np.asarray(rows, dtype=np.float64)


# ---------------------------------------------------------------------------
# Shared load path
# ---------------------------------------------------------------------------

def _detect_format(path: str | os.PathLike) -> str:
    try:
        with open(path, "rb") as f:
            if f.read(4) == PMAT_MAGIC:
                return "pmat"
    except OSError as exc:
        raise LoadError(f"{path}: cannot read ({exc})") from exc
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".pmat":
        return "pmat"
    if ext == ".csv":
        return "csv"
    raise LoadError(f"{path}: cannot determine format from magic bytes or extension")


def _validate_rows(raw: np.ndarray, path, row_sum_tol: float) -> np.ndarray:
    bad_finite = ~np.all(np.isfinite(raw), axis=1)
    if np.any(bad_finite):
        raise LoadError(f"{path}: row {int(np.argmax(bad_finite))} has non-finite entries")
    bad_neg = np.any(raw < 0, axis=1)
    if np.any(bad_neg):
        raise LoadError(f"{path}: row {int(np.argmax(bad_neg))} has negative entries")
    sums = raw.sum(axis=1)
    off = np.abs(sums - 1.0)
    bad_sum = off > row_sum_tol
    if np.any(bad_sum):
        i = int(np.argmax(bad_sum))
        raise LoadError(
            f"{path}: row {i} sums to {sums[i]!r}, outside tolerance {row_sum_tol}"
        )
    needs_renorm = off > SUM_TOL
    n_renorm = int(needs_renorm.sum())
    if n_renorm:
        raw = raw.copy()
        raw[needs_renorm] /= sums[needs_renorm, None]
        warnings.warn(
            f"{path}: renormalized {n_renorm} rows whose sums deviated by more "
            f"than {SUM_TOL}",
            RenormalizationWarning,
            stacklevel=3,
        )
    return raw


def load_matrix(
    path: str | os.PathLike,
    fmt: str = "auto",
    row_sum_tol: float = DEFAULT_ROW_SUM_TOL,
    validate: bool = True,
) -> ProbMatrix:
    """Load and validate a probability matrix from PMAT or CSV.

    ``fmt="auto"`` sniffs magic bytes, then falls back to the extension.
    ``validate=False`` skips all row checks and renormalization (escape
    hatch for inspecting broken files) -- downstream operations may fail.
    """
    if fmt == "auto":
        fmt = _detect_format(path)
    if fmt == "pmat":
        raw = _read_pmat_payload(path)
    elif fmt == "csv":
        raw = _read_csv_payload(path)
    else:
        raise InvalidInputError(f"unknown format {fmt!r}; use pmat, csv, or auto")
    if raw.ndim != 2 or raw.shape[1] < 2:
        raise LoadError(f"{path}: need at least two classes, got shape {raw.shape}")
    if validate:
        raw = _validate_rows(raw, path, row_sum_tol)
    return ProbMatrix(raw, validate=False)


def save_matrix(matrix: ProbMatrix, path: str | os.PathLike, fmt: str = "auto") -> None:
    """Write PMAT or CSV; ``auto`` picks by extension (default PMAT)."""
    if fmt == "auto":
        fmt = "csv" if str(path).lower().endswith(".csv") else "pmat"
    if fmt == "pmat":
        save_pmat(matrix, path)
    elif fmt == "csv":
        save_csv(matrix, path)
    else:
        raise InvalidInputError(f"unknown format {fmt!r}; use pmat, csv, or auto")


# ---------------------------------------------------------------------------
# SLMD models
# ---------------------------------------------------------------------------

def save_model(model: Classifier, path: str | os.PathLike) -> None:
    with open(path, "wb") as f:
        f.write(SLMD_MAGIC)
        f.write(struct.pack("<H", SLMD_VERSION))
        if isinstance(model, SoftmaxLinear):
            f.write(struct.pack("<HII", _ARCH_LINEAR, model.input_dim, model.class_count))
            blocks = (model.weights, model.biases)
        else:
            f.write(
                struct.pack(
                    "<HIIIH",
                    _ARCH_MLP,
                    model.input_dim,
                    model.hidden_dim,
                    model.class_count,
                    _ACT_CODES[model.activation],
                )
            )
            blocks = (model.w1, model.b1, model.w2, model.b2)
        for block in blocks:
            f.write(np.ascontiguousarray(block, dtype="<f8").tobytes())


def load_model(path: str | os.PathLike) -> Classifier:
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < 8 or data[:4] != SLMD_MAGIC:
        raise LoadError(f"{path}: not an SLMD model file")
    (version,) = struct.unpack_from("<H", data, 4)
    if version != SLMD_VERSION:
        raise LoadError(f"{path}: unsupported SLMD version {version}")
    (arch,) = struct.unpack_from("<H", data, 6)
    offset = 8

    def take(count: int) -> np.ndarray:
        nonlocal offset
        nbytes = count * 8
        if offset + nbytes > len(data):
            raise LoadError(f"{path}: truncated parameter block")
        block = np.frombuffer(data, dtype="<f8", count=count, offset=offset)
        offset += nbytes
        return block.astype(np.float64)

    if arch == _ARCH_LINEAR:
        d, k = struct.unpack_from("<II", data, offset)
        offset += 8
        weights = take(k * d).reshape(k, d)
        biases = take(k)
        model: Classifier = SoftmaxLinear(weights, biases)
    elif arch == _ARCH_MLP:
        d, h, k, act = struct.unpack_from("<IIIH", data, offset)
        offset += 14
        if act not in _ACT_NAMES:
            raise LoadError(f"{path}: unknown activation code {act}")
        w1 = take(h * d).reshape(h, d)
        b1 = take(h)
        w2 = take(k * h).reshape(k, h)
        b2 = take(k)
        model = MLPClassifier(w1, b1, w2, b2, activation=_ACT_NAMES[act])
    else:
        raise LoadError(f"{path}: unknown architecture tag {arch}")
    if offset != len(data):
        raise LoadError(f"{path}: {len(data) - offset} trailing bytes after parameters")
    return model
