"""Bit-exact binary file formats.

EMB1  embedding matrix: b"EMB1", u64 rows, u64 cols, rows*cols f32, all
      little-endian, row-major.
LAB1  label vector: b"LAB1", u64 count, count u32 labels, little-endian.
PRB1  linear probe: b"PRB1", u64 classes, u64 dim, classes*dim f32 weights
      row-major, classes f32 biases.

Loads of anything that does not match byte-for-byte raise FormatError.
"""

import json
import struct
from pathlib import Path

import numpy as np

EMB1_MAGIC = b"EMB1"
LAB1_MAGIC = b"LAB1"
PRB1_MAGIC = b"PRB1"


class FormatError(ValueError):
    """Raised for malformed binary files and schema-violating manifests."""


def _read_exact(f, n, what, path):
    buf = f.read(n)
    if len(buf) != n:
        raise FormatError(f"{path}: truncated file while reading {what}")
    return buf


def _expect_eof(f, path):
    if f.read(1):
        raise FormatError(f"{path}: trailing data after payload")


def save_embeddings(matrix, path) -> None:
    m = np.asarray(matrix)
    if m.ndim != 2:
        raise FormatError(f"embedding matrix must be 2-D, got shape {m.shape}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise FormatError(f"embedding matrix must be at least 1x1, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise FormatError("embedding matrix contains non-finite values")
    with open(path, "wb") as f:
        f.write(EMB1_MAGIC)
        f.write(struct.pack("<QQ", m.shape[0], m.shape[1]))
        f.write(np.ascontiguousarray(m, dtype="<f4").tobytes())


def load_embeddings(path) -> np.ndarray:
    with open(path, "rb") as f:
        magic = _read_exact(f, 4, "magic", path)
        if magic != EMB1_MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}, expected {EMB1_MAGIC!r}")
        rows, cols = struct.unpack("<QQ", _read_exact(f, 16, "header", path))
        if rows < 1 or cols < 1:
            raise FormatError(f"{path}: invalid shape {rows}x{cols}")
        payload = _read_exact(f, rows * cols * 4, "payload", path)
        _expect_eof(f, path)
    m = np.frombuffer(payload, dtype="<f4").reshape(rows, cols)
    if not np.all(np.isfinite(m)):
        raise FormatError(f"{path}: non-finite values in payload")
    return np.array(m, dtype=np.float32)


def save_labels(labels, path) -> None:
    y = np.asarray(labels)
    if y.ndim != 1:
        raise FormatError(f"label vector must be 1-D, got shape {y.shape}")
    if y.size and (not np.issubdtype(y.dtype, np.integer) or y.min() < 0):
        raise FormatError("labels must be non-negative integers")
    if y.size and y.max() > np.iinfo(np.uint32).max:
        raise FormatError("label value exceeds u32 range")
    with open(path, "wb") as f:
        f.write(LAB1_MAGIC)
        f.write(struct.pack("<Q", y.size))
        f.write(np.ascontiguousarray(y, dtype="<u4").tobytes())


def load_labels(path) -> np.ndarray:
    with open(path, "rb") as f:
        magic = _read_exact(f, 4, "magic", path)
        if magic != LAB1_MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}, expected {LAB1_MAGIC!r}")
        (count,) = struct.unpack("<Q", _read_exact(f, 8, "header", path))
        payload = _read_exact(f, count * 4, "payload", path)
        _expect_eof(f, path)
    return np.frombuffer(payload, dtype="<u4").astype(np.int64)


def save_probe_params(weights, bias, path) -> None:
    w = np.asarray(weights)
    b = np.asarray(bias)
    if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0]:
        raise FormatError(f"probe shapes inconsistent: weights {w.shape}, bias {b.shape}")
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
        raise FormatError("probe parameters contain non-finite values")
    with open(path, "wb") as f:
        f.write(PRB1_MAGIC)
        f.write(struct.pack("<QQ", w.shape[0], w.shape[1]))
        f.write(np.ascontiguousarray(w, dtype="<f4").tobytes())
        f.write(np.ascontiguousarray(b, dtype="<f4").tobytes())


def load_probe_params(path):
    with open(path, "rb") as f:
        magic = _read_exact(f, 4, "magic", path)
        if magic != PRB1_MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}, expected {PRB1_MAGIC!r}")
        classes, dim = struct.unpack("<QQ", _read_exact(f, 16, "header", path))
        w = np.frombuffer(_read_exact(f, classes * dim * 4, "weights", path), dtype="<f4")
        b = np.frombuffer(_read_exact(f, classes * 4, "bias", path), dtype="<f4")
        _expect_eof(f, path)
    return w.reshape(classes, dim).astype(np.float64), b.astype(np.float64)


# ---------------------------------------------------------------------------
# Manifest: a JSON envelope tying the binary files of one dataset together.
# Schema:
#   {"embeddings": path, "labels": path, "true_labels": path?,
#    "prompts": [{"class": name, "path": path, "count": int}, ...],
#    "num_classes": int, "dim": int}
# Paths are relative to the manifest's directory.
# ---------------------------------------------------------------------------


def save_manifest(manifest: dict, path) -> None:
    required = {"embeddings", "labels", "prompts", "num_classes", "dim"}
    missing = required - manifest.keys()
    if missing:
        raise FormatError(f"manifest missing keys: {sorted(missing)}")
    with open(path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


def load_manifest(path) -> dict:
    p = Path(path)
    try:
        manifest = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: not valid JSON ({e})") from e
    required = {"embeddings", "labels", "prompts", "num_classes", "dim"}
    missing = required - manifest.keys()
    if missing:
        raise FormatError(f"{path}: manifest missing keys: {sorted(missing)}")
    for entry in manifest["prompts"]:
        if not {"class", "path", "count"} <= entry.keys():
            raise FormatError(f"{path}: prompt entry missing keys: {entry}")
    return manifest
