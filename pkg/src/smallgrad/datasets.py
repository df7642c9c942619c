"""Sparse binary-classification datasets: LIBSVM text I/O, row normalization,
bias augmentation, and seeded synthetic generation.

Feature indices are 1-based on disk (LIBSVM convention) and 0-based
internally; the conversion lives entirely in the parser/serializer.
"""

from __future__ import annotations

import gzip
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class ParseError(ValueError):
    def __init__(self, message: str, lineno: int):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class SparseDataset:
    """CSR-stored rows a_i with labels b_i in {-1, +1}."""

    indptr: np.ndarray
    indices: np.ndarray  # 0-based, strictly increasing within each row
    data: np.ndarray
    labels: np.ndarray
    d: int
    zero_rows: tuple = field(default=())

    @property
    def n(self) -> int:
        return int(self.labels.shape[0])

    def validate(self) -> None:
        if self.n < 1:
            raise ValueError("dataset must contain at least one row")
        if not np.all(np.isin(self.labels, (-1.0, 1.0))):
            raise ValueError("labels must be in {-1, +1}")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("feature values must be finite")
        for i in range(self.n):
            row = self.indices[self.indptr[i]:self.indptr[i + 1]]
            if row.size and (np.any(np.diff(row) <= 0) or row[0] < 0
                             or row[-1] >= self.d):
                raise ValueError(f"row {i}: bad feature indices")

    def row_norms(self) -> np.ndarray:
        sq = np.zeros(self.n)
        for i in range(self.n):
            vals = self.data[self.indptr[i]:self.indptr[i + 1]]
            sq[i] = vals @ vals
        return np.sqrt(sq)


def _open_text(source):
    if isinstance(source, (str, Path)):
        path = Path(source)
        raw = path.open("rb")
        if path.suffix == ".gz" or raw.peek(2)[:2] == b"\x1f\x8b":
            return io.TextIOWrapper(gzip.GzipFile(fileobj=raw)), True
        return io.TextIOWrapper(raw), True
    return source, False


def _map_label(raw: float, strict: bool, lineno: int) -> float:
    if strict and raw not in (-1.0, 1.0, 0.0):
        raise ParseError(f"label {raw} outside {{-1, +1, 0/1}}", lineno)
    return 1.0 if raw > 0 else -1.0


def parse_libsvm(source, strict_labels: bool = False) -> SparseDataset:
    """Parse `<label> <idx>:<val> ...` lines into a dataset.

    Blank lines are skipped. Positive labels map to +1, everything else to
    -1; ``strict_labels`` additionally rejects raw labels outside
    {-1, +1, 0, 1}. Indices must be >= 1 and strictly increasing within a
    row. Gzip-compressed files are decompressed transparently.
    """
    stream, owned = _open_text(source)
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    labels: list[float] = []
    try:
        for lineno, line in enumerate(stream, start=1):
            line = line.strip()
            if not line:
                continue
            tokens = line.split()
            try:
                raw_label = float(tokens[0])
            except ValueError:
                raise ParseError(f"bad label token {tokens[0]!r}", lineno)
            labels.append(_map_label(raw_label, strict_labels, lineno))
            prev = 0
            for tok in tokens[1:]:
                idx_s, _, val_s = tok.partition(":")
                try:
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError:
                    raise ParseError(f"bad feature token {tok!r}", lineno)
                if idx < 1:
                    raise ParseError(f"feature index {idx} < 1", lineno)
                if idx <= prev:
                    raise ParseError(
                        f"feature index {idx} not increasing", lineno)
                if not np.isfinite(val):
                    raise ParseError(f"non-finite value in {tok!r}", lineno)
                prev = idx
                indices.append(idx - 1)
                data.append(val)
            indptr.append(len(indices))
    finally:
        if owned:
            stream.close()
    if not labels:
        raise ParseError("no data lines found", 0)
    d = int(max(indices) + 1) if indices else 0
    ds = SparseDataset(indptr=np.asarray(indptr, dtype=np.int64),
                       indices=np.asarray(indices, dtype=np.int64),
                       data=np.asarray(data, dtype=np.float64),
                       labels=np.asarray(labels, dtype=np.float64), d=d)
    ds.validate()
    return ds


def serialize_libsvm(ds: SparseDataset, target) -> None:
    """Write LIBSVM text that reparses to an identical dataset."""
    def write(stream):
        for i in range(ds.n):
            lo, hi = ds.indptr[i], ds.indptr[i + 1]
            parts = [f"{int(ds.labels[i]):+d}"]
            parts += [f"{int(ds.indices[j]) + 1}:{float(ds.data[j])!r}"
                      for j in range(lo, hi)]
            stream.write(" ".join(parts) + "\n")

    if isinstance(target, (str, Path)):
        with open(target, "w") as fh:
            write(fh)
    else:
        write(target)


def normalize_rows(ds: SparseDataset) -> SparseDataset:
    """Scale every nonzero row to unit Euclidean norm.

    Zero rows are left untouched and reported in ``zero_rows``. Rows already
    within a few ulp of unit norm are passed through unchanged, which makes
    normalization bitwise idempotent.
    """
    data = ds.data.copy()
    norms = ds.row_norms()
    zero = []
    for i in range(ds.n):
        if norms[i] == 0.0:
            zero.append(i)
            continue
        if abs(norms[i] - 1.0) <= 4 * np.finfo(float).eps:
            continue
        data[ds.indptr[i]:ds.indptr[i + 1]] /= norms[i]
    return SparseDataset(indptr=ds.indptr, indices=ds.indices, data=data,
                         labels=ds.labels, d=ds.d, zero_rows=tuple(zero))


def append_bias(ds: SparseDataset) -> SparseDataset:
    """Append one always-on feature of value 1 to every row."""
    n = ds.n
    nnz = ds.data.shape[0]
    indptr = ds.indptr + np.arange(n + 1, dtype=np.int64)
    indices = np.empty(nnz + n, dtype=np.int64)
    data = np.empty(nnz + n, dtype=np.float64)
    for i in range(n):
        lo, hi = ds.indptr[i], ds.indptr[i + 1]
        indices[indptr[i]:indptr[i + 1] - 1] = ds.indices[lo:hi]
        data[indptr[i]:indptr[i + 1] - 1] = ds.data[lo:hi]
        indices[indptr[i + 1] - 1] = ds.d
        data[indptr[i + 1] - 1] = 1.0
    return SparseDataset(indptr=indptr, indices=indices, data=data,
                         labels=ds.labels, d=ds.d + 1)


def prepare(ds: SparseDataset, bias: bool = True, normalize: bool = True,
            bias_first: bool = True) -> SparseDataset:
    """Bias/normalization pipeline; default order is bias then normalize,
    which puts unit-norm rows (and hence L = 0.25) on the augmented data."""
    steps = []
    if bias_first:
        if bias:
            steps.append(append_bias)
        if normalize:
            steps.append(normalize_rows)
    else:
        if normalize:
            steps.append(normalize_rows)
        if bias:
            steps.append(append_bias)
    for step in steps:
        ds = step(ds)
    return ds


def synth_dataset(seed: int, n: int, d: int, separability: float = 0.8,
                  condition: float = 1.0) -> SparseDataset:
    """Gaussian rows with labels from a planted hyperplane plus label noise.

    Each label follows the planted sign with probability ``separability``
    and is a fair coin otherwise, so 0 makes labels independent of the
    features and values below 1 keep the logistic optimum finite.
    ``condition`` geometrically shrinks feature columns until their
    covariance has roughly that condition number; the default 1 keeps the
    rows isotropic, larger values emulate the poorly conditioned feature
    sets of real classification data. Deterministic per seed.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be >= 1")
    if not 0.0 <= separability <= 1.0:
        raise ValueError("separability must be in [0, 1]")
    if condition < 1.0:
        raise ValueError("condition must be >= 1")
    rng = np.random.default_rng(seed)
    rows = rng.standard_normal((n, d))
    if condition > 1.0 and d > 1:
        rows *= np.logspace(0.0, -0.5 * math.log10(condition), d)
    w = rng.standard_normal(d)
    w /= np.linalg.norm(w)
    planted = np.where(rows @ w >= 0.0, 1.0, -1.0)
    keep = rng.random(n) < separability
    coin = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    labels = np.where(keep, planted, coin)
    return SparseDataset(
        indptr=np.arange(0, n * d + 1, d, dtype=np.int64),
        indices=np.tile(np.arange(d, dtype=np.int64), n),
        data=rows.ravel(), labels=labels, d=d)
