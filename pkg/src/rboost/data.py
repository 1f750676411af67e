"""Dataset ingestion (LIBSVM / CSV) and presorted feature columns."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

FORMATS = ("libsvm", "csv")


class DataError(ValueError):
    """Raised for unreadable or malformed dataset files."""


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def sort_label_tokens(tokens: Iterable[str]) -> list[str]:
    """Distinct label tokens in class-index order.

    Numeric tokens sort by value, anything else lexicographically; when the
    two kinds are mixed the numeric ones come first.
    """
    distinct = set(tokens)

    def key(tok):
        if _is_number(tok):
            return (0, float(tok), tok)
        return (1, 0.0, tok)

    return sorted(distinct, key=key)


@dataclass(frozen=True)
class Dataset:
    """Dense samples with labels remapped to ``0..K-1``.

    ``label_names[c]`` is the original token of class ``c``.
    """

    features: np.ndarray
    labels: np.ndarray
    label_names: tuple[str, ...]

    def __post_init__(self):
        X = np.ascontiguousarray(self.features, dtype=np.float64)
        y = np.ascontiguousarray(self.labels, dtype=np.int64)
        if X.ndim != 2:
            raise DataError("features must be a 2-d array")
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise DataError("dataset needs at least one sample and one feature")
        if y.shape != (X.shape[0],):
            raise DataError("labels must have one entry per sample")
        if not np.all(np.isfinite(X)):
            raise DataError("non-finite feature value")
        if len(self.label_names) < 1:
            raise DataError("empty label set")
        if y.min() < 0 or y.max() >= len(self.label_names):
            raise DataError("label index out of range")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "label_names", tuple(str(t) for t in self.label_names))

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.label_names)

    def indicator(self, k: int) -> np.ndarray:
        """``r_k``: 1.0 where the sample belongs to class ``k``."""
        return (self.labels == k).astype(np.float64)

    def original_labels(self) -> list[str]:
        return [self.label_names[c] for c in self.labels]

    @classmethod
    def from_arrays(cls, X, tokens: Sequence, label_map: Sequence[str] | None = None) -> "Dataset":
        tokens = [str(t) for t in tokens]
        names = list(label_map) if label_map is not None else sort_label_tokens(tokens)
        lookup = {name: i for i, name in enumerate(names)}
        try:
            y = np.array([lookup[t] for t in tokens], dtype=np.int64)
        except KeyError as exc:
            raise DataError(f"label {exc.args[0]!r} not present in the label map") from None
        return cls(np.asarray(X, dtype=np.float64), y, tuple(names))


@dataclass(frozen=True)
class FeatureColumnIndex:
    """Per-feature ascending sample orderings (0-based, stable on ties).

    ``order[d]`` lists sample indices by increasing value of feature ``d``;
    ``breaks[d, s]`` is True when the value at sorted position ``s`` is
    strictly below the value at ``s + 1``, i.e. an admissible cut.
    """

    order: np.ndarray
    breaks: np.ndarray = field(repr=False)

    def split_positions(self, d: int) -> np.ndarray:
        """Sorted positions ``s`` after which feature ``d`` may be cut."""
        return np.flatnonzero(self.breaks[d])

    def runs(self, d: int) -> list[np.ndarray]:
        """Sample-index groups of tied values for feature ``d``."""
        cuts = self.split_positions(d) + 1
        return np.split(self.order[d], cuts)


def build_sorted_index(dataset: Dataset) -> FeatureColumnIndex:
    X = dataset.features
    order = np.argsort(X, axis=0, kind="stable").T.copy()
    sorted_vals = np.take_along_axis(X.T, order, axis=1)
    breaks = sorted_vals[:, 1:] > sorted_vals[:, :-1]
    order = np.ascontiguousarray(order, dtype=np.int64)
    order.setflags(write=False)
    breaks.setflags(write=False)
    return FeatureColumnIndex(order=order, breaks=breaks)


def _parse_float(tok: str, lineno: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise DataError(f"line {lineno}: malformed value {tok!r}") from None
    if not math.isfinite(v):
        raise DataError(f"line {lineno}: non-finite feature value {tok!r}")
    return v


def _read_libsvm(path: Path):
    tokens, rows, max_id = [], [], 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            row = {}
            for item in parts[1:]:
                fid, sep, val = item.partition(":")
                if not sep or not fid.isdigit() or int(fid) < 1:
                    raise DataError(f"line {lineno}: malformed entry {item!r}")
                row[int(fid)] = _parse_float(val, lineno)
            if row:
                max_id = max(max_id, max(row))
            tokens.append(parts[0])
            rows.append(row)
    X = np.zeros((len(rows), max_id))
    for i, row in enumerate(rows):
        for fid, v in row.items():
            X[i, fid - 1] = v
    return X, tokens


def _read_csv(path: Path, header: bool):
    tokens, rows, width = [], [], None
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for row in reader:
            lineno = reader.line_num
            if header and lineno == 1:
                continue
            if not row or all(not c.strip() for c in row):
                continue
            if width is None:
                width = len(row)
                if width < 2:
                    raise DataError(f"line {lineno}: need at least one feature and a label")
            elif len(row) != width:
                raise DataError(f"line {lineno}: expected {width} columns, got {len(row)}")
            rows.append([_parse_float(c.strip(), lineno) for c in row[:-1]])
            tokens.append(row[-1].strip())
    X = np.array(rows, dtype=np.float64).reshape(len(rows), (width or 1) - 1)
    return X, tokens


def load_dataset(
    path,
    format: str,
    label_map: Sequence[str] | None = None,
    *,
    header: bool = False,
    n_features: int | None = None,
) -> Dataset:
    """Read a LIBSVM or CSV file.

    Parameters
    ----------
    path : path-like
    format : {"libsvm", "csv"}
    label_map : sequence of str, optional
        ``label_names`` of a previously loaded dataset. Reusing it keeps the
        class indices of a test file aligned with its training file.
    header : bool
        CSV only: skip the first row.
    n_features : int, optional
        Pad a LIBSVM file whose highest feature id is below the training
        dimension. A file with more features than this is an error.
    """
    if format not in FORMATS:
        raise DataError(f"unknown format {format!r}; expected one of {FORMATS}")
    path = Path(path)
    try:
        if format == "libsvm":
            X, tokens = _read_libsvm(path)
        else:
            X, tokens = _read_csv(path, header)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise DataError(f"{path}: not a text file") from None
    if not tokens:
        raise DataError(f"{path}: empty file")
    if n_features is not None:
        if X.shape[1] > n_features:
            raise DataError(f"{path}: {X.shape[1]} features, expected {n_features}")
        if X.shape[1] < n_features:
            if format == "csv":
                raise DataError(f"{path}: {X.shape[1]} features, expected {n_features}")
            X = np.hstack([X, np.zeros((X.shape[0], n_features - X.shape[1]))])
    if X.shape[1] == 0:
        raise DataError(f"{path}: no feature values")
    return Dataset.from_arrays(X, tokens, label_map)
