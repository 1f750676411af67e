"""Synthetic datasets and the UCI Letter train/test split.

``python -m rboost.datasets letter letter-recognition.data OUTDIR`` writes
``letter2k-train.csv`` / ``letter2k-test.csv`` (and the 4k / 15k variants)
with the label moved to the last column.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .data import Dataset

# training sizes; Letter2k / Letter4k train on the last rows, Letter15k on the first
LETTER_SPLITS = {"letter2k": 2000, "letter4k": 4000, "letter15k": 15000}


def make_separable(n_samples=200, n_classes=3, n_features=2, margin=0.05, seed=0) -> Dataset:
    """Classes are bands between parallel hyperplanes, with an empty margin."""
    rng = np.random.default_rng(seed)
    direction = rng.standard_normal(n_features)
    direction /= np.linalg.norm(direction)
    cuts = np.linspace(-1, 1, n_classes + 1)[1:-1]
    rows, labels = [], []
    while len(rows) < n_samples:
        x = rng.uniform(-1.5, 1.5, n_features)
        t = x @ direction
        if np.min(np.abs(t - cuts)) < margin:
            continue
        rows.append(x)
        labels.append(int(np.searchsorted(cuts, t)))
    return Dataset(np.array(rows), np.array(labels), tuple(str(k) for k in range(n_classes)))


def make_blobs(n_samples=500, n_classes=4, n_features=4, spread=1.0, seed=0) -> Dataset:
    """Overlapping Gaussian classes around random centres."""
    rng = np.random.default_rng(seed)
    centres = rng.uniform(-2, 2, (n_classes, n_features))
    y = np.arange(n_samples) % n_classes
    rng.shuffle(y)
    X = centres[y] + spread * rng.standard_normal((n_samples, n_features))
    return Dataset(X, y, tuple(str(k) for k in range(n_classes)))


def make_two_gaussians(n_samples=1000, n_features=5, shift=0.8, prior=0.6, seed=0) -> Dataset:
    """Binary problem: two unit-variance Gaussians, class 0 more frequent."""
    rng = np.random.default_rng(seed)
    y = (rng.random(n_samples) > prior).astype(np.int64)
    mean = np.zeros(n_features)
    mean[:2] = shift
    X = rng.standard_normal((n_samples, n_features)) + y[:, None] * mean
    return Dataset(X, y, ("0", "1"))


def read_letter(path) -> tuple[np.ndarray, list[str]]:
    """Rows of the raw UCI file: letter first, then 16 integer features."""
    X, tokens = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if row:
                tokens.append(row[0].strip())
                X.append([float(v) for v in row[1:]])
    return np.array(X), tokens


def split_letter(path, name: str = "letter2k"):
    """``(train_X, train_tokens, test_X, test_tokens)`` for a named split."""
    X, tokens = read_letter(path)
    n_train = LETTER_SPLITS[name]
    if name == "letter15k":
        return X[:n_train], tokens[:n_train], X[n_train:], tokens[n_train:]
    cut = len(X) - n_train
    return X[cut:], tokens[cut:], X[:cut], tokens[:cut]


def _write_csv(path, X, tokens):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row, tok in zip(X, tokens):
            w.writerow([format(v, "g") for v in row] + [tok])


def write_letter_splits(raw, outdir) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for name in LETTER_SPLITS:
        Xtr, ytr, Xte, yte = split_letter(raw, name)
        for part, X, y in (("train", Xtr, ytr), ("test", Xte, yte)):
            path = outdir / f"{name}-{part}.csv"
            _write_csv(path, X, y)
            written.append(path)
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="python -m rboost.datasets")
    sub = parser.add_subparsers(dest="cmd", required=True)
    p = sub.add_parser("letter", help="split letter-recognition.data into CSV files")
    p.add_argument("raw")
    p.add_argument("outdir")
    args = parser.parse_args(argv)
    for path in write_letter_splits(args.raw, args.outdir):
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
