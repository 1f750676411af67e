"""Error counts, significance tests and error-vs-iteration curves."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CURVE_HEADER = ("iteration", "train_loss", "test_errors", "seconds")


def misclassification_count(predictions, truth) -> int:
    predictions = np.asarray(predictions)
    truth = np.asarray(truth)
    if predictions.shape != truth.shape:
        raise ValueError(f"length mismatch: {predictions.shape} vs {truth.shape}")
    return int(np.count_nonzero(predictions != truth))


def normal_sf(z: float) -> float:
    """Upper tail ``1 - Phi(z)`` of the standard normal."""
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def pvalue_two_proportion(err_a: int, err_b: int, n_test: int) -> float:
    """One-sided P-value that method B has a lower error rate than method A.

    Each error rate is treated as a binomial proportion with estimated
    variance ``p(1 - p) / n_test``; the two variances are added (unpooled).
    Values under 1e-300 are reported as 0.
    """
    if n_test < 1:
        raise ValueError("n_test must be >= 1")
    for e in (err_a, err_b):
        if not 0 <= e <= n_test:
            raise ValueError(f"error count {e} outside [0, {n_test}]")
    pa = err_a / n_test
    pb = err_b / n_test
    var = (pa * (1 - pa) + pb * (1 - pb)) / n_test
    if var == 0.0:
        raise ValueError("degenerate input: both error rates are 0 or 1")
    p = normal_sf((pa - pb) / math.sqrt(var))
    return 0.0 if p < 1e-300 else p


def relative_improvement(err_base: int, err_new: int) -> float:
    if err_base == 0:
        raise ValueError("err_base must be positive")
    return (err_base - err_new) / err_base


@dataclass
class MetricLog:
    """Rows of ``(iteration, train_loss, test_errors, seconds)``.

    ``test_errors`` is None when training ran without a test set.
    """

    rows: list[tuple[int, float, int | None, float]] = field(default_factory=list)

    def append(self, iteration: int, train_loss: float, test_errors: int | None,
               seconds: float) -> None:
        if self.rows and iteration <= self.rows[-1][0]:
            raise ValueError("iterations must be strictly increasing")
        self.rows.append((int(iteration), float(train_loss),
                          None if test_errors is None else int(test_errors), float(seconds)))

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def iterations(self) -> np.ndarray:
        return np.array([r[0] for r in self.rows], dtype=np.int64)

    @property
    def test_errors(self) -> list[int | None]:
        return [r[2] for r in self.rows]

    @property
    def train_loss(self) -> np.ndarray:
        return np.array([r[1] for r in self.rows])


def emit_curves(log: MetricLog, path) -> None:
    """Write ``log`` as CSV; floats keep 17 significant digits."""
    if not len(log):
        raise ValueError("refusing to write an empty metric log")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_HEADER)
        for m, loss, errors, secs in log:
            w.writerow([m, format(loss, ".17g"), "" if errors is None else errors,
                        format(secs, ".17g")])


def read_curves(path) -> MetricLog:
    log = MetricLog()
    with open(Path(path), newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != CURVE_HEADER:
            raise ValueError(f"{path}: not a curve file")
        for row in reader:
            m, loss, errors, secs = row
            log.append(int(m), float(loss), int(errors) if errors else None, float(secs))
    return log


def improvement_curve(base: MetricLog, new: MetricLog) -> list[tuple[int, float]]:
    """Relative test-error improvement of ``new`` over ``base`` per shared iteration."""
    new_errors = {m: e for m, _, e, _ in new}
    out = []
    for m, _, e, _ in base:
        if e and new_errors.get(m) is not None:
            out.append((m, relative_improvement(e, new_errors[m])))
    return out
