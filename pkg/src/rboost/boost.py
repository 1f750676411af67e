"""mart, robust logitboost, abc-mart and abc-logitboost trainers.

All four share one loop. Two switches pick the variant:

* criterion ``"mart"`` splits on unit weights, ``"logit"`` on the
  second-derivative weights; leaf values are the same Newton step either way;
* base handling ``plain`` fits one tree per class, ``abc`` fits ``K - 1``
  trees against every candidate base class and keeps the candidate with
  the lowest training loss.
"""

from __future__ import annotations

import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .data import Dataset, FeatureColumnIndex, build_sorted_index
from .evaluation import MetricLog, misclassification_count
from .tree import RegressionTree, _build, set_leaf_values

logger = logging.getLogger(__name__)

ALGORITHMS = ("mart", "logit", "abc-mart", "abc-logit")


def softmax_row(f) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    e = np.exp(f - f.max())
    return e / e.sum()


def softmax(F: np.ndarray) -> np.ndarray:
    """Row-wise softmax of an ``(N, K)`` score matrix."""
    e = np.exp(F - F.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def total_loss(P, labels) -> float:
    """Negative log-likelihood ``-sum_i log P[i, y_i]``."""
    P = np.asarray(P, dtype=np.float64)
    labels = np.asarray(labels)
    return float(-np.log(P[np.arange(len(labels)), labels]).sum())


def loss_from_scores(F: np.ndarray, labels: np.ndarray) -> float:
    """Same loss as :func:`total_loss`, evaluated from scores.

    Uses ``log1p`` on the non-maximal terms so a nearly perfect fit still
    resolves losses far below machine epsilon per sample.
    """
    n = len(labels)
    rows = np.arange(n)
    top = F.argmax(axis=1)
    m = F[rows, top]
    e = np.exp(F - m[:, None])
    e[rows, top] = 0.0
    per = (m - F[rows, labels]) + np.log1p(e.sum(axis=1))
    return float(per.sum())


def grads_plain(r, p):
    """Response ``r - p`` and weight ``p (1 - p)`` for one class."""
    r = np.asarray(r, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    return r - p, p * (1.0 - p)


def grads_abc(r_b, p_b, r_k, p_k):
    """Response and weight for class ``k`` against base class ``b``."""
    r_b, p_b, r_k, p_k = (np.asarray(a, dtype=np.float64) for a in (r_b, p_b, r_k, p_k))
    g = (r_k - p_k) - (r_b - p_b)
    h = p_b * (1.0 - p_b) + p_k * (1.0 - p_k) + 2.0 * p_b * p_k
    return g, h


def hessian_diagnostics(p, base: int) -> tuple[float, float]:
    """Determinants of the K=3 loss Hessian, unconstrained and base-reduced.

    Returns ``(full_det, reduced_det)``. The first is always zero (only two
    degrees of freedom); the second does not depend on ``base``.
    """
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (3,):
        raise ValueError("p must have exactly 3 entries")
    if np.any(p < -1e-9) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"p={p} is not on the probability simplex")
    if base not in (0, 1, 2):
        raise ValueError("base must be 0, 1 or 2")
    full = np.diag(p) - np.outer(p, p)
    with np.errstate(divide="ignore", invalid="ignore"):
        full_det = float(np.linalg.det(full))
    j, k = (c for c in range(3) if c != base)
    pb, pj, pk = p[base], p[j], p[k]
    a = pb * (1 - pb) + pj * (1 - pj) + 2 * pb * pj
    c = pb * (1 - pb) + pk * (1 - pk) + 2 * pb * pk
    off = pb - pb * pb + pb * pj + pb * pk - pj * pk
    return full_det, float(a * c - off * off)


@dataclass
class TrainConfig:
    """Training hyper-parameters.

    ``early_stop_loss=None`` means ``1e-10 * N``. ``seed`` is recorded for
    reproducibility; the trainers themselves draw no random numbers.
    """

    algorithm: str = "abc-logit"
    n_leaves: int = 20
    shrinkage: float = 0.1
    n_iter: int = 1000
    early_stop_loss: float | None = None
    min_leaf: int = 1
    eval_stride: int = 1
    seed: int = 0
    n_threads: int | None = None

    def validate(self) -> "TrainConfig":
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if int(self.n_leaves) < 2:
            raise ValueError("n_leaves (J) must be >= 2")
        if not 0.0 < float(self.shrinkage) <= 1.0:
            raise ValueError("shrinkage must lie in (0, 1]")
        if int(self.n_iter) < 1:
            raise ValueError("n_iter (M) must be >= 1")
        if int(self.min_leaf) < 1:
            raise ValueError("min_leaf must be >= 1")
        if int(self.eval_stride) < 1:
            raise ValueError("eval_stride must be >= 1")
        return self

    @property
    def criterion(self) -> str:
        return "logit" if self.algorithm.endswith("logit") else "mart"

    @property
    def adaptive_base(self) -> bool:
        return self.algorithm.startswith("abc")

    def threads(self) -> int:
        if self.n_threads is not None:
            return max(1, int(self.n_threads))
        try:
            return max(1, int(os.environ.get("RBOOST_THREADS", "1")))
        except ValueError:
            return 1


@dataclass
class BoostState:
    F: np.ndarray
    P: np.ndarray
    labels: np.ndarray
    m: int = 0
    loss: float = float("nan")

    @classmethod
    def initial(cls, labels, n_classes: int) -> "BoostState":
        labels = np.asarray(labels, dtype=np.int64)
        n = len(labels)
        F = np.zeros((n, n_classes))
        P = np.full((n, n_classes), 1.0 / n_classes)
        return cls(F, P, labels, 0, n * math.log(n_classes))

    def commit(self, F: np.ndarray, loss: float | None = None) -> None:
        self.F = F
        self.P = softmax(F)
        self.loss = loss_from_scores(F, self.labels) if loss is None else loss
        self.m += 1


@dataclass
class Iteration:
    """Trees from one boosting round.

    ``classes[t]`` is the class that ``trees[t]`` scores. ``base`` is None
    for plain rounds; for adaptive rounds its score is minus the sum of the
    others.
    """

    classes: tuple[int, ...]
    trees: list[RegressionTree]
    base: int | None = None
    candidate_losses: np.ndarray | None = field(default=None, repr=False, compare=False)


@dataclass
class BoostModel:
    algorithm: str
    n_classes: int
    shrinkage: float
    n_features: int
    label_names: tuple[str, ...]
    iterations: list[Iteration] = field(default_factory=list)

    @property
    def n_iter(self) -> int:
        return len(self.iterations)

    def _check(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got shape {X.shape}")
        return X

    def add_iteration(self, scores: np.ndarray, X: np.ndarray, it: Iteration) -> None:
        """Accumulate one round's contribution into ``scores`` in place."""
        nu = self.shrinkage
        if it.base is None:
            for k, tree in zip(it.classes, it.trees):
                scores[:, k] += nu * tree.predict(X)
        else:
            for k, tree in zip(it.classes, it.trees):
                step = nu * tree.predict(X)
                scores[:, k] += step
                scores[:, it.base] -= step

    def decision_function(self, X, n_iter: int | None = None) -> np.ndarray:
        X = self._check(X)
        scores = np.zeros((X.shape[0], self.n_classes))
        for it in self.iterations[:n_iter]:
            self.add_iteration(scores, X, it)
        return scores

    def predict_proba(self, X, n_iter: int | None = None) -> np.ndarray:
        return softmax(self.decision_function(X, n_iter))

    def predict(self, X, n_iter: int | None = None) -> np.ndarray:
        """Class indices (ties resolve to the smallest index)."""
        return self.decision_function(X, n_iter).argmax(axis=1)


def predict_model(model: BoostModel, x):
    """Scores, probabilities and label index for one feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("x must be a single feature vector")
    scores = model.decision_function(x)[0]
    return scores, softmax_row(scores), int(np.argmax(scores))


class TreeFitter:
    """Shared read-only inputs for the tree fits of one training run."""

    def __init__(self, dataset: Dataset, index: FeatureColumnIndex, config: TrainConfig):
        self.Xt = np.ascontiguousarray(dataset.features.T)
        self.order = index.order
        self.labels = dataset.labels
        self.K = dataset.n_classes
        self.R = np.zeros((dataset.n_samples, self.K))
        self.R[np.arange(dataset.n_samples), dataset.labels] = 1.0
        self.config = config
        self.n_features = dataset.n_features
        self.ones = np.ones(dataset.n_samples)

    def fit(self, g, h, scale):
        """Grow a tree on ``g``; leaf values use ``h`` scaled by ``scale``."""
        cfg = self.config
        h_split = h if cfg.criterion == "logit" else self.ones
        tree, leaf_of = _build(self.Xt, self.order, g, h_split, cfg.n_leaves, cfg.min_leaf)
        set_leaf_values(tree, leaf_of, g, h, scale)
        return tree, tree.value[leaf_of]


def _pool_map(fn, items, n_threads):
    if n_threads <= 1:
        return map(fn, items)
    pool = ThreadPoolExecutor(max_workers=n_threads)
    try:
        return list(pool.map(fn, items))
    finally:
        pool.shutdown()


def iterate_plain(state: BoostState, fitter: TreeFitter) -> Iteration:
    """One round of mart / robust logitboost; updates ``state`` in place."""
    K = fitter.K
    nu = fitter.config.shrinkage
    scale = (K - 1) / K
    P = state.P

    def one(k):
        g, h = grads_plain(fitter.R[:, k], P[:, k])
        return fitter.fit(g, h, scale)

    fits = list(_pool_map(one, range(K), fitter.config.threads()))
    F = state.F.copy()
    for k, (_, fitted) in enumerate(fits):
        F[:, k] += nu * fitted
    state.commit(F)
    return Iteration(tuple(range(K)), [t for t, _ in fits])


def iterate_abc(state: BoostState, fitter: TreeFitter) -> Iteration:
    """One round of abc-mart / abc-logitboost; updates ``state`` in place.

    Every candidate base ``b`` gets its own ``K - 1`` trees and loss; the
    smallest loss wins, ties going to the smaller ``b``.
    """
    K = fitter.K
    nu = fitter.config.shrinkage
    P, R = state.P, fitter.R
    others = [[k for k in range(K) if k != b] for b in range(K)]

    def candidate(b):
        G = state.F.copy()
        trees = []
        for k in others[b]:
            g, h = grads_abc(R[:, b], P[:, b], R[:, k], P[:, k])
            tree, fitted = fitter.fit(g, h, 1.0)
            G[:, k] += nu * fitted
            trees.append(tree)
        G[:, b] = -G[:, others[b]].sum(axis=1)
        return loss_from_scores(G, state.labels), G, trees

    losses = np.empty(K)
    best = None
    for b, (loss, G, trees) in enumerate(_pool_map(candidate, range(K), fitter.config.threads())):
        losses[b] = loss
        if best is None or loss < best[0]:
            best = (loss, G, trees, b)
    loss, G, trees, b = best
    state.commit(G, loss)
    return Iteration(tuple(others[b]), trees, base=b, candidate_losses=losses)


def train(
    dataset: Dataset,
    test: Dataset | None = None,
    config: TrainConfig | None = None,
    *,
    index: FeatureColumnIndex | None = None,
    callback: Callable[[BoostState, Iteration], None] | None = None,
) -> tuple[BoostModel, MetricLog]:
    """Fit a boosted model; optionally track test errors.

    Stops after ``config.n_iter`` rounds or as soon as the training loss
    drops below ``config.early_stop_loss``. A :class:`MetricLog` row is
    written every ``eval_stride`` rounds and for the final round.
    """
    config = (config or TrainConfig()).validate()
    if test is not None:
        if test.n_features != dataset.n_features:
            raise ValueError(
                f"test set has {test.n_features} features, training set {dataset.n_features}")
        if test.label_names != dataset.label_names:
            raise ValueError("test set must share the training label map")
    if index is None:
        index = build_sorted_index(dataset)
    stop_at = config.early_stop_loss
    if stop_at is None:
        stop_at = 1e-10 * dataset.n_samples

    K = dataset.n_classes
    model = BoostModel(config.algorithm, K, float(config.shrinkage), dataset.n_features,
                       dataset.label_names)
    state = BoostState.initial(dataset.labels, K)
    fitter = TreeFitter(dataset, index, config)
    step = iterate_abc if config.adaptive_base else iterate_plain
    log = MetricLog()
    test_scores = None if test is None else np.zeros((test.n_samples, K))
    t0 = time.perf_counter()

    for m in range(1, config.n_iter + 1):
        it = step(state, fitter)
        model.iterations.append(it)
        if test is not None:
            model.add_iteration(test_scores, test.features, it)
        if callback is not None:
            callback(state, it)
        done = state.loss < stop_at or m == config.n_iter
        if m % config.eval_stride == 0 or done:
            errors = None
            if test is not None:
                errors = misclassification_count(test_scores.argmax(axis=1), test.labels)
            log.append(m, state.loss, errors, time.perf_counter() - t0)
            logger.info("iter %d loss %.6g test errors %s", m, state.loss, errors)
        if done:
            break
    return model, log
