"""scikit-learn estimator wrapper around :func:`rboost.boost.train`."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.multiclass import check_classification_targets
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .boost import BoostModel, TrainConfig, softmax, train
from .data import Dataset


class BoostClassifier(ClassifierMixin, BaseEstimator):
    """Multi-class boosted trees: mart, logit, abc-mart or abc-logit.

    Parameters
    ----------
    algorithm : {"mart", "logit", "abc-mart", "abc-logit"}, default="abc-logit"
        ``logit`` is robust logitboost; the ``abc-`` variants pick a base
        class adaptively every iteration.
    n_leaves : int, default=20
        Terminal nodes per tree (``J``).
    learning_rate : float, default=0.1
        Shrinkage ``nu`` in (0, 1].
    n_iter : int, default=1000
        Maximum boosting iterations (``M``).
    early_stop_loss : float, optional
        Stop once the training loss falls below this. Defaults to
        ``1e-10 * n_samples``.
    min_samples_leaf : int, default=1
    eval_stride : int, default=1
        Record a :attr:`metric_log_` row every this many iterations.
    random_state : int, optional
        Stored for bookkeeping; fitting is deterministic.
    n_jobs : int, optional
        Threads for the per-class tree fits. ``None`` reads
        ``RBOOST_THREADS`` (default 1).

    Attributes
    ----------
    classes_ : ndarray
    model_ : BoostModel
    metric_log_ : MetricLog
        Training loss, and held-out errors when ``eval_set`` was given.
    """

    def __init__(self, algorithm="abc-logit", n_leaves=20, learning_rate=0.1, n_iter=1000,
                 early_stop_loss=None, min_samples_leaf=1, eval_stride=1, random_state=None,
                 n_jobs=None):
        self.algorithm = algorithm
        self.n_leaves = n_leaves
        self.learning_rate = learning_rate
        self.n_iter = n_iter
        self.early_stop_loss = early_stop_loss
        self.min_samples_leaf = min_samples_leaf
        self.eval_stride = eval_stride
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _config(self) -> TrainConfig:
        return TrainConfig(
            algorithm=self.algorithm,
            n_leaves=self.n_leaves,
            shrinkage=self.learning_rate,
            n_iter=self.n_iter,
            early_stop_loss=self.early_stop_loss,
            min_leaf=self.min_samples_leaf,
            eval_stride=self.eval_stride,
            seed=0 if self.random_state is None else self.random_state,
            n_threads=self.n_jobs,
        ).validate()

    def _encode(self, y):
        lookup = {c: i for i, c in enumerate(self.classes_)}
        try:
            return np.array([lookup[v] for v in y], dtype=np.int64)
        except KeyError as exc:
            raise ValueError(f"unknown label {exc.args[0]!r}") from None

    def fit(self, X, y, eval_set=None):
        """Fit on ``(X, y)``; ``eval_set=(X_val, y_val)`` adds test errors to the log."""
        config = self._config()
        X, y = check_X_y(X, y, dtype=np.float64)
        check_classification_targets(y)
        self.classes_, y_enc = np.unique(y, return_inverse=True)
        if len(self.classes_) < 2:
            raise ValueError("need at least two classes; y contains only one class")
        names = tuple(str(c) for c in self.classes_)
        dataset = Dataset(X, y_enc, names)
        test = None
        if eval_set is not None:
            X_val, y_val = eval_set
            X_val = check_array(X_val, dtype=np.float64)
            test = Dataset(X_val, self._encode(np.asarray(y_val)), names)
        self.model_, self.metric_log_ = train(dataset, test, config)
        self.n_features_in_ = X.shape[1]
        return self

    @classmethod
    def from_model(cls, model: BoostModel) -> "BoostClassifier":
        """Wrap a trained (e.g. loaded) model; classes are its label tokens."""
        est = cls(algorithm=model.algorithm, learning_rate=model.shrinkage, n_iter=max(1, model.n_iter))
        est.model_ = model
        est.classes_ = np.array(model.label_names)
        est.n_features_in_ = model.n_features
        return est

    def _validate_X(self, X):
        check_is_fitted(self)
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, but {type(self).__name__} "
                f"is expecting {self.n_features_in_} features as input")
        return X

    def _scores(self, X):
        X = self._validate_X(X)
        return self.model_.decision_function(X)

    @staticmethod
    def _as_decision(scores):
        # binary problems follow the scikit-learn convention of one column
        return scores[:, 1] - scores[:, 0] if scores.shape[1] == 2 else scores

    def decision_function(self, X):
        """Class scores ``F``; for two classes, ``F[:, 1] - F[:, 0]``."""
        return self._as_decision(self._scores(X))

    def predict_proba(self, X):
        return softmax(self._scores(X))

    def predict(self, X):
        scores = self._scores(X)
        return self.classes_[scores.argmax(axis=1)]

    def _staged_scores(self, X):
        X = self._validate_X(X)
        scores = np.zeros((X.shape[0], self.model_.n_classes))
        for it in self.model_.iterations:
            self.model_.add_iteration(scores, X, it)
            yield scores.copy()

    def staged_decision_function(self, X):
        """Yield the decision values after each boosting iteration."""
        for scores in self._staged_scores(X):
            yield self._as_decision(scores)

    def staged_predict(self, X):
        for scores in self._staged_scores(X):
            yield self.classes_[scores.argmax(axis=1)]
