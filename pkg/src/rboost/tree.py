"""Weighted least-squares regression trees grown best-first on presorted columns.

Trees consume per-sample ``grad`` and ``hess`` vectors rather than a
response ``z`` and weight ``w``: ``grad = z * w`` and ``hess = w``. A split's
gain then only involves grouped sums,

    gain = G_L**2 / H_L + G_R**2 / H_R - G**2 / H,

so no per-sample division by a vanishing weight ever happens.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .data import Dataset, FeatureColumnIndex

LEAF = -1

# Gains below this fraction of the summed terms are rounding noise.
GAIN_RTOL = 1e-12
# Candidates within this relative margin of the incumbent count as ties.
TIE_RTOL = 1e-12
# Leaf denominator floor.
EPS_DEN = 1e-12


@njit(cache=True, nogil=True)
def _node_best_split(Xt, idx, start, end, grad, hess, min_leaf):
    """Scan every feature of the node occupying ``idx[:, start:end]``.

    Returns ``(feature, n_left, threshold, gain)``; ``feature == -1`` when
    no admissible split has positive gain.
    """
    n_feat = Xt.shape[0]
    n = end - start
    best_feat = -1
    best_nl = 0
    best_thr = 0.0
    best_gain = 0.0
    if n < 2 * min_leaf or n < 2:
        return best_feat, best_nl, best_thr, best_gain
    G = 0.0
    H = 0.0
    for s in range(start, end):
        i = idx[0, s]
        G += grad[i]
        H += hess[i]
    if H <= 0.0:
        return best_feat, best_nl, best_thr, best_gain
    parent = G * G / H
    for d in range(n_feat):
        x = Xt[d]
        GL = 0.0
        HL = 0.0
        for s in range(start, end - 1):
            i = idx[d, s]
            GL += grad[i]
            HL += hess[i]
            nl = s - start + 1
            if nl < min_leaf:
                continue
            if n - nl < min_leaf:
                break
            xa = x[i]
            xb = x[idx[d, s + 1]]
            if not xa < xb:
                continue
            HR = H - HL
            if HL <= 0.0 or HR <= 0.0:
                continue
            GR = G - GL
            lt = GL * GL / HL
            rt = GR * GR / HR
            gain = lt + rt - parent
            if gain <= GAIN_RTOL * (lt + rt + parent):
                continue
            if best_feat >= 0 and gain <= best_gain * (1.0 + TIE_RTOL):
                continue
            thr = 0.5 * (xa + xb)
            if thr >= xb:
                thr = xa
            best_feat = d
            best_nl = nl
            best_thr = thr
            best_gain = gain
    return best_feat, best_nl, best_thr, best_gain


@njit(cache=True, nogil=True)
def _grow(Xt, order, grad, hess, max_leaves, min_leaf):
    n_feat, n = order.shape
    idx = order.copy()
    cap = 2 * max_leaves - 1
    feature = np.full(cap, LEAF, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    nstart = np.zeros(cap, dtype=np.int64)
    nend = np.zeros(cap, dtype=np.int64)
    c_feat = np.full(cap, -1, dtype=np.int64)
    c_nl = np.zeros(cap, dtype=np.int64)
    c_thr = np.zeros(cap)
    c_gain = np.zeros(cap)

    nend[0] = n
    n_nodes = 1
    n_leaves = 1
    if max_leaves > 1:
        c_feat[0], c_nl[0], c_thr[0], c_gain[0] = _node_best_split(
            Xt, idx, 0, n, grad, hess, min_leaf)

    goes_left = np.zeros(n, dtype=np.bool_)
    buf = np.empty(n, dtype=np.int64)
    while n_leaves < max_leaves:
        node = -1
        for j in range(n_nodes):
            if feature[j] == LEAF and c_feat[j] >= 0:
                if node < 0 or c_gain[j] > c_gain[node]:
                    node = j
        if node < 0:
            break
        f = c_feat[node]
        s0 = nstart[node]
        e0 = nend[node]
        mid = s0 + c_nl[node]
        for s in range(s0, mid):
            goes_left[idx[f, s]] = True
        for s in range(mid, e0):
            goes_left[idx[f, s]] = False
        # stable partition of the other feature rows; row f is already split
        for d in range(n_feat):
            if d == f:
                continue
            wl = s0
            wr = 0
            for s in range(s0, e0):
                i = idx[d, s]
                if goes_left[i]:
                    idx[d, wl] = i
                    wl += 1
                else:
                    buf[wr] = i
                    wr += 1
            for t in range(wr):
                idx[d, wl + t] = buf[t]
        lc = n_nodes
        rc = n_nodes + 1
        n_nodes += 2
        n_leaves += 1
        feature[node] = f
        threshold[node] = c_thr[node]
        left[node] = lc
        right[node] = rc
        nstart[lc] = s0
        nend[lc] = mid
        nstart[rc] = mid
        nend[rc] = e0
        if n_leaves < max_leaves:
            c_feat[lc], c_nl[lc], c_thr[lc], c_gain[lc] = _node_best_split(
                Xt, idx, s0, mid, grad, hess, min_leaf)
            c_feat[rc], c_nl[rc], c_thr[rc], c_gain[rc] = _node_best_split(
                Xt, idx, mid, e0, grad, hess, min_leaf)

    leaf_of = np.empty(n, dtype=np.int64)
    for j in range(n_nodes):
        if feature[j] == LEAF:
            for s in range(nstart[j], nend[j]):
                leaf_of[idx[0, s]] = j
    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(),
            left[:n_nodes].copy(), right[:n_nodes].copy(), leaf_of)


@njit(cache=True, nogil=True)
def _apply(X, feature, threshold, left, right):
    out = np.empty(X.shape[0], dtype=np.int64)
    for r in range(X.shape[0]):
        j = 0
        while feature[j] != LEAF:
            if X[r, feature[j]] <= threshold[j]:
                j = left[j]
            else:
                j = right[j]
        out[r] = j
    return out


@dataclass(frozen=True)
class SplitCandidate:
    feature: int
    threshold: float
    gain: float
    left_count: int
    right_count: int


@dataclass
class RegressionTree:
    """Binary tree in flat arrays; node 0 is the root.

    ``feature[j] == -1`` marks a leaf, whose output is ``value[j]``.
    Internal nodes send ``x`` left iff ``x[feature] <= threshold``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_features: int

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def is_leaf(self) -> np.ndarray:
        return self.feature == LEAF

    @property
    def n_leaves(self) -> int:
        return int(np.count_nonzero(self.is_leaf))

    def apply(self, X) -> np.ndarray:
        """Leaf node id reached by each row of ``X``."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(
                f"expected {self.n_features} features, got shape {X.shape}")
        return _apply(X, self.feature, self.threshold, self.left, self.right)

    def predict(self, X) -> np.ndarray:
        return self.value[self.apply(X)]

    def same_structure(self, other: "RegressionTree") -> bool:
        return (np.array_equal(self.feature, other.feature)
                and np.array_equal(self.threshold, other.threshold)
                and np.array_equal(self.left, other.left))


def gain_from_sums(sum_zw_left, sum_w_left, sum_zw_right, sum_w_right) -> float:
    """Weighted squared-error reduction of a split, from its grouped sums."""
    if not (sum_w_left > 0 and sum_w_right > 0):
        raise ValueError("split undefined: both weight sums must be positive")
    total_zw = sum_zw_left + sum_zw_right
    total_w = sum_w_left + sum_w_right
    return (sum_zw_left ** 2 / sum_w_left + sum_zw_right ** 2 / sum_w_right
            - total_zw ** 2 / total_w)


def find_best_split(X, grad, hess, min_leaf: int = 1) -> SplitCandidate | None:
    """Best admissible split of a single node holding all rows of ``X``.

    ``X`` may be one column (1-d) or a sample-by-feature matrix. Ties go to
    the smaller feature index, then the smaller threshold.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if min_leaf < 1:
        raise ValueError("min_leaf must be >= 1")
    grad = np.ascontiguousarray(grad, dtype=np.float64)
    hess = np.ascontiguousarray(hess, dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        return None
    Xt = np.ascontiguousarray(X.T)
    order = np.ascontiguousarray(np.argsort(Xt, axis=1, kind="stable"), dtype=np.int64)
    f, nl, thr, gain = _node_best_split(Xt, order, 0, n, grad, hess, min_leaf)
    if f < 0:
        return None
    return SplitCandidate(int(f), float(thr), float(gain), int(nl), int(n - nl))


def build_tree(data, index: FeatureColumnIndex | None, grad, hess,
               max_leaves: int, min_leaf: int = 1):
    """Grow a tree with at most ``max_leaves`` leaves, best gain first.

    Parameters
    ----------
    data : Dataset or ndarray of shape (n_samples, n_features)
    index : FeatureColumnIndex, optional
        Presorted columns of ``data``; computed if omitted.
    grad, hess : ndarray of shape (n_samples,)
        Split on ``sum(grad)**2 / sum(hess)`` per side.
    max_leaves : int
        ``J``, at least 2.

    Returns
    -------
    tree : RegressionTree
        Leaf values are zero; fill them with :func:`set_leaf_values`.
    leaf_of : ndarray of int
        Leaf node id holding each training sample.
    """
    if max_leaves < 2:
        raise ValueError("max_leaves must be >= 2")
    if min_leaf < 1:
        raise ValueError("min_leaf must be >= 1")
    X = data.features if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)
    Xt = np.ascontiguousarray(X.T)
    if index is not None:
        order = index.order
    else:
        order = np.ascontiguousarray(np.argsort(Xt, axis=1, kind="stable"), dtype=np.int64)
    return _build(Xt, order, grad, hess, max_leaves, min_leaf)


def _build(Xt, order, grad, hess, max_leaves, min_leaf):
    grad = np.ascontiguousarray(grad, dtype=np.float64)
    hess = np.ascontiguousarray(hess, dtype=np.float64)
    feature, threshold, left, right, leaf_of = _grow(
        Xt, order, grad, hess, max_leaves, min_leaf)
    tree = RegressionTree(feature, threshold, left, right,
                          np.zeros(len(feature)), Xt.shape[0])
    return tree, leaf_of


def leaf_value(sum_zw: float, sum_w: float, scale: float = 1.0) -> float:
    if sum_w < EPS_DEN:
        return 0.0
    return scale * sum_zw / sum_w


def set_leaf_values(tree: RegressionTree, leaf_of, grad, hess, scale: float = 1.0) -> None:
    """Assign each leaf ``scale * sum(grad) / sum(hess)`` over its samples."""
    n = tree.n_nodes
    g = np.bincount(leaf_of, weights=grad, minlength=n)
    h = np.bincount(leaf_of, weights=hess, minlength=n)
    safe = np.where(h < EPS_DEN, 1.0, h)
    value = np.where(h < EPS_DEN, 0.0, scale * g / safe)
    value[~tree.is_leaf] = 0.0
    tree.value = value


def predict_tree(tree: RegressionTree, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("x must be a single feature vector")
    return float(tree.predict(x[None, :])[0])
