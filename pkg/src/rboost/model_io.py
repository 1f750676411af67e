"""Plain-text model files.

Layout (one record per line)::

    rboost-model v1
    algorithm abc-logit
    n_classes 26
    shrinkage 0.10000000000000001
    n_features 16
    labels ["A", "B", ...]
    n_iter 2
    iteration 1 base 3
    tree 0 5
    N 4 7.5
    L 0.25
    ...

A ``tree <class> <n_nodes>`` block lists nodes in preorder: ``N feature
threshold`` for a split (left subtree first), ``L value`` for a leaf.
Plain rounds omit ``base``. Reals use 17 significant digits, which
round-trip binary64 exactly.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .boost import ALGORITHMS, BoostModel, Iteration
from .tree import LEAF, RegressionTree

MAGIC = "rboost-model"
VERSION = "v1"


class ModelFormatError(ValueError):
    """Raised when a model file cannot be parsed."""


def _real(x: float) -> str:
    return format(float(x), ".17g")


def _tree_lines(tree: RegressionTree, out: list[str]) -> None:
    stack = [0]
    while stack:
        j = stack.pop()
        if tree.feature[j] == LEAF:
            out.append(f"L {_real(tree.value[j])}")
        else:
            out.append(f"N {int(tree.feature[j])} {_real(tree.threshold[j])}")
            stack.append(int(tree.right[j]))
            stack.append(int(tree.left[j]))


def dumps_model(model: BoostModel) -> str:
    lines = [
        f"{MAGIC} {VERSION}",
        f"algorithm {model.algorithm}",
        f"n_classes {model.n_classes}",
        f"shrinkage {_real(model.shrinkage)}",
        f"n_features {model.n_features}",
        f"labels {json.dumps(list(model.label_names))}",
        f"n_iter {model.n_iter}",
    ]
    for m, it in enumerate(model.iterations, start=1):
        lines.append(f"iteration {m}" if it.base is None else f"iteration {m} base {it.base}")
        for k, tree in zip(it.classes, it.trees):
            lines.append(f"tree {k} {tree.n_nodes}")
            _tree_lines(tree, lines)
    return "\n".join(lines) + "\n"


def save_model(model: BoostModel, path) -> None:
    Path(path).write_text(dumps_model(model), encoding="utf-8")


class _Reader:
    def __init__(self, raw: bytes, source: str):
        self.source = source
        self.lines = []
        offset = 0
        for line in raw.split(b"\n"):
            self.lines.append((offset, line.decode("utf-8", errors="replace").strip()))
            offset += len(line) + 1
        while self.lines and not self.lines[-1][1]:
            self.lines.pop()
        self.pos = 0
        self.eof_offset = len(raw)

    def fail(self, msg: str, offset: int | None = None):
        if offset is None:
            offset = self.lines[self.pos - 1][0] if self.pos else 0
        raise ModelFormatError(f"{self.source}: byte {offset}: {msg}")

    def next(self, what: str) -> list[str]:
        if self.pos >= len(self.lines):
            self.fail(f"unexpected end of file, expected {what}", self.eof_offset)
        _, text = self.lines[self.pos]
        self.pos += 1
        return text.split()

    def field(self, name: str) -> str:
        parts = self.next(name)
        if len(parts) < 2 or parts[0] != name:
            self.fail(f"expected '{name} <value>'")
        return " ".join(parts[1:])

    def int(self, text: str) -> int:
        try:
            return int(text)
        except ValueError:
            self.fail(f"bad integer {text!r}")

    def real(self, text: str) -> float:
        try:
            v = float(text)
        except ValueError:
            self.fail(f"bad number {text!r}")
        if not math.isfinite(v):
            self.fail(f"non-finite value {text!r}")
        return v


def _read_tree(rd: _Reader, n_nodes: int, n_features: int) -> RegressionTree:
    feature = np.full(n_nodes, LEAF, dtype=np.int64)
    threshold = np.zeros(n_nodes)
    left = np.full(n_nodes, -1, dtype=np.int64)
    right = np.full(n_nodes, -1, dtype=np.int64)
    value = np.zeros(n_nodes)
    # preorder: (node id, parent, is_right_child)
    pending = [(-1, False)]
    for j in range(n_nodes):
        if not pending:
            rd.fail("tree block has more nodes than its structure allows")
        parent, is_right = pending.pop()
        if parent >= 0:
            (right if is_right else left)[parent] = j
        parts = rd.next("tree node")
        if parts[:1] == ["N"] and len(parts) == 3:
            f = rd.int(parts[1])
            if not 0 <= f < n_features:
                rd.fail(f"feature index {f} out of range")
            feature[j] = f
            threshold[j] = rd.real(parts[2])
            pending.append((j, True))
            pending.append((j, False))
        elif parts[:1] == ["L"] and len(parts) == 2:
            value[j] = rd.real(parts[1])
        else:
            rd.fail("expected 'N <feature> <threshold>' or 'L <value>'")
    if pending:
        rd.fail("truncated tree block")
    return RegressionTree(feature, threshold, left, right, value, n_features)


def loads_model(raw: bytes | str, source: str = "<model>") -> BoostModel:
    if isinstance(raw, str):
        raw = raw.encode("utf-8")
    rd = _Reader(raw, source)
    head = rd.next("header")
    if len(head) != 2 or head[0] != MAGIC:
        rd.fail("not an rboost model file")
    if head[1] != VERSION:
        rd.fail(f"unsupported model version {head[1]!r} (expected {VERSION})")
    algorithm = rd.field("algorithm")
    if algorithm not in ALGORITHMS:
        rd.fail(f"unknown algorithm {algorithm!r}")
    K = rd.int(rd.field("n_classes"))
    nu = rd.real(rd.field("shrinkage"))
    D = rd.int(rd.field("n_features"))
    try:
        labels = json.loads(rd.field("labels"))
    except json.JSONDecodeError:
        rd.fail("labels must be a JSON list")
    if not isinstance(labels, list) or len(labels) != K:
        rd.fail(f"expected {K} labels")
    n_iter = rd.int(rd.field("n_iter"))
    if K < 2 or D < 1 or n_iter < 0:
        rd.fail("invalid model dimensions")
    adaptive = algorithm.startswith("abc")
    model = BoostModel(algorithm, K, nu, D, tuple(str(t) for t in labels))
    for m in range(1, n_iter + 1):
        parts = rd.next("iteration")
        if parts[:2] != ["iteration", str(m)]:
            rd.fail(f"expected 'iteration {m}'")
        base = None
        if adaptive:
            if len(parts) != 4 or parts[2] != "base":
                rd.fail("adaptive-base iteration needs 'base <class>'")
            base = rd.int(parts[3])
            if not 0 <= base < K:
                rd.fail(f"base class {base} out of range")
            classes = [k for k in range(K) if k != base]
        elif len(parts) != 2:
            rd.fail("unexpected fields after iteration number")
        else:
            classes = list(range(K))
        trees = []
        for k in classes:
            parts = rd.next("tree")
            if len(parts) != 3 or parts[0] != "tree" or rd.int(parts[1]) != k:
                rd.fail(f"expected 'tree {k} <n_nodes>'")
            n_nodes = rd.int(parts[2])
            if n_nodes < 1 or n_nodes % 2 == 0:
                rd.fail(f"invalid node count {n_nodes}")
            trees.append(_read_tree(rd, n_nodes, D))
        model.iterations.append(Iteration(tuple(classes), trees, base))
    if rd.pos != len(rd.lines):
        rd.fail("trailing data after last iteration", rd.lines[rd.pos][0])
    return model


def load_model(path) -> BoostModel:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ModelFormatError(f"cannot read {path}: {exc.strerror}") from None
    return loads_model(raw, str(path))
