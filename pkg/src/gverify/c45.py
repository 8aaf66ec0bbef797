"""Unpruned C4.5 induction over categorical attributes.

Splits maximise the gain ratio among attributes with positive information
gain; leaves are pure, so the tree reproduces its training set exactly.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .model import NA, InputVector, KnowledgeBase

#: Gains at or below this are treated as zero (float round-off).
GAIN_EPS = 1e-12


class NonFunctionalDataset(ValueError):
    def __init__(self, values: tuple, label_a: str, label_b: str):
        self.values = values
        self.labels = (label_a, label_b)
        super().__init__(f"identical attribute values {values} carry labels {label_a!r} and {label_b!r}")


class UnseenValue(KeyError):
    def __init__(self, attribute: str, value: str, path: tuple = ()):
        self.attribute = attribute
        self.value = value
        self.path = path
        super().__init__(f"no branch for {attribute} = {value!r} at {_path_text(path)}")

    def __str__(self) -> str:
        return self.args[0]


def _path_text(path) -> str:
    return " / ".join(f"{a}={v}" for a, v in path) or "root"


@dataclass
class Dataset:
    attributes: list[tuple[str, tuple[str, ...]]]
    rows: list[tuple[tuple[str, ...], str]]

    @property
    def names(self) -> list[str]:
        return [a for a, _ in self.attributes]

    def __len__(self) -> int:
        return len(self.rows)

    def encode(self) -> tuple[np.ndarray, np.ndarray, list[str]]:
        """Integer matrix of attribute value indices, label codes, label list."""
        labels = sorted({lab for _, lab in self.rows})
        lcode = {lab: i for i, lab in enumerate(labels)}
        index = [{v: i for i, v in enumerate(dom)} for _, dom in self.attributes]
        X = np.empty((len(self.rows), len(self.attributes)), dtype=np.int32)
        y = np.empty(len(self.rows), dtype=np.int32)
        for r, (values, lab) in enumerate(self.rows):
            for j, v in enumerate(values):
                X[r, j] = index[j][v]
            y[r] = lcode[lab]
        return X, y, labels

    def check_functional(self) -> None:
        seen: dict[tuple, str] = {}
        for values, lab in self.rows:
            prev = seen.setdefault(values, lab)
            if prev != lab:
                raise NonFunctionalDataset(values, prev, lab)


def dataset_from_kb(kb: KnowledgeBase, rows: Iterable[tuple[InputVector, str]]) -> Dataset:
    """Dataset over every KB variable; guarded variables gain an NA value."""
    attrs = [(v.name, v.domain + ((NA,) if v.applicability else ())) for v in kb.variables]
    return Dataset(attrs, [(vec.values, lab) for vec, lab in rows])


# -- split criteria --------------------------------------------------------

def entropy(class_distribution: Mapping[str, int] | Sequence[int]) -> float:
    """Shannon entropy in bits of a class-count distribution."""
    counts = list(class_distribution.values()) if isinstance(class_distribution, Mapping) \
        else list(class_distribution)
    arr = np.asarray(counts, dtype=float)
    total = arr.sum()
    if arr.size == 0 or total <= 0:
        raise ValueError("entropy of an empty distribution")
    return _entropy(arr)


def _entropy(counts: np.ndarray) -> float:
    total = counts.sum()
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


@dataclass(frozen=True)
class SplitStats:
    info_gain: float
    split_info: float
    gain_ratio: float


def _contingency(values: np.ndarray, labels: np.ndarray, n_values: int, n_labels: int) -> np.ndarray:
    flat = values.astype(np.int64) * n_labels + labels
    return np.bincount(flat, minlength=n_values * n_labels).reshape(n_values, n_labels)


def _stats_from_table(table: np.ndarray) -> SplitStats:
    sizes = table.sum(axis=1)
    present = sizes > 0
    total = sizes.sum()
    if present.sum() < 2:
        return SplitStats(0.0, 0.0, 0.0)
    before = _entropy(table.sum(axis=0))
    after = sum(s / total * _entropy(row) for s, row in zip(sizes[present], table[present]))
    gain = before - after
    split = _entropy(sizes[present])
    return SplitStats(gain, split, gain / split)


def split_stats(ds: Dataset, attribute: str) -> SplitStats:
    try:
        j = ds.names.index(attribute)
    except ValueError:
        raise KeyError(f"unknown attribute {attribute!r}") from None
    if not ds.rows:
        raise ValueError("empty dataset")
    X, y, labels = ds.encode()
    table = _contingency(X[:, j], y, len(ds.attributes[j][1]), len(labels))
    return _stats_from_table(table)


def info_gain(ds: Dataset, attribute: str) -> float:
    return split_stats(ds, attribute).info_gain


def split_info(ds: Dataset, attribute: str) -> float:
    return split_stats(ds, attribute).split_info


def gain_ratio(ds: Dataset, attribute: str) -> float:
    """Information gain over split information; 0 for a constant attribute."""
    return split_stats(ds, attribute).gain_ratio


# -- trees -----------------------------------------------------------------

@dataclass
class Leaf:
    label: str
    support: int


@dataclass
class Split:
    attribute: str
    branches: dict[str, "TreeNode"]


TreeNode = Union[Leaf, Split]


@dataclass
class DecisionTree:
    root: TreeNode
    attributes: list[tuple[str, tuple[str, ...]]]
    n_rows: int

    @property
    def node_count(self) -> int:
        return node_count(self.root)

    def to_dict(self) -> dict:
        return {
            "attributes": [{"name": a, "values": list(dom)} for a, dom in self.attributes],
            "rows": self.n_rows,
            "root": node_to_dict(self.root),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "DecisionTree":
        attrs = [(a["name"], tuple(a["values"])) for a in data["attributes"]]
        return cls(node_from_dict(data["root"]), attrs, data["rows"])

    @classmethod
    def from_json(cls, text: str) -> "DecisionTree":
        return cls.from_dict(json.loads(text))


def node_count(node: TreeNode) -> int:
    if isinstance(node, Leaf):
        return 1
    return 1 + sum(node_count(c) for c in node.branches.values())


def node_to_dict(node: TreeNode) -> dict:
    if isinstance(node, Leaf):
        return {"label": node.label, "support": node.support}
    return {"split": node.attribute,
            "branches": {v: node_to_dict(c) for v, c in node.branches.items()}}


def node_from_dict(data: dict) -> TreeNode:
    if "label" in data:
        return Leaf(data["label"], data["support"])
    return Split(data["split"], {v: node_from_dict(c) for v, c in data["branches"].items()})


def _choose(X: np.ndarray, y: np.ndarray, sizes: list[int], n_labels: int,
            candidates: list[int]) -> int | None:
    best, best_gr = None, -1.0
    fallback, fallback_gr = None, -1.0
    for j in candidates:
        st = _stats_from_table(_contingency(X[:, j], y, sizes[j], n_labels))
        if st.split_info == 0.0:
            continue
        if st.info_gain > GAIN_EPS and st.gain_ratio > best_gr + GAIN_EPS:
            best, best_gr = j, st.gain_ratio
        if st.gain_ratio > fallback_gr + GAIN_EPS:
            fallback, fallback_gr = j, st.gain_ratio
    # No attribute gains on its own (XOR-like labelling): split anyway so
    # that the zero-error guarantee holds.
    return best if best is not None else fallback


def build_tree(ds: Dataset) -> DecisionTree:
    """Grow the tree until every leaf is pure. No pruning."""
    if not ds.rows:
        raise ValueError("cannot learn from an empty dataset")
    ds.check_functional()
    X, y, labels = ds.encode()
    sizes = [len(dom) for _, dom in ds.attributes]
    names = ds.names
    domains = [dom for _, dom in ds.attributes]

    def grow(idx: np.ndarray, available: list[int]) -> TreeNode:
        ys = y[idx]
        if (ys == ys[0]).all():
            return Leaf(labels[ys[0]], int(idx.size))
        Xs = X[idx]
        j = _choose(Xs, ys, sizes, len(labels), available)
        if j is None:  # unreachable for functional data
            raise NonFunctionalDataset(tuple(domains[k][Xs[0, k]] for k in range(len(names))),
                                       labels[ys[0]], labels[ys[-1]])
        rest = [k for k in available if k != j]
        branches = {}
        for code in np.unique(Xs[:, j]):
            branches[domains[j][code]] = grow(idx[Xs[:, j] == code], rest)
        return Split(names[j], branches)

    root = grow(np.arange(len(ds.rows)), list(range(len(names))))
    return DecisionTree(root, list(ds.attributes), len(ds.rows))


def classify(tree: DecisionTree, values: Mapping[str, str]) -> str:
    node, path = tree.root, ()
    while isinstance(node, Split):
        value = values[node.attribute]
        if value not in node.branches:
            raise UnseenValue(node.attribute, value, path)
        path += ((node.attribute, value),)
        node = node.branches[value]
    return node.label


def training_errors(tree: DecisionTree, ds: Dataset) -> int:
    names = ds.names
    return sum(classify(tree, dict(zip(names, values))) != lab for values, lab in ds.rows)
