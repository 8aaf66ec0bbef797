"""Semantics-preserving compression of a learned tree for expert review.

Two rewrites are applied until neither changes anything:

* hoisting: an element (on a given intention line) carried by every child
  of a node moves into that node;
* grouping: the largest set of branch values whose subtrees are identical
  becomes a single ``<other>`` branch that records its member values.

A node whose branches all end up in one group carries no information and
is replaced by its child, keeping its hoisted elements.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, NamedTuple

from .c45 import DecisionTree, Leaf, Split, TreeNode, UnseenValue
from .dss import RecommendationSet, decode_label, label_text
from .model import DoseModifier, KnowledgeBase, RecommendationElement

OTHER = "<other>"


class LineElement(NamedTuple):
    line: int  # 1 = first line, 2 = second line
    element: RecommendationElement

    def sort_key(self):
        return (self.line,) + self.element.sort_key()


Elements = frozenset  # of LineElement


@dataclass(frozen=True)
class Branch:
    values: tuple[str, ...]
    node: "FactoredNode"
    other: bool = False

    @property
    def key(self) -> str:
        return OTHER if self.other else self.values[0]


@dataclass(frozen=True)
class FactoredNode:
    """Internal node when ``split`` is set, leaf otherwise.

    Leaves keep everything in ``residual``; their ``hoisted`` is empty.
    ``support`` (training rows reaching the node) is ignored by equality so
    that identical subtrees compare equal.
    """

    hoisted: Elements = frozenset()
    split: str | None = None
    branches: tuple[Branch, ...] = ()
    residual: Elements = frozenset()
    support: int = field(default=0, compare=False)

    @property
    def is_leaf(self) -> bool:
        return self.split is None

    @property
    def carried(self) -> Elements:
        return self.residual if self.is_leaf else self.hoisted


@dataclass(frozen=True)
class FactoredTree:
    root: FactoredNode
    attributes: tuple[tuple[str, tuple[str, ...]], ...]
    source_node_count: int | None = None

    @property
    def node_count(self) -> int:
        return node_count(self.root)

    def domain(self, attribute: str) -> tuple[str, ...]:
        for name, dom in self.attributes:
            if name == attribute:
                return dom
        raise KeyError(attribute)

    def to_dict(self) -> dict:
        return {
            "attributes": [{"name": a, "values": list(d)} for a, d in self.attributes],
            "source_node_count": self.source_node_count,
            "node_count": self.node_count,
            "root": node_to_dict(self.root),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "FactoredTree":
        attrs = tuple((a["name"], tuple(a["values"])) for a in data["attributes"])
        return cls(node_from_dict(data["root"]), attrs, data.get("source_node_count"))

    @classmethod
    def from_json(cls, text: str) -> "FactoredTree":
        return cls.from_dict(json.loads(text))


def node_count(node: FactoredNode) -> int:
    """Internal plus leaf nodes; an ``<other>`` subtree counts once."""
    return 1 + sum(node_count(b.node) for b in node.branches)


# -- conversion ------------------------------------------------------------

def _tag(rs: RecommendationSet) -> Elements:
    return frozenset([LineElement(1, e) for e in rs.first_line]
                     + [LineElement(2, e) for e in rs.second_line])


def _untag(elems: Iterable[LineElement]) -> RecommendationSet:
    first, second = set(), set()
    for le in elems:
        (first if le.line == 1 else second).add(le.element)
    return RecommendationSet(frozenset(first), frozenset(second))


def lift(tree: DecisionTree, kb: KnowledgeBase | None = None) -> FactoredTree:
    """One-to-one copy of a decision tree with decoded leaf labels."""
    def go(node: TreeNode) -> FactoredNode:
        if isinstance(node, Leaf):
            return FactoredNode(residual=_tag(decode_label(node.label, kb)), support=node.support)
        kids = tuple(Branch((v,), go(c)) for v, c in node.branches.items())
        return FactoredNode(split=node.attribute, branches=kids,
                            support=sum(b.node.support for b in kids))

    return FactoredTree(go(tree.root), tuple(tree.attributes), tree.node_count)


# -- rule 1: hoisting ------------------------------------------------------

def _strip(node: FactoredNode, elems: Elements) -> FactoredNode:
    if node.is_leaf:
        return replace(node, residual=node.residual - elems)
    return replace(node, hoisted=node.hoisted - elems)


def _hoist(node: FactoredNode) -> FactoredNode:
    if node.is_leaf:
        return node
    kids = [replace(b, node=_hoist(b.node)) for b in node.branches]
    common = frozenset.intersection(*(b.node.carried for b in kids))
    if common:
        kids = [replace(b, node=_strip(b.node, common)) for b in kids]
    return replace(node, hoisted=node.hoisted | common, branches=tuple(kids))


def hoist_common(tree: FactoredTree) -> FactoredTree:
    """Lift elements shared by all children of a node into the node,
    bottom-up, so sharing propagates as far up as it goes."""
    return replace(tree, root=_hoist(tree.root))


# -- rule 2: grouping as <other> -------------------------------------------

def _add_support(a: FactoredNode, b: FactoredNode) -> FactoredNode:
    kids = tuple(replace(x, node=_add_support(x.node, y.node)) for x, y in zip(a.branches, b.branches))
    return replace(a, branches=kids, support=a.support + b.support)


def _absorb(parent_hoisted: Elements, child: FactoredNode) -> FactoredNode:
    if child.is_leaf:
        return replace(child, residual=child.residual | parent_hoisted)
    return replace(child, hoisted=child.hoisted | parent_hoisted)


def _merge(node: FactoredNode, order: Mapping[str, Mapping[str, int]]) -> FactoredNode:
    if node.is_leaf:
        return node
    kids = [replace(b, node=_merge(b.node, order)) for b in node.branches]
    rank = order.get(node.split, {})

    groups: dict[FactoredNode, list[Branch]] = {}
    for b in kids:
        groups.setdefault(b.node, []).append(b)

    def size(members):
        return sum(len(b.values) for b in members)

    def earliest(members):
        return min(rank.get(v, len(rank)) for b in members for v in b.values)

    existing = [b for b in kids if b.other]
    if existing:
        # one <other> per node: later passes may only grow it
        candidates = [m for m in groups.values() if existing[0] in m and len(m) >= 2]
    else:
        candidates = [m for m in groups.values() if len(m) >= 2]
    if candidates:
        best = max(candidates, key=lambda m: (size(m), -earliest(m)))
        values = tuple(sorted((v for b in best for v in b.values), key=lambda v: rank.get(v, len(rank))))
        merged = best[0].node
        for b in best[1:]:
            merged = _add_support(merged, b.node)
        keep = [b for b in kids if not any(b is m for m in best)]
        kids = keep + [Branch(values, merged, other=True)]

    if len(kids) == 1:
        return _absorb(node.hoisted, kids[0].node)
    return replace(node, branches=tuple(kids))


def merge_values(tree: FactoredTree) -> FactoredTree:
    """At each node, group the largest set of values with identical subtrees
    into one ``<other>`` branch (ties go to the group holding the earliest
    value in domain order)."""
    order = {name: {v: i for i, v in enumerate(dom)} for name, dom in tree.attributes}
    return replace(tree, root=_merge(tree.root, order))


def factorize(tree: DecisionTree, kb: KnowledgeBase | None = None) -> FactoredTree:
    """Lift, then alternate hoisting and grouping until a joint fixpoint."""
    current = lift(tree, kb)
    while True:
        nxt = merge_values(hoist_common(current))
        if nxt == current:
            return nxt
        current = nxt


def refactorize(tree: FactoredTree) -> FactoredTree:
    current = tree
    while True:
        nxt = merge_values(hoist_common(current))
        if nxt == current:
            return nxt
        current = nxt


# -- evaluation ------------------------------------------------------------

def evaluate_factored(tree: FactoredTree, values: Mapping[str, str]) -> RecommendationSet:
    node, acc, path = tree.root, set(), ()
    while True:
        acc |= node.hoisted
        if node.is_leaf:
            acc |= node.residual
            return _untag(acc)
        value = values[node.split]
        chosen = None
        for b in node.branches:
            if value in b.values:
                chosen = b
                break
        if chosen is None:
            raise UnseenValue(node.split, value, path)
        path += ((node.split, value),)
        node = chosen.node


def leaf_label(node: FactoredNode) -> str:
    """Label text of a leaf's residual sets."""
    return label_text(_untag(node.residual))


# -- JSON ------------------------------------------------------------------

def _elems_to_dict(elems: Elements) -> dict:
    rs = _untag(elems)
    return {"1": [str(e) for e in sorted(rs.first_line, key=RecommendationElement.sort_key)],
            "2": [str(e) for e in sorted(rs.second_line, key=RecommendationElement.sort_key)]}


def _elems_from_dict(data: dict) -> Elements:
    out = []
    for line in ("1", "2"):
        for text in data.get(line, []):
            if text.endswith(("^+", "^-")):
                name, dose = text[:-2], DoseModifier.from_suffix(text[-2:])
            else:
                name, dose = text, DoseModifier.NONE
            out.append(LineElement(int(line), RecommendationElement(name, dose)))
    return frozenset(out)


def node_to_dict(node: FactoredNode) -> dict:
    if node.is_leaf:
        return {"hoisted": _elems_to_dict(frozenset()), "residual": _elems_to_dict(node.residual),
                "label": leaf_label(node), "support": node.support}
    branches = {}
    other = []
    for b in node.branches:
        branches[b.key] = node_to_dict(b.node)
        if b.other:
            other = list(b.values)
    out = {"hoisted": _elems_to_dict(node.hoisted), "split": node.split, "branches": branches}
    if other:
        out["other"] = other
    out["support"] = node.support
    return out


def node_from_dict(data: dict) -> FactoredNode:
    hoisted = _elems_from_dict(data.get("hoisted", {}))
    if "split" not in data:
        return FactoredNode(hoisted=frozenset(), residual=_elems_from_dict(data["residual"]) | hoisted,
                            support=data.get("support", 0))
    kids = []
    for key, child in data["branches"].items():
        if key == OTHER:
            kids.append(Branch(tuple(data["other"]), node_from_dict(child), other=True))
        else:
            kids.append(Branch((key,), node_from_dict(child)))
    return FactoredNode(hoisted=hoisted, split=data["split"], branches=tuple(kids),
                        support=data.get("support", 0))
