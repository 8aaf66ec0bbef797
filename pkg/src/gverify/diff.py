"""Structural diff of two factored trees (e.g. across KB revisions)."""

from __future__ import annotations

from dataclasses import dataclass

from .factorize import OTHER, Branch, FactoredNode, FactoredTree, _untag
from .dss import label_text

_MIRROR = {"branch-added": "branch-removed", "branch-removed": "branch-added"}


class AttributeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class DiffEntry:
    kind: str  # split | hoisted | relabel | branch-added | branch-removed
    path: tuple[str, ...]
    before: str
    after: str

    def mirrored(self) -> "DiffEntry":
        return DiffEntry(_MIRROR.get(self.kind, self.kind), self.path, self.after, self.before)

    def __str__(self) -> str:
        where = " / ".join(self.path) or "root"
        return f"{self.kind} at {where}: {self.before or '-'} -> {self.after or '-'}"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "path": list(self.path), "before": self.before, "after": self.after}


@dataclass(frozen=True)
class TreeDiff:
    entries: tuple[DiffEntry, ...]

    def __bool__(self) -> bool:
        return bool(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def _node_text(node: FactoredNode) -> str:
    return f"leaf {label_text(_untag(node.residual))}" if node.is_leaf else f"split on {node.split}"


def _step(split: str, b: Branch) -> str:
    if b.other:
        return f"{split}={OTHER}{{{','.join(b.values)}}}"
    return f"{split}={b.values[0]}"


def _walk(a: FactoredNode, b: FactoredNode, path: tuple[str, ...], out: list[DiffEntry]) -> None:
    if a.is_leaf != b.is_leaf or a.split != b.split:
        out.append(DiffEntry("split", path, _node_text(a), _node_text(b)))
        return
    if a.is_leaf:
        if a.residual != b.residual:
            out.append(DiffEntry("relabel", path, label_text(_untag(a.residual)),
                                 label_text(_untag(b.residual))))
        return
    if a.hoisted != b.hoisted:
        out.append(DiffEntry("hoisted", path, label_text(_untag(a.hoisted)),
                             label_text(_untag(b.hoisted))))
    kb_ = {frozenset(x.values): x for x in b.branches}
    ka = {frozenset(x.values): x for x in a.branches}
    for key, x in ka.items():
        step = _step(a.split, x)
        if key in kb_:
            _walk(x.node, kb_[key].node, path + (step,), out)
        else:
            out.append(DiffEntry("branch-removed", path + (step,), _node_text(x.node), ""))
    for key, y in kb_.items():
        if key not in ka:
            out.append(DiffEntry("branch-added", path + (_step(b.split, y),), "", _node_text(y.node)))


def diff(a: FactoredTree, b: FactoredTree) -> TreeDiff:
    """Paired structural changes from ``a`` to ``b``; empty iff identical.

    ``diff(b, a)`` holds the mirrored entries of ``diff(a, b)``.
    """
    if [n for n, _ in a.attributes] != [n for n, _ in b.attributes]:
        raise AttributeMismatch("trees are built over different attributes")
    out: list[DiffEntry] = []
    _walk(a.root, b.root, (), out)
    return TreeDiff(tuple(out))
