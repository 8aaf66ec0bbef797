"""Text, DOT and JSON renderings of a factored tree for expert review."""

from __future__ import annotations

from .factorize import OTHER, FactoredNode, FactoredTree, _untag, leaf_label
from .model import RecommendationElement

FORMATS = ("text", "dot", "json")


def _line(elems) -> str:
    items = sorted(elems, key=RecommendationElement.sort_key)
    return ", ".join(str(e) for e in items) or "-"


def _sets(elems) -> str:
    rs = _untag(elems)
    return f"first: {_line(rs.first_line)} | second: {_line(rs.second_line)}"


def _describe(node: FactoredNode) -> str:
    if node.is_leaf:
        return f"{_sets(node.residual)}  (n={node.support})"
    text = f"{node.split}?"
    if node.hoisted:
        text += f"  [{_sets(node.hoisted)}]"
    return text


def render_text(tree: FactoredTree) -> str:
    """One line per node, children indented under their parent.

    ``<other>`` groups are numbered and spelled out in a legend.
    """
    lines: list[str] = []
    legend: list[str] = []

    def walk(node: FactoredNode, depth: int) -> None:
        for b in node.branches:
            if b.other:
                tag = f"<other#{len(legend) + 1}>"
                legend.append(f"  {tag}: {node.split} in {{{', '.join(b.values)}}}")
            else:
                tag = b.values[0]
            lines.append(f"{'  ' * depth}{tag} -> {_describe(b.node)}")
            walk(b.node, depth + 1)

    lines.append(_describe(tree.root))
    walk(tree.root, 1)
    if legend:
        lines += ["", "legend:"] + legend
    return "\n".join(lines) + "\n"


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _dot_label(*lines: str) -> str:
    return "\\n".join(_dot_escape(x) for x in lines)


def render_dot(tree: FactoredTree) -> str:
    out = ["digraph factored_tree {", '  node [shape=box, fontname="Helvetica"];']
    edges: list[str] = []
    counter = [0]

    def walk(node: FactoredNode) -> str:
        nid = f"n{counter[0]}"
        counter[0] += 1
        if node.is_leaf:
            rs = _untag(node.residual)
            label = _dot_label(f"first: {_line(rs.first_line)}", f"second: {_line(rs.second_line)}",
                               f"n={node.support}")
            out.append(f'  {nid} [label="{label}", shape=ellipse, '
                       f'comment="{_dot_escape(leaf_label(node))}"];')
            return nid
        lines = [node.split]
        if node.hoisted:
            rs = _untag(node.hoisted)
            lines += [f"+first: {_line(rs.first_line)}", f"+second: {_line(rs.second_line)}"]
        out.append(f'  {nid} [label="{_dot_label(*lines)}"];')
        for b in node.branches:
            child = walk(b.node)
            text = f"{OTHER}: {', '.join(b.values)}" if b.other else b.values[0]
            edges.append(f'  {nid} -> {child} [label="{_dot_escape(text)}"];')
        return nid

    walk(tree.root)
    return "\n".join(out + edges + ["}"]) + "\n"


def render_json(tree: FactoredTree) -> str:
    return tree.to_json()


def render(tree: FactoredTree, format: str = "text") -> str:
    if format == "text":
        return render_text(tree)
    if format == "dot":
        return render_dot(tree)
    if format == "json":
        return render_json(tree)
    raise ValueError(f"unknown format {format!r}; expected one of {', '.join(FORMATS)}")
