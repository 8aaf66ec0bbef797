"""Rule-based critiquing engine: the system under test.

Downstream modules only ever call :func:`recommend`, :func:`critique` and
:func:`label`; they treat the engine as an opaque labeling oracle.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Mapping

from .model import (
    CURRENT,
    LOW_EFFICIENCY,
    POOR_TOLERANCE,
    PROBLEM,
    PROPOSED,
    DoseModifier,
    KnowledgeBase,
    RecommendationElement,
    TherapyRule,
    guard_matches,
)

#: A class label: canonical text of a recommendation set.
ClassLabel = str


class DSSError(Exception):
    pass


class NoMatchingRule(DSSError):
    def __init__(self, vector: Mapping[str, str]):
        self.vector = dict(vector.items()) if hasattr(vector, "items") else vector.as_dict()
        super().__init__(f"no rule matches {self.vector}")

    def __reduce__(self):
        return (type(self), (self.vector,))


class AmbiguousRules(DSSError):
    def __init__(self, vector: Mapping[str, str], rules: list[str]):
        self.vector = dict(vector.items()) if hasattr(vector, "items") else vector.as_dict()
        self.rules = rules
        super().__init__(f"rules {', '.join(rules)} all match {self.vector}")

    def __reduce__(self):
        return (type(self), (self.vector, self.rules))


class Verdict(enum.Enum):
    CONFORM = "conform"
    NOT_OPTIMAL = "not_optimal"
    NON_CONFORM = "non_conform"

    @property
    def rank(self) -> int:
        # conform > not_optimal > non_conform
        return {"conform": 2, "not_optimal": 1, "non_conform": 0}[self.value]

    def __lt__(self, other: "Verdict") -> bool:
        return self.rank < other.rank


@dataclass(frozen=True)
class ProposedAction:
    treatment: str  # canonical name
    dose: DoseModifier

    def as_element(self) -> RecommendationElement:
        return RecommendationElement(self.treatment, self.dose)


@dataclass(frozen=True)
class RecommendationSet:
    first_line: frozenset[RecommendationElement]
    second_line: frozenset[RecommendationElement]

    def line(self, n: int) -> frozenset[RecommendationElement]:
        return self.first_line if n == 1 else self.second_line

    def __str__(self) -> str:
        return label_text(self)


def _items(v):
    return v.as_dict() if hasattr(v, "as_dict") else v


def match_rule(kb: KnowledgeBase, v: Mapping[str, str]) -> TherapyRule:
    """The single rule whose guard matches the clinical part of ``v``."""
    hits = [r for r in kb.rules if guard_matches(r.guard, v)]
    if not hits:
        raise NoMatchingRule(_items(v))
    if len(hits) > 1:
        raise AmbiguousRules(_items(v), [r.name for r in hits])
    return hits[0]


def _resolve(elements, current: str | None) -> frozenset[RecommendationElement]:
    # dose-annotated elements only make sense for the patient's current treatment
    return frozenset(e for e in elements
                     if e.dose is DoseModifier.NONE or e.treatment == current)


def recommend(kb: KnowledgeBase, v: Mapping[str, str]) -> RecommendationSet:
    rule = match_rule(kb, v)
    current = _current_canonical(kb, v)
    return RecommendationSet(_resolve(rule.first_line, current),
                             _resolve(rule.second_line, current))


def _current_canonical(kb: KnowledgeBase, v: Mapping[str, str]) -> str | None:
    if CURRENT not in v:
        return None
    try:
        return kb.catalog.by_name(v[CURRENT]).canonical_name
    except KeyError:
        return None


def derive_action(kb: KnowledgeBase, v: Mapping[str, str]) -> ProposedAction:
    """Read the proposed treatment as a dose change when it equals the
    current one: increase on low efficiency, decrease on poor tolerance."""
    proposed = kb.catalog.by_name(v[PROPOSED]).canonical_name
    if v[PROPOSED] != v[CURRENT]:
        return ProposedAction(proposed, DoseModifier.NONE)
    problem = v[PROBLEM]
    if problem == LOW_EFFICIENCY:
        return ProposedAction(proposed, DoseModifier.INCREASE)
    if problem == POOR_TOLERANCE:
        return ProposedAction(proposed, DoseModifier.DECREASE)
    raise DSSError(f"unknown problem value {problem!r}")


def critique_from_set(kb: KnowledgeBase, rs: RecommendationSet,
                      v: Mapping[str, str]) -> Verdict:
    """Verdict from an already computed recommendation set."""
    action = derive_action(kb, v).as_element()
    if action in rs.first_line:
        return Verdict.CONFORM
    if action in rs.second_line:
        return Verdict.NOT_OPTIMAL
    return Verdict.NON_CONFORM


def critique(kb: KnowledgeBase, v: Mapping[str, str]) -> Verdict:
    """conform if the proposed action is first-line, not_optimal if
    second-line, non_conform otherwise. First line wins on overlap."""
    return critique_from_set(kb, recommend(kb, v), v)


def _element_text(e: RecommendationElement) -> str:
    return e.treatment + e.dose.suffix


def label_text(rs: RecommendationSet) -> ClassLabel:
    def line(elems):
        return ",".join(_element_text(e) for e in sorted(elems, key=RecommendationElement.sort_key))
    return f"1:[{line(rs.first_line)}];2:[{line(rs.second_line)}]"


def label(kb: KnowledgeBase, v: Mapping[str, str]) -> ClassLabel:
    """Canonical ``1:[...];2:[...]`` text of the recommendation set."""
    return label_text(recommend(kb, v))


_LABEL = re.compile(r"1:\[(.*)\];2:\[(.*)\]\Z")
_ELEM = re.compile(r"(.+?)(\^[+-])?\Z")


class LabelDecodeError(DSSError):
    pass


def decode_label(text: ClassLabel, kb: KnowledgeBase | None = None) -> RecommendationSet:
    """Inverse of :func:`label_text`. With a KB, names are checked against
    its catalog."""
    m = _LABEL.match(text)
    if m is None:
        raise LabelDecodeError(f"malformed label {text!r}")
    known = {t.canonical_name for t in kb.catalog} if kb is not None else None
    lines = []
    for part in m.groups():
        elems = set()
        for item in part.split(",") if part else ():
            em = _ELEM.match(item)
            name, suffix = em.group(1), em.group(2) or ""
            if known is not None and name not in known:
                raise LabelDecodeError(f"label {text!r} names unknown treatment {name!r}")
            elems.add(RecommendationElement(name, DoseModifier.from_suffix(suffix)))
        lines.append(frozenset(elems))
    rs = RecommendationSet(*lines)
    if label_text(rs) != text:
        raise LabelDecodeError(f"label {text!r} is not in canonical form")
    return rs
