"""Knowledge-base data model.

Everything here is immutable after construction so a parsed knowledge base
can be shared freely between labelers, learners and verifiers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

#: Placeholder for a variable whose applicability guard is not satisfied.
NA = "NA"

# Variable names with a fixed meaning for the critiquing engine and the
# vector generator. KBs that do not declare them simply skip the checks
# attached to them.
CURRENT = "current"
CURRENT_TYPE = "current_type"
PROPOSED = "proposed"
PROBLEM = "problem"
INTOLERANT_DRUG = "intolerant_drug"

LOW_EFFICIENCY = "low_efficiency"
POOR_TOLERANCE = "poor_tolerance"

#: Component that is part of a treatment but is not a drug.
DIET = "diet"

#: Insulin component -> current-treatment type it implies.
INSULIN_TYPES = {
    "insulin_vsa": "single_insulin",
    "insulin_da": "fractioned_insulin",
}
DRUG_COUNT_TYPES = {1: "monotherapy", 2: "bitherapy", 3: "tritherapy"}

MAX_DRUGS = 3


class DoseModifier(enum.Enum):
    NONE = "none"
    INCREASE = "increase"
    DECREASE = "decrease"

    @property
    def suffix(self) -> str:
        return {"none": "", "increase": "^+", "decrease": "^-"}[self.value]

    @property
    def rank(self) -> int:
        return ("none", "increase", "decrease").index(self.value)

    @classmethod
    def from_suffix(cls, suffix: str) -> "DoseModifier":
        for member in cls:
            if member.suffix == suffix:
                return member
        raise ValueError(f"unknown dose suffix {suffix!r}")


@dataclass(frozen=True)
class VariableDef:
    name: str
    domain: tuple[str, ...]
    # (variable, value): the variable only exists when that variable has that value
    applicability: tuple[str, str] | None = None


@dataclass(frozen=True)
class Treatment:
    name: str
    components: tuple[str, ...]
    canonical_name: str

    @property
    def is_no_treatment(self) -> bool:
        return not self.components

    @property
    def drugs(self) -> tuple[str, ...]:
        return tuple(c for c in self.components if c != DIET)


def canonical_name(components: Sequence[str], component_order: Sequence[str]) -> str:
    """Components sorted by declaration order and joined with ``+``."""
    if not components:
        return "no treatment"
    rank = {c: i for i, c in enumerate(component_order)}
    return "+".join(sorted(components, key=lambda c: rank.get(c, len(rank))))


def treatment_type(treatment: Treatment) -> str:
    """Value of ``current_type`` that is consistent with a treatment.

    no components -> none, diet alone -> diet_only, any insulin -> the
    insulin scheme, otherwise the number of drugs (mono/bi/tritherapy).
    """
    if treatment.is_no_treatment:
        return "none"
    for insulin, kind in INSULIN_TYPES.items():
        if insulin in treatment.components:
            return kind
    drugs = treatment.drugs
    if not drugs:
        return "diet_only"
    return DRUG_COUNT_TYPES.get(len(drugs), f"{len(drugs)}-drug")


@dataclass(frozen=True)
class TreatmentCatalog:
    entries: tuple[Treatment, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Treatment]:
        return iter(self.entries)

    def by_name(self, name: str) -> Treatment:
        for t in self.entries:
            if t.name == name:
                return t
        raise KeyError(name)

    def by_canonical(self, canonical: str) -> Treatment:
        for t in self.entries:
            if t.canonical_name == canonical:
                return t
        raise KeyError(canonical)

    def names(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.entries)


@dataclass(frozen=True)
class Test:
    """One conjunct: ``variable = v``, ``variable != v`` or ``variable in {...}``."""

    variable: str
    op: str
    values: tuple[str, ...]

    __test__ = False  # not a pytest class

    def matches(self, value: str) -> bool:
        if self.op == "=":
            return value == self.values[0]
        if self.op == "!=":
            return value != self.values[0]
        return value in self.values


def guard_matches(guard: Sequence[Test], values: Mapping[str, str]) -> bool:
    return all(t.matches(values[t.variable]) for t in guard)


@dataclass(frozen=True)
class ConstraintRule:
    name: str
    conjuncts: tuple[Test, ...]


@dataclass(frozen=True, order=False)
class RecommendationElement:
    """A recommended treatment, compared by (canonical name, dose modifier)."""

    treatment: str  # canonical name
    dose: DoseModifier = DoseModifier.NONE

    def sort_key(self) -> tuple[str, int]:
        return (self.treatment, self.dose.rank)

    def __str__(self) -> str:
        return self.treatment + self.dose.suffix


@dataclass(frozen=True)
class TherapyRule:
    name: str
    guard: tuple[Test, ...]
    first_line: tuple[RecommendationElement, ...]
    second_line: tuple[RecommendationElement, ...]


@dataclass(frozen=True)
class KnowledgeBase:
    version: str
    variables: tuple[VariableDef, ...]
    components: tuple[str, ...]
    catalog: TreatmentCatalog
    constraints: tuple[ConstraintRule, ...] = ()
    rules: tuple[TherapyRule, ...] = ()

    def variable(self, name: str) -> VariableDef:
        for v in self.variables:
            if v.name == name:
                return v
        raise KeyError(name)

    def has_variable(self, name: str) -> bool:
        return any(v.name == name for v in self.variables)

    @property
    def variable_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def rule(self, name: str) -> TherapyRule:
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)


@dataclass(frozen=True)
class InputVector:
    """One assignment of every KB variable (inapplicable ones hold ``NA``)."""

    names: tuple[str, ...] = field(repr=False)
    values: tuple[str, ...]

    def __getitem__(self, name: str) -> str:
        try:
            return self.values[self.names.index(name)]
        except ValueError:
            raise KeyError(name) from None

    def __contains__(self, name: object) -> bool:
        return name in self.names

    def keys(self) -> tuple[str, ...]:
        return self.names

    def get(self, name: str, default: str | None = None) -> str | None:
        return self[name] if name in self.names else default

    def as_dict(self) -> dict[str, str]:
        return dict(zip(self.names, self.values))

    def replace(self, **changes: str) -> "InputVector":
        values = list(self.values)
        for name, value in changes.items():
            values[self.names.index(name)] = value
        return InputVector(self.names, tuple(values))

    @classmethod
    def from_mapping(cls, kb: KnowledgeBase, values: Mapping[str, str]) -> "InputVector":
        names = kb.variable_names
        return cls(names, tuple(values.get(n, NA) for n in names))
