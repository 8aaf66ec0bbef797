"""Exhaustive, constraint-filtered enumeration of DSS input vectors."""

from __future__ import annotations

import io
import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Iterator, Sequence

from .model import (
    CURRENT,
    CURRENT_TYPE,
    INTOLERANT_DRUG,
    NA,
    PROPOSED,
    InputVector,
    KnowledgeBase,
    treatment_type,
)


@dataclass(frozen=True)
class EnumerationPlan:
    """Variable order, applicability guards and constraints for one KB."""

    order: tuple[str, ...]
    guards: dict
    constraints: tuple

    @classmethod
    def for_kb(cls, kb: KnowledgeBase) -> "EnumerationPlan":
        return cls(
            order=kb.variable_names,
            guards={v.name: v.applicability for v in kb.variables if v.applicability},
            constraints=kb.constraints,
        )


def _structural_checks(kb: KnowledgeBase) -> dict[int, list[Callable[[list[str]], bool]]]:
    """Checks keyed by the position at which all their inputs are assigned."""
    names = kb.variable_names
    pos = {n: i for i, n in enumerate(names)}
    checks: dict[int, list] = {}

    def add(at: int, fn) -> None:
        checks.setdefault(at, []).append(fn)

    if CURRENT in pos:
        ci = pos[CURRENT]
        by_name = {t.name: t for t in kb.catalog}
        if CURRENT_TYPE in pos:
            ti = pos[CURRENT_TYPE]
            kinds = {name: treatment_type(t) for name, t in by_name.items()}
            add(max(ci, ti), lambda vals: kinds.get(vals[ci]) == vals[ti])
        if INTOLERANT_DRUG in pos:
            di = pos[INTOLERANT_DRUG]
            drugs = {name: set(t.components) for name, t in by_name.items()}
            add(max(ci, di), lambda vals: vals[di] == NA or vals[di] in drugs.get(vals[ci], ()))

    for rule in kb.constraints:
        idx = [(pos[t.variable], t) for t in rule.conjuncts]
        at = max(i for i, _ in idx)
        add(at, lambda vals, idx=idx: not all(t.matches(vals[i]) for i, t in idx))
    return checks


def _walk(kb: KnowledgeBase, filtered: bool) -> Iterator[tuple[str, ...]]:
    variables = kb.variables
    pos = {v.name: i for i, v in enumerate(variables)}
    guards = [(pos[v.applicability[0]], v.applicability[1]) if v.applicability else None
              for v in variables]
    checks = _structural_checks(kb) if filtered else {}
    n = len(variables)
    vals: list[str] = [NA] * n

    def rec(i: int) -> Iterator[tuple[str, ...]]:
        if i == n:
            yield tuple(vals)
            return
        g = guards[i]
        choices = variables[i].domain if g is None or vals[g[0]] == g[1] else (NA,)
        tests = checks.get(i, ())
        for value in choices:
            vals[i] = value
            if all(check(vals) for check in tests):
                yield from rec(i + 1)
        vals[i] = NA

    return rec(0)


class VectorStream:
    """Lazily enumerated realistic vectors of a KB, in mixed-radix order.

    Iterating twice re-enumerates; nothing is held in memory.
    """

    def __init__(self, kb: KnowledgeBase):
        self.kb = kb
        self.plan = EnumerationPlan.for_kb(kb)

    def __iter__(self) -> Iterator[InputVector]:
        names = self.kb.variable_names
        for values in _walk(self.kb, filtered=True):
            yield InputVector(names, values)

    @cached_property
    def total_raw(self) -> int:
        return count_conditional(self.kb)

    @cached_property
    def total_realistic(self) -> int:
        return sum(1 for _ in _walk(self.kb, filtered=True))


def enumerate_vectors(kb: KnowledgeBase) -> VectorStream:
    """Every combination of variable values that respects applicability
    guards, the structural vector invariants and the KB's exclusion rules."""
    return VectorStream(kb)


def raw_product(kb: KnowledgeBase) -> int:
    """Plain cartesian-product size, ignoring guards and constraints."""
    return math.prod(len(v.domain) for v in kb.variables)


def count_conditional(kb: KnowledgeBase) -> int:
    """Number of combinations once inapplicable variables are pinned to NA.

    Only variables referenced by a guard are expanded explicitly; the rest
    contribute their domain size as a factor.
    """
    referenced = {v.applicability[0] for v in kb.variables if v.applicability}
    ref_vars = [v for v in kb.variables if v.name in referenced]
    free = [v for v in kb.variables if v.name not in referenced]
    total = 0
    for combo in itertools.product(*(v.domain for v in ref_vars)):
        fixed = dict(zip((v.name for v in ref_vars), combo))
        factor = 1
        for v in free:
            g = v.applicability
            if g is None or fixed.get(g[0]) == g[1]:
                factor *= len(v.domain)
        total += factor
    return total


def count(kb: KnowledgeBase) -> tuple[int, int]:
    """``(raw, realistic)``: guard-conditioned count and post-filter count."""
    stream = VectorStream(kb)
    return stream.total_raw, stream.total_realistic


def mixed_radix_index(kb: KnowledgeBase, vector: InputVector) -> int:
    """Position of a vector in the guard-aware mixed-radix numbering.

    Each variable contributes a digit in base ``len(domain) + 1``; ``NA`` is
    digit 0 and the i-th domain value is digit i + 1.
    """
    index = 0
    for var, value in zip(kb.variables, vector.values):
        digit = 0 if value == NA else var.domain.index(value) + 1
        index = index * (len(var.domain) + 1) + digit
    return index


def is_realistic(kb: KnowledgeBase, vector: InputVector) -> bool:
    """Membership test equivalent to appearing in :func:`enumerate_vectors`."""
    names = kb.variable_names
    if vector.names != names:
        return False
    values = list(vector.values)
    for var, value in zip(kb.variables, values):
        g = var.applicability
        applicable = g is None or values[names.index(g[0])] == g[1]
        if applicable and value not in var.domain:
            return False
        if not applicable and value != NA:
            return False
    for checks in _structural_checks(kb).values():
        if not all(check(values) for check in checks):
            return False
    return True


# -- CSV export ----------------------------------------------------------

def csv_field(value: str) -> str:
    if any(ch in value for ch in ',+"\n'):
        return '"' + value.replace('"', '""') + '"'
    return value


def csv_line(fields: Sequence[str]) -> str:
    return ",".join(csv_field(f) for f in fields) + "\n"


class LabelingError(RuntimeError):
    def __init__(self, row: int, cause: Exception):
        self.row = row
        self.cause = cause
        super().__init__(f"row {row}: {cause}")

    def __reduce__(self):
        return (type(self), (self.row, self.cause))


def labeled_rows(kb: KnowledgeBase, vectors: Iterable[InputVector]) -> Iterator[tuple[InputVector, str, str]]:
    """(vector, label, verdict) for each vector, in input order.

    The verdict is left empty for KBs without current and proposed
    treatment variables, where there is no proposal to critique.
    """
    from .dss import DSSError, critique_from_set, label_text, recommend

    critiquable = kb.has_variable(CURRENT) and kb.has_variable(PROPOSED)
    for row, v in enumerate(vectors):
        try:
            rs = recommend(kb, v)
        except DSSError as exc:
            raise LabelingError(row, exc) from exc
        yield v, label_text(rs), critique_from_set(kb, rs, v).value if critiquable else ""


def export_labeled(kb: KnowledgeBase, stream: Iterable[InputVector] | None = None,
                   out: io.TextIOBase | None = None,
                   rows: Iterable[tuple[InputVector, str, str]] | None = None) -> str | None:
    """Write the labeled table as CSV.

    Returns the CSV text when ``out`` is None. ``rows`` may carry
    precomputed (vector, label, verdict) triples, e.g. from parallel workers.
    """
    buf = out if out is not None else io.StringIO()
    buf.write(csv_line(list(kb.variable_names) + ["label", "verdict"]))
    if rows is None:
        rows = labeled_rows(kb, stream if stream is not None else enumerate_vectors(kb))
    for v, lab, verdict in rows:
        buf.write(csv_line(list(v.values) + [lab, verdict]))
    return buf.getvalue() if out is None else None


def export_vectors(kb: KnowledgeBase, stream: Iterable[InputVector] | None = None,
                   out: io.TextIOBase | None = None) -> str | None:
    """Unlabeled variant of :func:`export_labeled`."""
    buf = out if out is not None else io.StringIO()
    buf.write(csv_line(kb.variable_names))
    for v in stream if stream is not None else enumerate_vectors(kb):
        buf.write(csv_line(v.values))
    return buf.getvalue() if out is None else None
