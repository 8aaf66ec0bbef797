"""Static and enumeration-based checks of a knowledge base.

Findings are data: an empty list means the KB is valid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import (
    CURRENT,
    CURRENT_TYPE,
    INTOLERANT_DRUG,
    MAX_DRUGS,
    PROPOSED,
    DoseModifier,
    KnowledgeBase,
    guard_matches,
    treatment_type,
)


@dataclass(frozen=True)
class Finding:
    code: str
    message: str
    subjects: tuple[str, ...] = ()
    witness: dict | None = field(default=None, compare=False)

    def __str__(self) -> str:
        return f"[{self.code}] {self.message}"


def _check_variables(kb: KnowledgeBase) -> list[Finding]:
    out = []
    seen: dict[str, tuple] = {}
    for v in kb.variables:
        if v.name in seen:
            out.append(Finding("duplicate-variable", f"variable {v.name!r} declared twice", (v.name,)))
        if len(v.domain) < 2:
            out.append(Finding("small-domain", f"variable {v.name!r} has fewer than 2 values", (v.name,)))
        if len(set(v.domain)) != len(v.domain):
            out.append(Finding("duplicate-value", f"variable {v.name!r} repeats a value", (v.name,)))
        if v.applicability is not None:
            gvar, gval = v.applicability
            if gvar not in seen:
                out.append(Finding("bad-guard", f"variable {v.name!r} is guarded by {gvar!r}, "
                                   "which is not declared before it", (v.name,)))
            elif gval not in seen[gvar]:
                out.append(Finding("bad-guard", f"guard of {v.name!r} uses unknown value {gval!r}", (v.name,)))
        seen[v.name] = v.domain
    names = kb.catalog.names()
    for role in (CURRENT, PROPOSED):
        if kb.has_variable(role):
            stray = [x for x in kb.variable(role).domain if x not in names]
            if stray:
                out.append(Finding("unknown-treatment", f"variable {role!r} lists values that are "
                                   f"not catalog treatments: {', '.join(stray)}", (role,)))
    if kb.has_variable(INTOLERANT_DRUG):
        stray = [x for x in kb.variable(INTOLERANT_DRUG).domain if x not in kb.components]
        if stray:
            out.append(Finding("unknown-component", f"{INTOLERANT_DRUG!r} lists values that are not "
                               f"components: {', '.join(stray)}", (INTOLERANT_DRUG,)))
    return out


def _check_catalog(kb: KnowledgeBase) -> list[Finding]:
    out = []
    canon: dict[str, str] = {}
    names = set()
    for t in kb.catalog:
        if t.name in names:
            out.append(Finding("duplicate-treatment", f"treatment {t.name!r} declared twice", (t.name,)))
        names.add(t.name)
        if t.canonical_name in canon:
            out.append(Finding("duplicate-treatment", f"treatments {canon[t.canonical_name]!r} and "
                               f"{t.name!r} are both {t.canonical_name}", (canon[t.canonical_name], t.name)))
        canon[t.canonical_name] = t.name
        unknown = [c for c in t.components if c not in kb.components]
        if unknown:
            out.append(Finding("unknown-component", f"treatment {t.name!r} uses undeclared "
                               f"components {', '.join(unknown)}", (t.name,)))
        if len(t.drugs) > MAX_DRUGS:
            out.append(Finding("quadritherapy", f"treatment {t.name!r} combines {len(t.drugs)} drugs",
                               (t.name,)))
    return out


def _check_tests(kb: KnowledgeBase, owner: str, tests) -> list[Finding]:
    out = []
    domains = {v.name: v.domain for v in kb.variables}
    used = []
    for t in tests:
        if t.variable not in domains:
            out.append(Finding("unknown-variable", f"{owner} tests undeclared variable {t.variable!r}", (owner,)))
            continue
        for value in t.values:
            if value not in domains[t.variable]:
                out.append(Finding("unknown-value", f"{owner} tests {t.variable} against unknown "
                                   f"value {value!r}", (owner,)))
        used.append(t.variable)
    return out


def _dose_admissible(kb: KnowledgeBase, rule, treatment: str) -> bool:
    """Whether the rule's guard allows the patient to be on ``treatment``."""
    try:
        t = kb.catalog.by_canonical(treatment)
    except KeyError:
        return False
    if kb.has_variable(CURRENT) and t.name not in kb.variable(CURRENT).domain:
        return False
    for test in rule.guard:
        if test.variable == CURRENT and not test.matches(t.name):
            return False
        if test.variable == CURRENT_TYPE and not test.matches(treatment_type(t)):
            return False
    return True


def _check_rules(kb: KnowledgeBase) -> list[Finding]:
    out = []
    canon = {t.canonical_name for t in kb.catalog}
    seen = set()
    for c in kb.constraints:
        out += _check_tests(kb, f"constraint {c.name!r}", c.conjuncts)
    for r in kb.rules:
        owner = f"rule {r.name!r}"
        if r.name in seen:
            out.append(Finding("duplicate-rule", f"{owner} declared twice", (r.name,)))
        seen.add(r.name)
        out += _check_tests(kb, owner, r.guard)
        vars_ = [t.variable for t in r.guard]
        if len(set(vars_)) != len(vars_):
            out.append(Finding("repeated-guard-variable", f"{owner} tests a variable twice", (r.name,)))
        if PROPOSED in vars_:
            out.append(Finding("guard-on-proposal", f"{owner} tests the proposed treatment", (r.name,)))
        if not r.first_line:
            out.append(Finding("empty-first-line", f"{owner} has no first-line element", (r.name,)))
        for e in r.first_line + r.second_line:
            if e.treatment not in canon:
                out.append(Finding("unknown-treatment", f"{owner} recommends unknown {e.treatment!r}", (r.name,)))
            elif e.dose is not DoseModifier.NONE and not _dose_admissible(kb, r, e.treatment):
                out.append(Finding("bad-dose-modifier", f"{owner} changes the dose of {e}, which "
                                   "can never be the current treatment under its guard", (r.name,)))
    return out


def check_coverage(kb: KnowledgeBase) -> list[Finding]:
    """Every realistic vector must match exactly one rule.

    Runs the full enumeration; vectors are grouped by their clinical part
    (everything but the proposed treatment) since guards never read it.
    """
    from .generator import enumerate_vectors

    names = kb.variable_names
    clinical = [i for i, n in enumerate(names) if n != PROPOSED]
    seen = set()
    overlaps: dict[tuple, Finding] = {}
    gaps: list[Finding] = []
    n_gaps = 0
    for v in enumerate_vectors(kb):
        key = tuple(v.values[i] for i in clinical)
        if key in seen:
            continue
        seen.add(key)
        hits = [r.name for r in kb.rules if guard_matches(r.guard, v)]
        if not hits:
            n_gaps += 1
            if len(gaps) < 10:
                witness = {names[i]: v.values[i] for i in clinical}
                gaps.append(Finding("no-rule", f"no rule matches {witness}", (), witness))
        elif len(hits) > 1 and tuple(hits) not in overlaps:
            witness = {names[i]: v.values[i] for i in clinical}
            overlaps[tuple(hits)] = Finding(
                "overlap", f"rules {', '.join(hits)} all match {witness}", tuple(hits), witness)
    out = list(overlaps.values()) + gaps
    if n_gaps > len(gaps):
        out.append(Finding("no-rule", f"{n_gaps - len(gaps)} more clinical situations match no rule"))
    return out


def validate_kb(kb: KnowledgeBase, coverage: bool = True) -> list[Finding]:
    findings = _check_variables(kb) + _check_catalog(kb) + _check_rules(kb)
    structural = any(f.code.startswith("unknown") or f.code == "bad-guard" for f in findings)
    if coverage and not structural:
        findings += check_coverage(kb)
    return findings
