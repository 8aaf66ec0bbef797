"""Text format for knowledge bases.

Grammar::

    kb          := "kb" STRING "{" section* "}"
    section     := vars | components | catalog | constraints | rules
    vars        := "variable" IDENT ["when" IDENT "=" VALUE] "{" VALUE+ "}"
    components  := "components" "{" IDENT+ "}"
    catalog     := "treatment" IDENT "{" IDENT* "}"
    constraints := "exclude" IDENT "when" test ("and" test)*
    rules       := "rule" IDENT "{" "when" test ("and" test)*
                   "first" "{" rec-elem+ "}" "second" "{" rec-elem* "}" "}"
    test        := IDENT ("=" | "!=") VALUE | IDENT "in" "{" VALUE+ "}"
    rec-elem    := IDENT ["^+" | "^-"]

``#`` starts a comment running to the end of the line. Values are bare
words (anything but whitespace, braces, quotes and ``#``) or double-quoted
strings.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .model import (
    DoseModifier,
    ConstraintRule,
    KnowledgeBase,
    RecommendationElement,
    TherapyRule,
    Test,
    Treatment,
    TreatmentCatalog,
    VariableDef,
    canonical_name,
)

KEYWORDS = {"kb", "variable", "when", "components", "treatment", "exclude",
            "and", "rule", "first", "second", "in"}
SECTION_KEYWORDS = ("variable", "components", "treatment", "exclude", "rule")

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_BARE = re.compile(r'[^\s{}"#]+\Z')
_TOKEN = re.compile(r'"(?:[^"\\\n]|\\.)*"|[{}]|[^\s{}"#]+')


class KBError(Exception):
    """Base class for knowledge-base loading errors."""


class KBSyntaxError(KBError):
    def __init__(self, message: str, line: int, col: int, filename: str = "<string>"):
        self.message = message
        self.line = line
        self.col = col
        self.filename = filename
        super().__init__(f"{filename}:{line}:{col}: {message}")


class KBReferenceError(KBSyntaxError):
    """Reference to an undeclared name, or a duplicate declaration."""


@dataclass
class Token:
    kind: str  # "word", "string", "{", "}", "eof"
    text: str
    line: int
    col: int

    @property
    def value(self) -> str:
        if self.kind == "string":
            return re.sub(r"\\(.)", r"\1", self.text[1:-1])
        return self.text


def tokenize(text: str, filename: str = "<string>") -> list[Token]:
    tokens = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        pos = 0
        while pos < len(line):
            ch = line[pos]
            if ch.isspace():
                pos += 1
                continue
            if ch == "#":
                break
            m = _TOKEN.match(line, pos)
            if m is None:
                raise KBSyntaxError("unterminated string", lineno, pos + 1, filename)
            tok = m.group()
            kind = "string" if tok.startswith('"') else tok if tok in "{}" else "word"
            tokens.append(Token(kind, tok, lineno, pos + 1))
            pos = m.end()
    last = len(text.splitlines()) or 1
    tokens.append(Token("eof", "", last + 1 if text.endswith("\n") else last, 1))
    return tokens


class _Parser:
    def __init__(self, text: str, filename: str):
        self.filename = filename
        self.tokens = tokenize(text, filename)
        self.pos = 0

    # -- token helpers --------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def error(self, message: str, tok: Token | None = None, cls=KBSyntaxError):
        tok = tok or self.tok
        return cls(message, tok.line, tok.col, self.filename)

    def expected(self, *what: str):
        found = "end of input" if self.tok.kind == "eof" else repr(self.tok.text)
        return self.error(f"expected {' or '.join(what)}, found {found}")

    def next(self) -> Token:
        tok = self.tok
        self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        return self.tok.kind in ("word", "{", "}") and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.expected(repr(text))
        return self.next()

    def ident(self, what: str = "identifier") -> Token:
        tok = self.tok
        if tok.kind != "word" or not _IDENT.match(tok.text) or tok.text in KEYWORDS:
            raise self.expected(what)
        return self.next()

    def value(self) -> Token:
        if self.tok.kind == "string" or (self.tok.kind == "word" and self.tok.text not in {"=", "!="}):
            return self.next()
        raise self.expected("value")

    # -- grammar --------------------------------------------------------

    def parse(self) -> "_Raw":
        self.expect("kb")
        if self.tok.kind != "string":
            raise self.expected("version string")
        raw = _Raw(version=self.next().value)
        self.expect("{")
        while not self.at("}"):
            if self.at("variable"):
                self.variable(raw)
            elif self.at("components"):
                self.components(raw)
            elif self.at("treatment"):
                self.treatment(raw)
            elif self.at("exclude"):
                self.constraint(raw)
            elif self.at("rule"):
                self.rule(raw)
            else:
                raise self.expected(*(repr(k) for k in SECTION_KEYWORDS), "'}'")
        self.expect("}")
        if self.tok.kind != "eof":
            raise self.expected("end of input")
        return raw

    def variable(self, raw: "_Raw") -> None:
        self.expect("variable")
        name = self.ident("variable name")
        guard = None
        if self.at("when"):
            self.next()
            gvar = self.ident("variable name")
            self.expect("=")
            guard = (gvar, self.value())
        self.expect("{")
        values = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.expected("value", "'}'")
            values.append(self.value())
        if not values:
            raise self.expected("value")
        self.expect("}")
        raw.variables.append((name, guard, values))

    def components(self, raw: "_Raw") -> None:
        self.expect("components")
        self.expect("{")
        names = [self.ident("component name")]
        while not self.at("}"):
            names.append(self.ident("component name"))
        self.expect("}")
        raw.components.extend(names)

    def treatment(self, raw: "_Raw") -> None:
        self.expect("treatment")
        name = self.ident("treatment name")
        self.expect("{")
        comps = []
        while not self.at("}"):
            comps.append(self.ident("component name"))
        self.expect("}")
        raw.treatments.append((name, comps))

    def tests(self) -> list:
        tests = [self.test()]
        while self.at("and"):
            self.next()
            tests.append(self.test())
        return tests

    def test(self):
        var = self.ident("variable name")
        if self.at("=") or self.at("!="):
            op = self.next().text
            return (var, op, [self.value()])
        if self.at("in"):
            self.next()
            self.expect("{")
            values = [self.value()]
            while not self.at("}"):
                if self.tok.kind == "eof":
                    raise self.expected("value", "'}'")
                values.append(self.value())
            self.expect("}")
            return (var, "in", values)
        raise self.expected("'='", "'!='", "'in'")

    def constraint(self, raw: "_Raw") -> None:
        self.expect("exclude")
        name = self.ident("constraint name")
        self.expect("when")
        raw.constraints.append((name, self.tests()))

    def rule(self, raw: "_Raw") -> None:
        self.expect("rule")
        name = self.ident("rule name")
        self.expect("{")
        self.expect("when")
        guard = self.tests()
        self.expect("first")
        first = self.elements(require=True)
        self.expect("second")
        second = self.elements(require=False)
        self.expect("}")
        raw.rules.append((name, guard, first, second))

    def elements(self, require: bool) -> list:
        self.expect("{")
        elems = []
        while not self.at("}"):
            tok = self.tok
            if tok.kind != "word":
                raise self.expected("treatment name")
            m = re.match(r"([A-Za-z_][A-Za-z0-9_]*)(\^[+-])?\Z", tok.text)
            if m is None or m.group(1) in KEYWORDS:
                raise self.expected("treatment name")
            self.next()
            elems.append((tok, m.group(1), DoseModifier.from_suffix(m.group(2) or "")))
        if require and not elems:
            raise self.expected("treatment name")
        self.expect("}")
        return elems


@dataclass
class _Raw:
    version: str

    def __post_init__(self):
        self.variables: list = []
        self.components: list = []
        self.treatments: list = []
        self.constraints: list = []
        self.rules: list = []


def _resolve(raw: _Raw, p: _Parser) -> KnowledgeBase:
    def ref_error(message, tok):
        return p.error(message, tok, KBReferenceError)

    variables: dict[str, VariableDef] = {}
    for name_tok, guard, value_toks in raw.variables:
        name = name_tok.text
        if name in variables:
            raise ref_error(f"duplicate variable {name!r}", name_tok)
        domain = []
        for vt in value_toks:
            if vt.value in domain:
                raise ref_error(f"duplicate value {vt.value!r} in variable {name!r}", vt)
            domain.append(vt.value)
        if len(domain) < 2:
            raise p.error(f"variable {name!r} needs at least 2 values", name_tok)
        applicability = None
        if guard is not None:
            gvar, gval = guard
            if gvar.text not in variables:
                raise ref_error(f"guard of {name!r} references undeclared variable {gvar.text!r}", gvar)
            if gval.value not in variables[gvar.text].domain:
                raise ref_error(f"variable {gvar.text!r} has no value {gval.value!r}", gval)
            applicability = (gvar.text, gval.value)
        variables[name] = VariableDef(name, tuple(domain), applicability)

    components: list[str] = []
    for c in raw.components:
        if c.text in components:
            raise ref_error(f"duplicate component {c.text!r}", c)
        components.append(c.text)

    treatments: dict[str, Treatment] = {}
    canon_seen: dict[str, str] = {}
    for name_tok, comp_toks in raw.treatments:
        if name_tok.text in treatments:
            raise ref_error(f"duplicate treatment {name_tok.text!r}", name_tok)
        comps = []
        for ct in comp_toks:
            if ct.text not in components:
                raise ref_error(f"treatment {name_tok.text!r} uses undeclared component {ct.text!r}", ct)
            if ct.text in comps:
                raise ref_error(f"component {ct.text!r} repeated in treatment {name_tok.text!r}", ct)
            comps.append(ct.text)
        ordered = tuple(sorted(comps, key=components.index))
        canon = canonical_name(ordered, components)
        if canon in canon_seen:
            raise ref_error(f"treatment {name_tok.text!r} duplicates {canon_seen[canon]!r} ({canon})", name_tok)
        canon_seen[canon] = name_tok.text
        treatments[name_tok.text] = Treatment(name_tok.text, ordered, canon)

    def resolve_tests(tests) -> tuple[Test, ...]:
        out = []
        for var_tok, op, value_toks in tests:
            if var_tok.text not in variables:
                raise ref_error(f"undeclared variable {var_tok.text!r}", var_tok)
            domain = variables[var_tok.text].domain
            for vt in value_toks:
                if vt.value not in domain:
                    raise ref_error(f"variable {var_tok.text!r} has no value {vt.value!r}", vt)
            out.append(Test(var_tok.text, op, tuple(vt.value for vt in value_toks)))
        return tuple(out)

    constraints = []
    seen = set()
    for name_tok, tests in raw.constraints:
        if name_tok.text in seen:
            raise ref_error(f"duplicate constraint {name_tok.text!r}", name_tok)
        seen.add(name_tok.text)
        constraints.append(ConstraintRule(name_tok.text, resolve_tests(tests)))

    def resolve_elems(elems) -> tuple[RecommendationElement, ...]:
        out = []
        for tok, tname, dose in elems:
            if tname not in treatments:
                raise ref_error(f"undeclared treatment {tname!r}", tok)
            elem = RecommendationElement(treatments[tname].canonical_name, dose)
            if elem in out:
                raise ref_error(f"element {tok.text!r} listed twice", tok)
            out.append(elem)
        return tuple(out)

    rules = []
    seen = set()
    for name_tok, guard, first, second in raw.rules:
        if name_tok.text in seen:
            raise ref_error(f"duplicate rule {name_tok.text!r}", name_tok)
        seen.add(name_tok.text)
        rules.append(TherapyRule(name_tok.text, resolve_tests(guard),
                                 resolve_elems(first), resolve_elems(second)))

    return KnowledgeBase(
        version=raw.version,
        variables=tuple(variables.values()),
        components=tuple(components),
        catalog=TreatmentCatalog(tuple(treatments.values())),
        constraints=tuple(constraints),
        rules=tuple(rules),
    )


def parse_kb(text: str, filename: str = "<string>") -> KnowledgeBase:
    """Parse DSL source into a :class:`KnowledgeBase`.

    Raises :class:`KBSyntaxError` (or its subclass :class:`KBReferenceError`)
    carrying ``file:line:col`` on the first problem found.
    """
    p = _Parser(text, filename)
    return _resolve(p.parse(), p)


def load_kb(path: str | Path) -> KnowledgeBase:
    path = Path(path)
    return parse_kb(path.read_text(encoding="utf-8"), str(path))


# -- serialization -------------------------------------------------------

def _quote(value: str) -> str:
    if _BARE.match(value) and value not in KEYWORDS and value not in {"=", "!="}:
        return value
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _tests(tests) -> str:
    parts = []
    for t in tests:
        if t.op == "in":
            parts.append(f"{t.variable} in {{ {' '.join(_quote(v) for v in t.values)} }}")
        else:
            parts.append(f"{t.variable} {t.op} {_quote(t.values[0])}")
    return " and ".join(parts)


def serialize_kb(kb: KnowledgeBase) -> str:
    """Render a KB back to DSL text; declaration order is preserved."""
    by_canon = {t.canonical_name: t.name for t in kb.catalog}

    def elems(items) -> str:
        inner = " ".join(by_canon[e.treatment] + e.dose.suffix for e in items)
        return f"{{ {inner} }}" if inner else "{ }"

    out = [f"kb {_quote_string(kb.version)} {{"]
    for v in kb.variables:
        guard = f" when {v.applicability[0]} = {_quote(v.applicability[1])}" if v.applicability else ""
        out.append(f"  variable {v.name}{guard} {{ {' '.join(_quote(x) for x in v.domain)} }}")
    if kb.components:
        out.append("")
        out.append(f"  components {{ {' '.join(kb.components)} }}")
    if len(kb.catalog):
        out.append("")
        for t in kb.catalog:
            body = " ".join(t.components)
            out.append(f"  treatment {t.name} {{ {body} }}" if body else f"  treatment {t.name} {{ }}")
    if kb.constraints:
        out.append("")
        for c in kb.constraints:
            out.append(f"  exclude {c.name} when {_tests(c.conjuncts)}")
    for r in kb.rules:
        out.append("")
        out.append(f"  rule {r.name} {{")
        out.append(f"    when {_tests(r.guard)}")
        out.append(f"    first {elems(r.first_line)}")
        out.append(f"    second {elems(r.second_line)}")
        out.append("  }")
    out.append("}")
    return "\n".join(out) + "\n"


def _quote_string(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
