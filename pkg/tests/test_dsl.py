import re

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import SAMPLE_KB_PATH
from gverify import sample_kb_text
from gverify.dsl import KBReferenceError, KBSyntaxError, load_kb, parse_kb, serialize_kb
from gverify.model import DoseModifier

MINIMAL = """
kb "minimal" {
  variable colour { red green }
  variable size { small big }
  components { diet }
  treatment diet { diet }
  rule everything {
    when colour in { red green }
    first { diet }
    second { }
  }
}
"""


class TestParse:
    def test_minimal_document(self):
        kb = parse_kb(MINIMAL)
        assert len(kb.variables) == 2
        assert len(kb.rules) == 1
        assert kb.version == "minimal"

    def test_sample_kb_shape(self, kb):
        assert len(kb.variables) == 9
        assert len(kb.catalog) == 19

    def test_sample_file_matches_packaged_copy(self):
        assert SAMPLE_KB_PATH.read_text(encoding="utf-8") == sample_kb_text()
        assert load_kb(SAMPLE_KB_PATH) == parse_kb(sample_kb_text())

    def test_undeclared_value_names_variable_and_value(self):
        text = sample_kb_text().replace("bmi = >27", "bmi = >30", 1)
        with pytest.raises(KBReferenceError) as info:
            parse_kb(text, "broken.kb")
        msg = str(info.value)
        assert "bmi" in msg and ">30" in msg
        assert msg.startswith("broken.kb:")

    def test_syntax_error_location(self):
        text = 'kb "x" {\n  variable a { p q }\n  rule r {\n    when a == p\n'
        with pytest.raises(KBSyntaxError) as info:
            parse_kb(text, "bad.kb")
        assert re.match(r"bad\.kb:\d+:\d+: ", str(info.value))
        assert info.value.line == 4

    @pytest.mark.parametrize("snippet, fragment", [
        ("variable a { p q }\n  variable a { r s }", "a"),
        ("variable a { p }", "a"),
        ("variable a when b = x { p q }", "b"),
    ])
    def test_rejected_variables(self, snippet, fragment):
        text = f'kb "x" {{\n  {snippet}\n  components {{ diet }}\n  treatment diet {{ diet }}\n}}'
        with pytest.raises(KBSyntaxError) as info:
            parse_kb(text)
        assert fragment in str(info.value)

    def test_unknown_treatment_in_rule(self):
        text = MINIMAL.replace("first { diet }", "first { metformin }")
        with pytest.raises(KBReferenceError, match="metformin"):
            parse_kb(text)

    def test_dose_suffix_parsed(self, kb):
        rule = kb.rule("metformin_escalation_normal_weight")
        doses = {str(e): e.dose for e in rule.first_line}
        assert doses["diet+metformin^+"] is DoseModifier.INCREASE

    def test_comments_ignored(self):
        commented = MINIMAL.replace("components { diet }", "components { diet } # the only one")
        assert parse_kb(commented) == parse_kb(MINIMAL)


class TestSerialize:
    def test_sample_round_trip(self, kb):
        assert parse_kb(serialize_kb(kb)) == kb

    def test_empty_constraints_section_omitted(self):
        kb = parse_kb(MINIMAL)
        assert kb.constraints == ()
        text = serialize_kb(kb)
        assert "exclude" not in text
        assert parse_kb(text) == kb

    def test_deterministic(self, kb):
        assert serialize_kb(kb) == serialize_kb(parse_kb(sample_kb_text()))

    def test_awkward_values_are_quoted(self):
        text = MINIMAL.replace("{ red green }", '{ "rule" "two words" }').replace(
            "colour in { red green }", 'colour in { "rule" "two words" }')
        kb = parse_kb(text)
        assert kb.variable("colour").domain == ("rule", "two words")
        assert parse_kb(serialize_kb(kb)) == kb


# -- generated toy knowledge bases -----------------------------------------

VALUE_POOL = ["lo", "hi", "<=5", ">5", "x-1", "0.5", "and", "when", "two words", "a+b"]
COMPONENTS = ["diet", "c1", "c2", "c3"]


@st.composite
def toy_kb_text(draw):
    n_vars = draw(st.integers(1, 4))
    variables = []
    lines = ['kb "toy %d" {' % draw(st.integers(0, 999))]
    for i in range(n_vars):
        dom = draw(st.lists(st.sampled_from(VALUE_POOL), min_size=2, max_size=4, unique=True))
        guard = ""
        if variables and draw(st.booleans()):
            gname, gdom = draw(st.sampled_from(variables))
            guard = f' when {gname} = "{draw(st.sampled_from(gdom))}"'
        lines.append(f"  variable v{i}{guard} {{ {' '.join(_q(v) for v in dom)} }}")
        variables.append((f"v{i}", dom))
    comps = draw(st.lists(st.sampled_from(COMPONENTS), min_size=1, max_size=4, unique=True))
    lines.append(f"  components {{ {' '.join(comps)} }}")
    subsets = draw(st.lists(st.lists(st.sampled_from(comps), unique=True), min_size=1, max_size=4,
                            unique_by=lambda s: frozenset(s)))
    names = []
    for j, s in enumerate(subsets):
        names.append(f"t{j}")
        lines.append(f"  treatment t{j} {{ {' '.join(s)} }}")

    def test():
        name, dom = draw(st.sampled_from(variables))
        kind = draw(st.sampled_from(["=", "!=", "in"]))
        if kind == "in":
            vals = draw(st.lists(st.sampled_from(dom), min_size=1, unique=True))
            return f"{name} in {{ {' '.join(_q(v) for v in vals)} }}"
        return f"{name} {kind} {_q(draw(st.sampled_from(dom)))}"

    for k in range(draw(st.integers(0, 2))):
        lines.append(f"  exclude x{k} when {test()}")
    for k in range(draw(st.integers(1, 3))):
        first = draw(st.lists(st.sampled_from(names), min_size=1, unique=True))
        second = draw(st.lists(st.sampled_from([n for n in names if n not in first] or names),
                               unique=True))
        lines += [f"  rule r{k} {{", f"    when {test()}",
                  f"    first {{ {' '.join(first)} }}", f"    second {{ {' '.join(second)} }}", "  }"]
    lines.append("}")
    return "\n".join(lines) + "\n"


def _q(value):
    return f'"{value}"'


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(toy_kb_text())
def test_generated_kbs_round_trip(text):
    kb = parse_kb(text)
    out = serialize_kb(kb)
    assert parse_kb(out) == kb
    assert serialize_kb(parse_kb(out)) == out
