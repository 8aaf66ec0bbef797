"""Edit one rule, then let verification and the tree diff point at it.

Run with:  python3 demos/03_mutation_check.py
"""

from dataclasses import replace

from gverify import load_sample_kb, serialize_kb, verify
from gverify.diff import diff
from gverify.model import RecommendationElement
from gverify.pipeline import run

kb = load_sample_kb()
before = run(serialize_kb(kb)).factored

# Someone changes the first-line advice for overweight patients who cannot
# take metformin.
rule = kb.rule("metformin_intolerance_overweight")
edited = replace(rule, first_line=(RecommendationElement("diet+glitazone"),))
kb2 = replace(kb, rules=tuple(edited if r is rule else r for r in kb.rules))

report = verify(kb2, before, max_witnesses=3)
print(f"old tree vs edited KB: {report.divergence_count} of {report.checked} vectors disagree")
for w in report.witnesses:
    print(f"  #{w.index}: bmi={w.vector['bmi']} current={w.vector['current']} "
          f"intolerant_drug={w.vector['intolerant_drug']}")
    print(f"      tree: {w.tree_result}")
    print(f"      KB:   {w.dss_result}")

after = run(serialize_kb(kb2)).factored
print("\nchanges in the review tree:")
for entry in diff(before, after):
    print(" ", entry)
