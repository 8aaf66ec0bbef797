"""Tour of the bundled diabetes knowledge base and its critiquing engine.

Run with:  python3 demos/01_sample_kb.py
"""

from gverify import count, critique, label, load_sample_kb, raw_product, recommend, validate_kb
from gverify.model import NA, InputVector

kb = load_sample_kb()
print(f"{kb.version}: {len(kb.variables)} variables, {len(kb.catalog)} treatments, {len(kb.rules)} rules")
print("validation findings:", validate_kb(kb) or "none")

raw, realistic = count(kb)
print(f"input space: {raw_product(kb)} raw, {raw} after applicability guards, {realistic} realistic")

# A patient on diet + metformin with a BMI of 25 and an HbA1c of 7 %,
# whose treatment is not working well enough.
patient = InputVector.from_mapping(kb, dict(
    discovery="late", bmi="<=27", hba1c=">6.5", current_type="monotherapy",
    current="diet_metformin", problem="low_efficiency", efficiency="partial",
    intolerant_drug=NA, proposed="diet_metformin_glitazone"))

rs = recommend(kb, patient)
print("\nfirst line: ", ", ".join(sorted(map(str, rs.first_line))))
print("second line:", ", ".join(sorted(map(str, rs.second_line))))
print("class label:", label(kb, patient))

# The same patient seen with three different prescriptions.
for proposed in ("diet_metformin", "diet_metformin_glitazone", "diet_insulin_da"):
    verdict = critique(kb, patient.replace(proposed=proposed))
    print(f"  proposing {proposed:<26} -> {verdict.value}")
