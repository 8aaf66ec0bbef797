"""Enumerate, label, learn and compress: the verification loop in a few lines.

Run with:  python3 demos/02_learn_and_factorize.py
"""

import time

from gverify import build_tree, dataset_from_kb, enumerate_vectors, factorize, label, load_sample_kb, render, verify
from gverify.c45 import training_errors

kb = load_sample_kb()

t0 = time.perf_counter()
rows = [(v, label(kb, v)) for v in enumerate_vectors(kb)]
ds = dataset_from_kb(kb, rows)
print(f"{len(rows)} labelled vectors, {len({lab for _, lab in rows})} distinct recommendation sets")

tree = build_tree(ds)
print(f"unpruned tree: {tree.node_count} nodes, {training_errors(tree, ds)} training errors")

ft = factorize(tree, kb)
print(f"factored tree: {ft.node_count} nodes")

report = verify(kb, ft)
print(f"checked {report.checked} vectors against the engine: {report.divergence_count} divergences "
      f"({time.perf_counter() - t0:.1f}s in total)")

# The first lines of the review document an expert would read.
print()
print("\n".join(render(ft, "text").splitlines()[:15]))
print("...")
