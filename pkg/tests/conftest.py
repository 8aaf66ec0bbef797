import sys
from pathlib import Path

import pytest

from gverify import load_sample_kb
from gverify.c45 import build_tree, dataset_from_kb
from gverify.dss import label
from gverify.factorize import factorize
from gverify.generator import enumerate_vectors

TESTS = Path(__file__).parent
sys.path.insert(0, str(TESTS))

ROOT = TESTS.parent
SAMPLE_KB_PATH = ROOT / "kb" / "diabetes-t2.kb"


@pytest.fixture(scope="session")
def kb():
    return load_sample_kb()


@pytest.fixture(scope="session")
def vectors(kb):
    return list(enumerate_vectors(kb))


@pytest.fixture(scope="session")
def dataset(kb, vectors):
    return dataset_from_kb(kb, ((v, label(kb, v)) for v in vectors))


@pytest.fixture(scope="session")
def tree(dataset):
    return build_tree(dataset)


@pytest.fixture(scope="session")
def factored(kb, tree):
    return factorize(tree, kb)


TOY_KB = """
kb "toy" {
  variable a { a1 a2 }
  variable b { b1 b2 b3 }
  components { diet }
  treatment none { }
  treatment diet { diet }
  rule only {
    when a in { a1 a2 }
    first { diet }
    second { }
  }
}
"""


@pytest.fixture
def toy_text():
    return TOY_KB


def pytest_terminal_summary(terminalreporter):
    results = sys.modules.get("test_acceptance")
    lines = getattr(results, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
