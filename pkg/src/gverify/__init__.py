"""Black-box verification of rule-based decision support systems.

Enumerate every input of a critiquing engine, label each one with the
engine's recommendations, learn an unpruned C4.5 tree from the labels,
compress it for human review and check that it still agrees with the
engine everywhere.
"""

from importlib import resources

from .c45 import DecisionTree, build_tree, classify, dataset_from_kb, entropy, gain_ratio
from .dss import critique, derive_action, label, match_rule, recommend
from .dsl import KBError, KBSyntaxError, load_kb, parse_kb, serialize_kb
from .factorize import FactoredTree, evaluate_factored, factorize
from .generator import count, enumerate_vectors, export_labeled, raw_product
from .model import NA, InputVector, KnowledgeBase
from .render import render
from .validation import validate_kb
from .verify import verify

__version__ = "0.1.0"

SAMPLE_KB = "diabetes-t2.kb"


def sample_kb_text() -> str:
    return resources.files(__package__).joinpath("data", SAMPLE_KB).read_text(encoding="utf-8")


def load_sample_kb() -> KnowledgeBase:
    """The bundled type 2 diabetes sample knowledge base."""
    return parse_kb(sample_kb_text(), SAMPLE_KB)


__all__ = [
    "NA", "DecisionTree", "FactoredTree", "InputVector", "KBError", "KBSyntaxError",
    "KnowledgeBase", "build_tree", "classify", "count", "critique", "dataset_from_kb",
    "derive_action", "entropy", "enumerate_vectors", "evaluate_factored", "export_labeled",
    "factorize", "gain_ratio", "label", "load_kb", "load_sample_kb", "match_rule", "parse_kb",
    "raw_product", "recommend", "render", "sample_kb_text", "serialize_kb", "validate_kb", "verify",
]
