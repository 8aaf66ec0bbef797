"""Oracle equivalence: the factored tree against the critiquing engine."""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .c45 import UnseenValue
from .dss import DSSError, label_text, recommend
from .factorize import FactoredTree, evaluate_factored
from .generator import enumerate_vectors
from .model import InputVector, KnowledgeBase

DEFAULT_MAX_WITNESSES = 100
CHUNK = 2048


@dataclass(frozen=True)
class Divergence:
    index: int
    vector: dict
    tree_result: str
    dss_result: str

    def to_dict(self) -> dict:
        return {"index": self.index, "vector": self.vector,
                "tree": self.tree_result, "dss": self.dss_result}


@dataclass
class DivergenceReport:
    checked: int
    divergence_count: int
    witnesses: list[Divergence]
    elapsed: float = field(default=0.0, compare=False)

    @property
    def passed(self) -> bool:
        return self.divergence_count == 0

    def to_dict(self) -> dict:
        # elapsed time is left out so reports are reproducible byte for byte
        return {
            "checked": self.checked,
            "divergences": self.divergence_count,
            "witnesses_shown": len(self.witnesses),
            "witnesses": [w.to_dict() for w in self.witnesses],
        }


def _compare_one(kb: KnowledgeBase, tree: FactoredTree, index: int, v: InputVector) -> Divergence | None:
    try:
        got = label_text(evaluate_factored(tree, v))
    except UnseenValue as exc:
        got = f"error: {exc}"
    try:
        want = label_text(recommend(kb, v))
    except DSSError as exc:
        want = f"error: {exc}"
    if got == want:
        return None
    return Divergence(index, v.as_dict(), got, want)


def _compare_chunk(args) -> tuple[int, list[Divergence]]:
    kb, tree, start, vectors = args
    out = []
    for offset, values in enumerate(vectors):
        d = _compare_one(kb, tree, start + offset, InputVector(kb.variable_names, values))
        if d is not None:
            out.append(d)
    return len(vectors), out


def _chunks(kb, tree, vectors: Iterable[InputVector]) -> Iterator[tuple]:
    it = iter(vectors)
    start = 0
    while True:
        block = [v.values for v in itertools.islice(it, CHUNK)]
        if not block:
            return
        yield kb, tree, start, block
        start += len(block)


def verify(kb: KnowledgeBase, tree: FactoredTree, max_witnesses: int = DEFAULT_MAX_WITNESSES,
           jobs: int = 1) -> DivergenceReport:
    """Compare the tree with the engine on every enumerated vector.

    All mismatches are counted; only the first ``max_witnesses`` (in
    enumeration order) are kept in the report.
    """
    t0 = time.perf_counter()
    checked, total, witnesses = 0, 0, []
    chunks = _chunks(kb, tree, enumerate_vectors(kb))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_compare_chunk, chunks))
    else:
        results = map(_compare_chunk, chunks)
    for n, divs in results:
        checked += n
        total += len(divs)
        room = max_witnesses - len(witnesses)
        if room > 0:
            witnesses.extend(divs[:room])
    return DivergenceReport(checked, total, witnesses, time.perf_counter() - t0)
