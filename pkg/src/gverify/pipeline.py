"""End-to-end run: parse, validate, enumerate, label, learn, factorize,
verify, render."""

from __future__ import annotations

import hashlib
import itertools
import json
import logging
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .c45 import DecisionTree, build_tree, dataset_from_kb, training_errors
from .dsl import KBError, parse_kb
from .factorize import FactoredTree, factorize
from .generator import (
    LabelingError,
    enumerate_vectors,
    export_labeled,
    labeled_rows,
    raw_product,
)
from .model import InputVector, KnowledgeBase
from .render import render_dot, render_json, render_text
from .validation import Finding, validate_kb
from .verify import DEFAULT_MAX_WITNESSES, DivergenceReport, verify

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DIVERGENT = 1
EXIT_INVALID_KB = 2
EXIT_IO = 3

OUTPUT_FILES = ("vectors.csv", "tree.json", "tree.dot", "tree.txt", "report.json")


class StageError(Exception):
    def __init__(self, stage: str, cause: Exception, exit_code: int = EXIT_IO):
        self.stage = stage
        self.cause = cause
        self.exit_code = exit_code
        super().__init__(f"{stage}: {cause}")


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("GVERIFY_JOBS", "1")))
    except ValueError:
        return 1


def _label_chunk(args):
    kb, start, values = args
    names = kb.variable_names
    try:
        rows = labeled_rows(kb, (InputVector(names, v) for v in values))
        return [(v.values, lab, verdict) for v, lab, verdict in rows]
    except LabelingError as exc:
        raise LabelingError(start + exc.row, exc.cause) from None


def label_vectors(kb: KnowledgeBase, jobs: int = 1, chunk: int = 2048) -> list[tuple[InputVector, str, str]]:
    """Label every enumerated vector; output order is enumeration order
    whatever the number of workers."""
    if jobs <= 1:
        return list(labeled_rows(kb, enumerate_vectors(kb)))
    names = kb.variable_names
    it = iter(enumerate_vectors(kb))
    blocks = []
    start = 0
    while block := [v.values for v in itertools.islice(it, chunk)]:
        blocks.append((kb, start, block))
        start += len(block)
    out = []
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for rows in pool.map(_label_chunk, blocks):
            out.extend((InputVector(names, v), lab, verdict) for v, lab, verdict in rows)
    return out


@dataclass
class PipelineResult:
    kb: KnowledgeBase | None = None
    findings: list[Finding] = field(default_factory=list)
    rows: list = field(default_factory=list)
    tree: DecisionTree | None = None
    factored: FactoredTree | None = None
    report: DivergenceReport | None = None
    manifest: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        if self.findings:
            return EXIT_INVALID_KB
        if self.report is None or not self.report.passed:
            return EXIT_DIVERGENT
        return EXIT_OK


def run(kb_text: str, kb_name: str = "<string>", jobs: int = 1,
        max_witnesses: int = DEFAULT_MAX_WITNESSES) -> PipelineResult:
    """Run every stage in memory; outputs are returned as text, not written."""
    res = PipelineResult()
    clock = time.perf_counter

    def stage(name):
        res.timings[name] = clock()
        return name

    t = stage("parse")
    try:
        res.kb = kb = parse_kb(kb_text, kb_name)
    except KBError as exc:
        raise StageError(t, exc, EXIT_IO) from exc

    stage("validate")
    res.findings = validate_kb(kb)
    if res.findings:
        _close_timings(res, clock())
        return res

    t = stage("label")
    try:
        res.rows = label_vectors(kb, jobs)
    except LabelingError as exc:
        raise StageError(t, exc, EXIT_INVALID_KB) from exc

    stage("learn")
    ds = dataset_from_kb(kb, ((v, lab) for v, lab, _ in res.rows))
    res.tree = build_tree(ds)
    errors = training_errors(res.tree, ds)

    stage("factorize")
    res.factored = factorize(res.tree, kb)

    stage("verify")
    res.report = verify(kb, res.factored, max_witnesses=max_witnesses, jobs=jobs)

    stage("render")
    res.manifest = {
        "kb": {
            "name": Path(kb_name).name,
            "version": kb.version,
            "sha256": hashlib.sha256(kb_text.encode("utf-8")).hexdigest(),
        },
        "counts": {
            "raw_product": raw_product(kb),
            "raw_conditional": enumerate_vectors(kb).total_raw,
            "realistic": len(res.rows),
            "distinct_labels": len({lab for _, lab, _ in res.rows}),
        },
        "tree": {
            "node_count_raw": res.tree.node_count,
            "node_count_factored": res.factored.node_count,
            "training_errors": errors,
        },
        "verification": {
            "checked": res.report.checked,
            "divergences": res.report.divergence_count,
            "passed": res.report.passed,
        },
    }
    report = {"manifest": res.manifest, "verification": res.report.to_dict()}
    res.outputs = {
        "vectors.csv": export_labeled(kb, rows=res.rows),
        "tree.json": render_json(res.factored),
        "tree.dot": render_dot(res.factored),
        "tree.txt": render_text(res.factored),
        "report.json": json.dumps(report, indent=1, ensure_ascii=False) + "\n",
    }
    _close_timings(res, clock())
    return res


def _close_timings(res: PipelineResult, end: float) -> None:
    # stage start times -> durations
    names = list(res.timings)
    res.timings = {n: (res.timings[names[i + 1]] if i + 1 < len(names) else end) - res.timings[n]
                   for i, n in enumerate(names)}


def write_outputs(outputs: dict[str, str], out_dir: str | Path) -> None:
    """Write each file via a temporary sibling and an atomic rename."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    umask = os.umask(0)
    os.umask(umask)
    for name, text in outputs.items():
        fd, tmp = tempfile.mkstemp(dir=out, prefix=f".{name}.")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.chmod(tmp, 0o666 & ~umask)
            os.replace(tmp, out / name)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


def pipeline(kb_path: str | Path, out_dir: str | Path, jobs: int = 1,
             max_witnesses: int = DEFAULT_MAX_WITNESSES) -> PipelineResult:
    """Run everything and write the output directory.

    Nothing is written when the KB fails validation.
    """
    try:
        text = Path(kb_path).read_text(encoding="utf-8")
    except OSError as exc:
        raise StageError("read", exc, EXIT_IO) from exc
    res = run(text, str(kb_path), jobs=jobs, max_witnesses=max_witnesses)
    if res.findings:
        return res
    try:
        write_outputs(res.outputs, out_dir)
    except OSError as exc:
        raise StageError("write", exc, EXIT_IO) from exc
    for name, seconds in res.timings.items():
        log.info("stage %-9s %.3fs", name, seconds)
    return res
