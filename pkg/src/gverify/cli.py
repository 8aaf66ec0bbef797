"""``gverify`` command line.

Exit codes: 0 verified / valid / identical, 1 divergences or differences
found, 2 invalid knowledge base, 3 I/O or parse failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .c45 import DecisionTree, build_tree, dataset_from_kb
from .diff import AttributeMismatch, diff
from .dsl import KBError, load_kb
from .factorize import FactoredTree, factorize
from .generator import LabelingError, count, enumerate_vectors, export_vectors, export_labeled, raw_product
from .pipeline import (
    EXIT_DIVERGENT,
    EXIT_INVALID_KB,
    EXIT_IO,
    EXIT_OK,
    StageError,
    default_jobs,
    label_vectors,
    pipeline,
    write_outputs,
)
from .render import FORMATS, render
from .validation import validate_kb
from .verify import DEFAULT_MAX_WITNESSES, verify

log = logging.getLogger("gverify")


class _Fail(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _kb(path):
    try:
        return load_kb(path)
    except KBError as exc:
        raise _Fail(str(exc), EXIT_IO) from exc
    except OSError as exc:
        raise _Fail(f"{path}: {exc.strerror}", EXIT_IO) from exc


def _valid_kb(path):
    kb = _kb(path)
    findings = validate_kb(kb)
    if findings:
        for f in findings:
            print(f"{path}: {f}", file=sys.stderr)
        raise _Fail(f"{path}: {len(findings)} validation finding(s)", EXIT_INVALID_KB)
    return kb


def _read(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _Fail(f"{path}: {exc.strerror}", EXIT_IO) from exc


def _factored(path) -> FactoredTree:
    try:
        return FactoredTree.from_json(_read(path))
    except (ValueError, KeyError) as exc:
        raise _Fail(f"{path}: not a factored tree ({exc})", EXIT_IO) from exc


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    try:
        write_outputs({path.name: text}, path.parent)
    except OSError as exc:
        raise _Fail(f"{out}: {exc.strerror}", EXIT_IO) from exc


def _labeled(kb, jobs):
    try:
        return label_vectors(kb, jobs)
    except LabelingError as exc:
        raise _Fail(f"label: {exc}", EXIT_INVALID_KB) from exc


# -- subcommands -------------------------------------------------------------

def cmd_validate(args) -> int:
    kb = _kb(args.kb)
    findings = validate_kb(kb)
    for f in findings:
        print(f"{args.kb}: {f}")
    if not findings:
        print(f"{args.kb}: ok ({len(kb.variables)} variables, {len(kb.catalog)} treatments, "
              f"{len(kb.rules)} rules)")
    return EXIT_INVALID_KB if findings else EXIT_OK


def cmd_generate(args) -> int:
    kb = _valid_kb(args.kb)
    raw, realistic = count(kb)
    log.info("raw product %d, conditional %d, realistic %d", raw_product(kb), raw, realistic)
    _emit(export_vectors(kb), args.output)
    return EXIT_OK


def cmd_label(args) -> int:
    kb = _valid_kb(args.kb)
    _emit(export_labeled(kb, rows=_labeled(kb, args.jobs)), args.output)
    return EXIT_OK


def cmd_learn(args) -> int:
    kb = _valid_kb(args.kb)
    rows = _labeled(kb, args.jobs)
    tree = build_tree(dataset_from_kb(kb, ((v, lab) for v, lab, _ in rows)))
    log.info("tree: %d nodes from %d rows", tree.node_count, len(rows))
    _emit(tree.to_json(), args.output)
    return EXIT_OK


def cmd_factorize(args) -> int:
    kb = _kb(args.kb)
    try:
        tree = DecisionTree.from_json(_read(args.tree))
    except (ValueError, KeyError) as exc:
        raise _Fail(f"{args.tree}: not a decision tree ({exc})", EXIT_IO) from exc
    ft = factorize(tree, kb)
    log.info("factorized: %d -> %d nodes", tree.node_count, ft.node_count)
    _emit(ft.to_json(), args.output)
    return EXIT_OK


def cmd_render(args) -> int:
    _emit(render(_factored(args.tree), args.format), args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    kb = _valid_kb(args.kb)
    report = verify(kb, _factored(args.tree), max_witnesses=args.max_witnesses, jobs=args.jobs)
    log.info("verified %d vectors in %.2fs", report.checked, report.elapsed)
    _emit(json.dumps(report.to_dict(), indent=1, ensure_ascii=False) + "\n", args.output)
    return EXIT_OK if report.passed else EXIT_DIVERGENT


def cmd_diff(args) -> int:
    try:
        d = diff(_factored(args.a), _factored(args.b))
    except AttributeMismatch as exc:
        raise _Fail(str(exc), EXIT_IO) from exc
    for entry in d:
        print(entry)
    return EXIT_DIVERGENT if d else EXIT_OK


def cmd_pipeline(args) -> int:
    try:
        res = pipeline(args.kb, args.out, jobs=args.jobs, max_witnesses=args.max_witnesses)
    except StageError as exc:
        raise _Fail(str(exc), exc.exit_code) from exc
    for f in res.findings:
        print(f"{args.kb}: {f}", file=sys.stderr)
    if res.findings:
        return res.exit_code
    m = res.manifest
    print(f"{m['counts']['realistic']} vectors, tree {m['tree']['node_count_raw']} -> "
          f"{m['tree']['node_count_factored']} nodes, "
          f"{m['verification']['divergences']} divergence(s)")
    return res.exit_code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gverify", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log stage details")
    sub = parser.add_subparsers(dest="command", required=True)

    def jobs(p):
        p.add_argument("--jobs", type=int, default=default_jobs(),
                       help="worker processes (default: $GVERIFY_JOBS or 1)")

    def output(p):
        p.add_argument("-o", "--output", metavar="PATH", help="write here instead of stdout")

    p = sub.add_parser("validate", help="check a knowledge base")
    p.add_argument("kb")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("generate", help="enumerate input vectors as CSV")
    p.add_argument("kb")
    output(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("label", help="enumerate and label vectors as CSV")
    p.add_argument("kb")
    output(p)
    jobs(p)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("learn", help="learn the unpruned decision tree (JSON)")
    p.add_argument("kb")
    output(p)
    jobs(p)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("factorize", help="factorize a learned tree (JSON)")
    p.add_argument("kb")
    p.add_argument("tree")
    output(p)
    p.set_defaults(func=cmd_factorize)

    p = sub.add_parser("render", help="render a factored tree")
    p.add_argument("tree")
    p.add_argument("--format", choices=FORMATS, default="text")
    output(p)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("verify", help="compare a factored tree with the KB on every vector")
    p.add_argument("kb")
    p.add_argument("tree")
    p.add_argument("--max-witnesses", type=int, default=DEFAULT_MAX_WITNESSES)
    output(p)
    jobs(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("diff", help="structural diff of two factored trees")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("pipeline", help="run every stage and write an output directory")
    p.add_argument("kb")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--max-witnesses", type=int, default=DEFAULT_MAX_WITNESSES)
    jobs(p)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except _Fail as exc:
        print(f"gverify: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
