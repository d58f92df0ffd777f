"""Command line: train, apply, eval, patterns, align, reproduce."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

from annotalign.align import ScoringConfig, backtrack, fill_matrix, global_max
from annotalign.annotations import AnnotationGrid
from annotalign.config import ConfigError, PipelineConfig, load_config
from annotalign.corpus import (
    CorpusError,
    read_corpus,
    read_patterns,
    read_priors,
    write_patterns,
    write_priors,
    write_records,
)
from annotalign.engine import FixpointError
from annotalign.evaluate import REFERENCE_TOLERANCE, compare_to_reference, evaluate
from annotalign.pipeline import Model, apply, system_annotations, train
from annotalign.serialize import PatternSyntaxError

logger = logging.getLogger("annotalign")


def _config(args) -> PipelineConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else PipelineConfig()
    if getattr(args, "labels", None):
        cfg = replace(cfg, labels=tuple(args.labels.split(",")))
    if getattr(args, "jobs", None):
        cfg = replace(cfg, jobs=args.jobs)
    return cfg


def _load(paths, annotations) -> list:
    docs = []
    for path in paths:
        if not Path(path).is_file():
            raise CorpusError(f"no such file: {path}")
        docs.extend(read_corpus(path, annotations=annotations or ()))
    return docs


def _side_paths(args) -> tuple[Path, Path]:
    out = Path(args.patterns if hasattr(args, "patterns") and args.patterns else args.out)
    stats = Path(args.stats) if args.stats else out.with_suffix(out.suffix + ".stats")
    priors = Path(args.priors) if getattr(args, "priors", None) else out.with_suffix(out.suffix + ".priors")
    return stats, priors


def cmd_train(args) -> int:
    cfg = _config(args)
    docs = _load(args.corpus, args.annotations)
    t0 = time.perf_counter()
    model = train(docs, cfg)
    stats, priors = _side_paths(args)
    write_patterns(model.pairs, args.out, stats)
    if model.priors is not None:
        write_priors(model.priors, priors)
    print(
        f"{len(docs)} documents, {model.candidates} candidate pairs, {model.retained} above threshold, "
        f"{len(model.pairs)} kept ({time.perf_counter() - t0:.1f}s)"
    )
    print(f"patterns: {args.out}\nstats: {stats}")
    if model.priors is not None:
        print(f"priors: {priors}")
    return 0


def _model(args, cfg: PipelineConfig) -> Model:
    if not Path(args.patterns).is_file():
        raise CorpusError(f"no such file: {args.patterns}")
    pairs = read_patterns(args.patterns, args.stats if args.stats else None)
    priors = None
    if not args.no_priors:
        _, path = _side_paths(args)
        if args.priors or path.is_file():
            if not path.is_file():
                raise CorpusError(f"no such file: {path}")
            priors = read_priors(path)
    return Model(pairs, priors)


def cmd_apply(args) -> int:
    cfg = _config(args)
    model = _model(args, cfg)
    docs = _load(args.corpus, args.annotations)
    applied = apply(model, docs, cfg, use_priors=model.priors is not None, keep_labels=args.keep_labels)
    write_records(applied.documents, args.out)
    found = len(system_annotations(applied.documents, cfg.labels))
    print(f"{found} annotations in {len(docs)} documents after {applied.fixpoint.iterations} iterations -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    cfg = _config(args)
    labels = list(cfg.labels)
    system = system_annotations(_load([args.system], ()), labels)
    gold = system_annotations(_load([args.gold], ()), labels)
    pattern = system_annotations(_load([args.pattern_system], ()), labels) if args.pattern_system else None
    report = evaluate(system, gold, labels, pattern)
    print(report.table())
    if args.records:
        Path(args.records).write_text("\n".join(report.records()) + "\n", encoding="utf-8")
    return 0


def cmd_patterns(args) -> int:
    if not Path(args.file).is_file():
        raise CorpusError(f"no such file: {args.file}")
    stats = args.stats
    if stats is None and Path(args.file + ".stats").is_file():
        stats = args.file + ".stats"
    pairs = read_patterns(args.file, stats)
    if args.label:
        pairs = [p for p in pairs if p.label == args.label]

    def precision(p):
        return p.stats.precision if p.stats and p.stats.precision is not None else -1.0

    if args.sort == "precision":
        pairs.sort(key=lambda p: (-precision(p), -(p.count or 0), str(p.context)))
    else:
        pairs.sort(key=lambda p: (-(p.count or 0), -precision(p), str(p.context)))
    if args.top:
        pairs = pairs[: args.top]
    print("\t".join(["#", "Pattern", "Target", "Count", "Precision"]))
    for n, p in enumerate(pairs, 1):
        prec = f"{p.stats.precision:.3f}" if p.stats and p.stats.precision is not None else "-"
        print(f"{n}\t{p.context}\t{p.target}\t{p.count if p.count is not None else '-'}\t{prec}")
    return 0


def render_alignment(alignment, x_symbols, y_symbols) -> str:
    parts = []
    prev = None
    for el in alignment.elements:
        if prev is not None and (el.x_start > prev.x_end or el.y_start > prev.y_end):
            skipped_x = " ".join(x_symbols[prev.x_end : el.x_start])
            skipped_y = " ".join(y_symbols[prev.y_end : el.y_start])
            parts.append(f"[gap x:{skipped_x or '-'} y:{skipped_y or '-'}]")
        xs = " ".join(x_symbols[el.x_start : el.x_end])
        ys = " ".join(y_symbols[el.y_start : el.y_end])
        parts.append(xs if xs == ys else f"{xs}/{ys}")
        prev = el
    return " ".join(parts)


def cmd_align(args) -> int:
    xs, ys = args.x.split(), args.y.split()
    cfg = ScoringConfig(match_score=args.match, mismatch_score=args.mismatch, gap_penalty=args.gap)
    x, y = AnnotationGrid.from_sequence(xs), AnnotationGrid.from_sequence(ys)
    matrix = fill_matrix(x, y, cfg, keep_spans=args.dump_matrix)
    if args.dump_matrix:
        print(matrix.dump(xs, ys))
    cell = global_max(matrix)
    alignment = backtrack(matrix, cell)
    print(f"max {alignment.score:g} at {cell}")
    print(render_alignment(alignment, xs, ys) or "(no alignment)")
    return 0


def cmd_reproduce(args) -> int:
    cfg = _config(args)
    train_docs = _load(args.train, args.annotations)
    test_docs = _load(args.test, args.annotations)
    labels = list(cfg.labels)
    model = train(train_docs, cfg)
    full = apply(model, test_docs, cfg)
    patterns_only = apply(model, test_docs, cfg, use_priors=False)
    gold = system_annotations(test_docs, labels)
    report = evaluate(
        system_annotations(full.documents, labels),
        gold,
        labels,
        system_annotations(patterns_only.documents, labels),
    )
    print(report.table())
    print()
    print(f"entity F1 against reference (flag beyond +/-{REFERENCE_TOLERANCE}):")
    for label, ours, ref, delta, flagged in compare_to_reference(report):
        print(f"{label}\t{ours:.3f}\t{ref:.3f}\t{delta:+.3f}\t{'FLAG' if flagged else 'ok'}")
    if args.records:
        Path(args.records).write_text("\n".join(report.records()) + "\n", encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="annotalign", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, corpus=True):
        if corpus:
            p.add_argument("corpus", nargs="+", help="CoNLL (.conll/.txt) or record (.tsv/.ann) files")
            p.add_argument("-a", "--annotations", action="append", help="extra annotation record file")
        p.add_argument("-c", "--config", help="INI settings file")
        p.add_argument("--labels", help="comma-separated entity labels (default PER,ORG,LOC)")

    p = sub.add_parser("train", help="induce and refine pattern-target pairs")
    common(p)
    p.add_argument("-o", "--out", required=True, help="pattern file to write")
    p.add_argument("--stats", help="stats side-file (default OUT.stats)")
    p.add_argument("--priors", help="prior table (default OUT.priors)")
    p.add_argument("-j", "--jobs", type=int, help="worker processes for alignment")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("apply", help="label documents with stored pairs")
    common(p)
    p.add_argument("-p", "--patterns", required=True)
    p.add_argument("--stats")
    p.add_argument("--priors", help="prior table (default PATTERNS.priors when present)")
    p.add_argument("--no-priors", action="store_true", help="patterns only")
    p.add_argument("--keep-labels", action="store_true", help="keep label annotations already in the input")
    p.add_argument("-o", "--out", required=True, help="annotation record file to write")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("eval", help="score system annotations against gold")
    common(p, corpus=False)
    p.add_argument("--system", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--pattern-system", help="patterns-only output for the extra token row")
    p.add_argument("--records", help="write machine-readable report lines here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("patterns", help="list stored pairs")
    p.add_argument("file")
    p.add_argument("--stats", help="stats side-file (default FILE.stats when present)")
    p.add_argument("--label")
    p.add_argument("--top", type=int)
    p.add_argument("--sort", choices=("count", "precision"), default="count")
    p.set_defaults(func=cmd_patterns)

    p = sub.add_parser("align", help="align two symbol sequences and show the result")
    p.add_argument("x", help='space-separated symbols, e.g. "A B C D E"')
    p.add_argument("y")
    p.add_argument("--match", type=float, default=1.0)
    p.add_argument("--mismatch", type=float, default=-1.0)
    p.add_argument("--gap", type=float, default=0.0)
    p.add_argument("--dump-matrix", action="store_true")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("reproduce", help="train, apply and compare entity F1 with reference scores")
    common(p, corpus=False)
    p.add_argument("--train", nargs="+", required=True, help="training files (e.g. train and testa)")
    p.add_argument("--test", nargs="+", required=True, help="evaluation files (e.g. testb)")
    p.add_argument("-a", "--annotations", action="append", help="extra annotation record file")
    p.add_argument("-j", "--jobs", type=int)
    p.add_argument("--records")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (OSError, CorpusError, ConfigError, PatternSyntaxError, FixpointError, ValueError) as exc:
        print(f"annotalign: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
