"""Training and application: generation, scoring, refinement, fixpoint, priors."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, replace

from annotalign.annotations import Annotation, Document
from annotalign.config import PipelineConfig
from annotalign.engine import FixpointResult, run_to_fixpoint
from annotalign.generate import (
    extract_general_contexts,
    generate_context_patterns,
    generate_target_patterns,
    pair_up,
    target_grids,
)
from annotalign.patterns import PatternTargetPair
from annotalign.refine import (
    PriorTable,
    build_priors,
    filter_subsumed,
    label_high_priors,
    propagate_person_labels,
    refine,
    remove_low_priors,
    score_pairs,
)

logger = logging.getLogger(__name__)


@dataclass
class Model:
    pairs: list[PatternTargetPair]
    priors: PriorTable | None = None
    candidates: int = 0
    retained: int = 0


def generate_pairs(docs: Sequence[Document], config: PipelineConfig) -> list[PatternTargetPair]:
    policy = config.label_policy
    pairs = []
    for label in config.labels:
        contexts = extract_general_contexts(docs, label, config.window, policy)
        pc = generate_context_patterns(
            contexts, config.scoring, max_pairs=config.max_pairs, seed=config.seed, jobs=config.jobs
        )
        grids = target_grids(docs, label, policy, exclude_types=config.labels)
        pt = generate_target_patterns(
            grids, label, config.scoring, max_pairs=config.max_pairs, seed=config.seed, jobs=config.jobs
        )
        pairs.extend(pair_up(pc, pt))
        logger.info("%s: %d context x %d target patterns", label, len(pc), len(pt))
    return pairs


def train(docs: Sequence[Document], config: PipelineConfig | None = None) -> Model:
    """Generate pairs from gold-annotated documents and keep the precise ones.

    Pairs are scored on the documents with their labels removed and, when
    priors are enabled, re-labelled from high priors, which is what they
    will see at application time.
    """
    config = config or PipelineConfig()
    docs = list(docs)
    priors = build_priors(docs, config.labels)
    candidates = generate_pairs(docs, config)
    context_docs = [d.without_types(config.labels) for d in docs]
    if config.priors:
        context_docs, _ = label_high_priors(
            context_docs, priors, config.labels, config.prior_hi, config.prior_min_count
        )
    scored = score_pairs(candidates, docs, config.labels, config.label_policy, context_docs)
    kept = refine(scored, config.threshold, config.min_support)
    retained = len(kept)
    kept = filter_subsumed(kept)
    kept.sort(key=lambda p: (p.label, -(p.count or 0), str(p.context), str(p.target)))
    logger.info("%d candidate pairs, %d above threshold, %d after filtering", len(candidates), retained, len(kept))
    return Model(kept, priors if config.priors else None, len(candidates), retained)


def merge_labels(doc: Document, labels: Iterable[str]) -> Document:
    """Collapse overlapping or adjacent same-label annotations into runs within sentences."""
    labels = set(labels)
    marked: dict[str, set[int]] = {}
    rest = []
    for ann in doc.annotations:
        if ann.type in labels:
            marked.setdefault(ann.type, set()).update(range(ann.start, ann.end))
        else:
            rest.append(ann)
    merged = []
    for label, idx in marked.items():
        for s, e in doc.sentences:
            run_start = None
            for i in range(s, e + 1):
                inside = i < e and i in idx
                if inside and run_start is None:
                    run_start = i
                elif not inside and run_start is not None:
                    merged.append(Annotation(doc.document_id, run_start, i, label))
                    run_start = None
    merged.sort(key=lambda a: (a.start, a.end, a.type))
    return replace(doc, annotations=tuple(rest) + tuple(merged))


@dataclass
class Applied:
    documents: list[Document]
    fixpoint: FixpointResult


def apply(
    model: Model,
    docs: Iterable[Document],
    config: PipelineConfig | None = None,
    *,
    use_priors: bool = True,
    keep_labels: bool = False,
) -> Applied:
    """Label documents: high priors, pattern fixpoint, person propagation, low-prior pruning."""
    config = config or PipelineConfig()
    docs = list(docs)
    if not keep_labels:
        docs = [d.without_types(config.labels) for d in docs]
    priors = model.priors if use_priors else None
    if priors is not None:
        docs, _ = label_high_priors(docs, priors, config.labels, config.prior_hi, config.prior_min_count)
    result = run_to_fixpoint(model.pairs, docs, config.label_policy, config.max_iterations)
    docs = result.documents
    if config.propagate_persons and config.person_label in config.labels:
        docs = [propagate_person_labels(d, config.person_label) for d in docs]
    if priors is not None:
        docs, removed = remove_low_priors(docs, result.emitted, priors, config.prior_lo)
        if removed:
            logger.info("removed %d low-prior annotations", len(removed))
    docs = [merge_labels(d, config.labels) for d in docs]
    return Applied(docs, result)


def system_annotations(docs: Iterable[Document], labels: Iterable[str]) -> list[Annotation]:
    labels = set(labels)
    return [a for d in docs for a in d.annotations if a.type in labels]
