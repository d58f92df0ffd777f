"""Score, threshold and prune pattern-target pairs; label priors."""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field, replace

from annotalign.annotations import DEFAULT_POLICY, Annotation, Document, KeyPolicy
from annotalign.engine import apply_pairs, sentence_grids
from annotalign.patterns import PairStats, PatternTargetPair

logger = logging.getLogger(__name__)

THRESHOLD = 0.95
MIN_SUPPORT = 3
PRIOR_HI = 0.9
PRIOR_LO = 0.1
PRIOR_MIN_COUNT = 2


def footprints(
    pairs: Sequence[PatternTargetPair],
    docs: Iterable[Document],
    policy: KeyPolicy = DEFAULT_POLICY,
) -> dict[str, set[tuple[str, int, int, str]]]:
    """What each pair extracts in a single pass, keyed by pair id."""
    policy = policy.with_labels({p.label for p in pairs})
    hits: dict[str, set] = defaultdict(set)
    for doc in docs:
        for match in apply_pairs(pairs, sentence_grids(doc, policy)):
            hits[match.pair_id].add(match.identity)
    return hits


def score_pairs(
    pairs: Sequence[PatternTargetPair],
    training: Sequence[Document],
    labels: Iterable[str],
    policy: KeyPolicy = DEFAULT_POLICY,
    context_docs: Sequence[Document] | None = None,
) -> list[PatternTargetPair]:
    """Fill each pair's stats and footprint from one pass over training data.

    Pairs are applied to ``context_docs`` (default: the training documents
    with every label annotation removed); a match is a true positive when
    its range and label equal a gold annotation.
    """
    labels = set(labels)
    gold = {a.identity for d in training for a in d.annotations if a.type in labels}
    if context_docs is None:
        context_docs = [d.without_types(labels) for d in training]
    hits = footprints(pairs, context_docs, policy)
    scored = []
    for pair in pairs:
        found = frozenset(hits.get(pair.pair_id, ()))
        stats = PairStats(len(found), len(found & gold))
        scored.append(replace(pair, stats=stats, footprint=found, count=stats.applications))
    return scored


def refine(
    pairs: Iterable[PatternTargetPair],
    threshold: float = THRESHOLD,
    min_support: int = MIN_SUPPORT,
) -> list[PatternTargetPair]:
    """Keep evaluable pairs with enough support and precision >= threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    kept = []
    for pair in pairs:
        stats = pair.stats
        if stats is None or stats.precision is None:
            continue
        if stats.applications >= min_support and stats.precision >= threshold:
            kept.append(pair)
    return kept


def filter_subsumed(pairs: Sequence[PatternTargetPair]) -> list[PatternTargetPair]:
    """Drop pairs whose every extraction is also made by strictly shorter pairs.

    Length is the number of context elements.  Working longest-first, the
    pairs that cover a removed one are all shorter, and the shortest pairs
    are never removed, so the joint footprint is unchanged.
    """
    if any(p.footprint is None for p in pairs):
        raise ValueError("filter_subsumed needs scored pairs with footprints")
    by_len: dict[int, set] = defaultdict(set)
    for p in pairs:
        by_len[len(p.context)].update(p.footprint)
    below: dict[int, set] = {}
    acc: set = set()
    for n in sorted(by_len):
        below[n] = set(acc)
        acc |= by_len[n]
    kept = [p for p in pairs if not p.footprint <= below[len(p.context)]]
    logger.info("subsumption filter kept %d of %d pairs", len(kept), len(pairs))
    return kept


def token_key(atom: Annotation) -> str:
    return (atom.get("string") or "").lower()


@dataclass
class PriorTable:
    """P(label | token) from training counts, keyed on the lowercased string."""

    totals: Counter = field(default_factory=Counter)
    labeled: Counter = field(default_factory=Counter)

    def prior(self, token: str, label: str) -> float | None:
        total = self.totals.get(token, 0)
        if not total:
            return None
        return self.labeled.get((token, label), 0) / total

    def labels_for(self, token: str) -> dict[str, float]:
        total = self.totals.get(token, 0)
        if not total:
            return {}
        return {lab: n / total for (tok, lab), n in self.labeled.items() if tok == token}

    def rows(self) -> list[tuple[str, str, int, int]]:
        return sorted(
            (tok, lab, n, self.totals[tok]) for (tok, lab), n in self.labeled.items()
        )


def build_priors(training: Iterable[Document], labels: Iterable[str]) -> PriorTable:
    labels = set(labels)
    table = PriorTable()
    for doc in training:
        marks: dict[int, set[str]] = defaultdict(set)
        for ann in doc.annotations:
            if ann.type in labels:
                for i in range(ann.start, ann.end):
                    marks[i].add(ann.type)
        for atom in doc.atoms:
            tok = token_key(atom)
            table.totals[tok] += 1
            for lab in marks.get(atom.start, ()):
                table.labeled[(tok, lab)] += 1
    return table


def label_high_priors(
    docs: Iterable[Document],
    table: PriorTable,
    labels: Iterable[str],
    hi: float = PRIOR_HI,
    min_count: int = PRIOR_MIN_COUNT,
) -> tuple[list[Document], list[Annotation]]:
    """Label every token whose prior for a label is at least ``hi``."""
    labels = list(labels)
    out, added = [], []
    for doc in docs:
        new = []
        for atom in doc.atoms:
            tok = token_key(atom)
            if table.totals.get(tok, 0) < min_count:
                continue
            for lab in labels:
                p = table.prior(tok, lab)
                if p is not None and p >= hi:
                    new.append(Annotation(doc.document_id, atom.start, atom.end, lab))
        have = {a.identity for a in doc.annotations}
        new = [a for a in new if a.identity not in have]
        added.extend(new)
        out.append(doc.with_annotations(new))
    return out, added


def remove_low_priors(
    docs: Iterable[Document],
    emitted: Iterable[Annotation],
    table: PriorTable,
    lo: float = PRIOR_LO,
) -> tuple[list[Document], list[Annotation]]:
    """Remove system-emitted annotations whose tokens all have prior <= ``lo``.

    Annotations not in ``emitted`` (input or gold) are never touched, nor
    are those containing a token unseen in training.
    """
    candidates = {a.identity for a in emitted}
    out, removed = [], []
    for doc in docs:
        strings = [token_key(a) for a in doc.atoms]
        keep = []
        for ann in doc.annotations:
            if ann.identity in candidates:
                priors = [table.prior(strings[i], ann.type) for i in range(ann.start, ann.end)]
                if all(p is not None and p <= lo for p in priors):
                    removed.append(ann)
                    continue
            keep.append(ann)
        out.append(doc if len(keep) == len(doc.annotations) else replace(doc, annotations=tuple(keep)))
    return out, removed


def apply_priors(
    docs: Iterable[Document],
    table: PriorTable,
    labels: Iterable[str],
    hi: float = PRIOR_HI,
    lo: float = PRIOR_LO,
    emitted: Iterable[Annotation] = (),
    min_count: int = PRIOR_MIN_COUNT,
) -> list[Document]:
    if not hi > lo:
        raise ValueError("hi must exceed lo")
    labeled, _ = label_high_priors(docs, table, labels, hi, min_count)
    out, _ = remove_low_priors(labeled, list(emitted), table, lo)
    return out


def propagate_person_labels(doc: Document, person: str = "PER") -> Document:
    """Label noun tokens spelled like a token of a person elsewhere in the document."""
    persons = doc.of_type(person)
    if not persons:
        return doc
    covered = set()
    names = set()
    for ann in persons:
        for i in range(ann.start, ann.end):
            covered.add(i)
            if doc.atoms[i].get("string"):
                names.add(doc.atoms[i].get("string"))
    new = []
    for atom in doc.atoms:
        if atom.start in covered:
            continue
        category = (atom.get("category") or "").lower()
        if category.startswith("nn") and atom.get("string") in names:
            new.append(Annotation(doc.document_id, atom.start, atom.end, person))
    return doc.with_annotations(new)
