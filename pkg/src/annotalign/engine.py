"""Apply pattern-target pairs to annotated text, iterating to a fixpoint."""

from __future__ import annotations

import logging
from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from annotalign.annotations import (
    DEFAULT_POLICY,
    Annotation,
    AnnotationGrid,
    Document,
    KeyPolicy,
    build_grid,
)
from annotalign.patterns import ContextPattern, PatternTargetPair, TargetPattern
from annotalign.serialize import Pattern

logger = logging.getLogger(__name__)

MAX_ITERATIONS = 10


class FixpointError(RuntimeError):
    pass


@dataclass(frozen=True)
class MatchResult:
    document_id: str
    start: int
    end: int
    label: str
    pair_id: str
    iteration: int = 0

    @property
    def identity(self) -> tuple[str, int, int, str]:
        return (self.document_id, self.start, self.end, self.label)

    def annotation(self) -> Annotation:
        return Annotation(self.document_id, self.start, self.end, self.label)


def match_ends(grid: AnnotationGrid, pattern: Pattern, start: int) -> set[int]:
    """Every end reachable by matching ``pattern`` contiguously from ``start``.

    An element matches at a position when all of its keys occur there on
    elements of one common length; the match then advances by that length.
    """
    positions = {start}
    table = grid.keyed_lengths
    for element in pattern:
        reached = set()
        for p in positions:
            if p >= grid.length:
                continue
            here = table[p]
            lengths = None
            for key in element:
                found = here.get(key)
                if not found:
                    lengths = None
                    break
                lengths = found if lengths is None else lengths & found
                if not lengths:
                    break
            if lengths:
                reached.update(p + n for n in lengths)
        positions = reached
        if not positions:
            break
    return positions


def match_context_at(grid: AnnotationGrid, pattern: Pattern, start: int) -> int | None:
    """Shortest end of a contiguous match of ``pattern`` at ``start``, if any."""
    ends = match_ends(grid, pattern, start)
    return min(ends) if ends else None


# A slot is where a context puts its candidate target: ("both", e, b) means
# exactly [e, b); ("left", e, hi) a target anchored at e ending by hi;
# ("right", lo, b) a target ending at b starting no earlier than lo.
Slot = tuple[str, int, int]


def context_slots(context: ContextPattern, grid: AnnotationGrid) -> list[Slot]:
    lo, hi = grid.real_range
    if lo >= hi:
        return []
    rc_starts = []
    if context.rc:
        rc_starts = [b for b in range(lo + 1, hi + 1) if match_ends(grid, context.rc, b)]
    slots = set()
    if context.lc:
        lc_ends = set()
        for s in range(grid.length):
            lc_ends |= match_ends(grid, context.lc, s)
        for e in lc_ends:
            if not lo <= e < hi:
                continue
            if context.rc:
                # nearest right context after the left one
                b = next((b for b in rc_starts if b > e), None)
                if b is not None:
                    slots.add(("both", e, b))
            else:
                slots.add(("left", e, hi))
    else:
        slots.update(("right", lo, b) for b in rc_starts)
    return sorted(slots)


def fill_slot(target: TargetPattern, grid: AnnotationGrid, slot: Slot) -> tuple[int, int] | None:
    """The candidate range the target pattern validates in ``slot``."""
    kind, lo, hi = slot
    if kind == "both":
        return (lo, hi) if hi in match_ends(grid, target.elements, lo) else None
    if kind == "left":
        ends = [e for e in match_ends(grid, target.elements, lo) if lo < e <= hi]
        return (lo, min(ends)) if ends else None
    for s in range(hi - 1, lo - 1, -1):
        if hi in match_ends(grid, target.elements, s):
            return (s, hi)
    return None


def apply_pair(
    pair: PatternTargetPair, grid: AnnotationGrid, iteration: int = 0
) -> list[MatchResult]:
    out = []
    for slot in context_slots(pair.context, grid):
        rng = fill_slot(pair.target, grid, slot)
        if rng is not None:
            out.append(
                MatchResult(
                    grid.document_id,
                    grid.doc_index(rng[0]),
                    grid.doc_index(rng[1]),
                    pair.label,
                    pair.pair_id,
                    iteration,
                )
            )
    return out


def apply_pairs(
    pairs: Sequence[PatternTargetPair], grids: Iterable[AnnotationGrid], iteration: int = 0
) -> list[MatchResult]:
    """``apply_pair`` over many grids, sharing context work between pairs."""
    by_context: dict[ContextPattern, list[PatternTargetPair]] = defaultdict(list)
    for p in pairs:
        by_context[p.context].append(p)
    results = []
    for grid in grids:
        filled: dict[tuple[TargetPattern, Slot], tuple[int, int] | None] = {}
        for context, group in by_context.items():
            slots = context_slots(context, grid)
            if not slots:
                continue
            for pair in group:
                for slot in slots:
                    key = (pair.target, slot)
                    if key not in filled:
                        filled[key] = fill_slot(pair.target, grid, slot)
                    rng = filled[key]
                    if rng is not None:
                        results.append(
                            MatchResult(
                                grid.document_id,
                                grid.doc_index(rng[0]),
                                grid.doc_index(rng[1]),
                                pair.label,
                                pair.pair_id,
                                iteration,
                            )
                        )
    return results


def sentence_grids(
    doc: Document, policy: KeyPolicy = DEFAULT_POLICY, sentences: Iterable[int] | None = None
) -> list[AnnotationGrid]:
    picks = range(len(doc.sentences)) if sentences is None else sentences
    return [build_grid(doc, doc.sentences[k], policy, boundaries=True) for k in picks]


@dataclass
class FixpointResult:
    documents: list[Document]
    emitted: list[Annotation] = field(default_factory=list)
    matches: list[MatchResult] = field(default_factory=list)
    iterations: int = 0
    # new annotations per iteration, the last entry is always 0
    added: list[int] = field(default_factory=list)

    @property
    def productive(self) -> int:
        return sum(1 for n in self.added if n)


def run_to_fixpoint(
    pairs: Iterable[PatternTargetPair],
    corpus: Iterable[Document],
    policy: KeyPolicy = DEFAULT_POLICY,
    max_iterations: int = MAX_ITERATIONS,
) -> FixpointResult:
    """Apply every pair everywhere until an iteration adds nothing.

    Each iteration matches against the snapshot taken at its start, so the
    order of pairs is irrelevant.  Only sentences that gained annotations are
    revisited: an unchanged sentence can only reproduce known matches.
    """
    pairs = list(pairs)
    policy = policy.with_labels({p.label for p in pairs})
    docs = list(corpus)
    result = FixpointResult(docs)
    known = {a.identity for d in docs for a in d.annotations}
    dirty = {n: set(range(len(d.sentences))) for n, d in enumerate(docs)}
    iteration = 0
    while True:
        iteration += 1
        fresh: dict[int, list[Annotation]] = defaultdict(list)
        for n, doc in enumerate(docs):
            if not dirty.get(n) or not pairs:
                continue
            for match in apply_pairs(pairs, sentence_grids(doc, policy, sorted(dirty[n])), iteration):
                result.matches.append(match)
                if match.identity not in known:
                    known.add(match.identity)
                    fresh[n].append(match.annotation())
        total = sum(len(v) for v in fresh.values())
        result.added.append(total)
        logger.info("iteration %d: %d new annotations", iteration, total)
        if not total:
            break
        if iteration >= max_iterations:
            raise FixpointError(
                f"no fixpoint after {max_iterations} iterations ({total} new annotations in the last)"
            )
        dirty = {}
        for n, anns in fresh.items():
            docs[n] = docs[n].with_annotations(anns)
            result.emitted.extend(anns)
            touched = set()
            for a in anns:
                for k, (s, e) in enumerate(docs[n].sentences):
                    if s <= a.start < e:
                        touched.add(k)
            dirty[n] = touched
    result.documents = docs
    result.iterations = iteration
    return result
