"""Generate context and target patterns from pairwise grid alignments."""

from __future__ import annotations

import logging
import math
import random
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations

from annotalign.align import Alignment, ScoringConfig, align
from annotalign.annotations import (
    DEFAULT_POLICY,
    TARGET,
    Annotation,
    AnnotationGrid,
    Document,
    KeyPolicy,
    build_grid,
)
from annotalign.patterns import ContextPattern, PatternTargetPair, TargetPattern, canonical

logger = logging.getLogger(__name__)

MAX_PAIRS = 1_000_000


@dataclass(frozen=True)
class GeneralContext:
    document_id: str
    range: tuple[int, int]
    grid: AnnotationGrid
    target: Annotation

    @property
    def label(self) -> str:
        return self.target.type

    @property
    def target_slot(self) -> tuple[int, int]:
        """Grid [start, end) of the target."""
        start = self.grid.grid_index(self.target.start)
        return (start, start + len(self.target))


def extract_general_contexts(
    corpus: Iterable[Document],
    target_type: str,
    window: int | None = None,
    policy: KeyPolicy = DEFAULT_POLICY,
) -> list[GeneralContext]:
    """One context per target: its sentence, or ``window`` atoms either side."""
    policy = policy.with_labels([target_type])
    contexts = []
    skipped = 0
    for doc in corpus:
        for t in sorted(doc.of_type(target_type), key=lambda a: a.extent):
            if window is None:
                rng = doc.sentence_of(t.start, t.end)
                if rng is None:
                    skipped += 1
                    continue
            else:
                rng = (max(0, t.start - window), min(len(doc), t.end + window))
            grid = build_grid(doc, rng, policy, boundaries=True, target=t)
            contexts.append(GeneralContext(doc.document_id, rng, grid, t))
    if skipped:
        logger.warning("skipped %d %s targets that cross sentence boundaries", skipped, target_type)
    return contexts


def split_at_target(alignment: Alignment) -> tuple[list, list] | None:
    """Left and right contexts around the aligned target slot.

    Only the gapless run of elements touching the target on each side is
    kept, since patterns are applied contiguously.
    """
    t = alignment.find(TARGET)
    if t is None:
        return None
    els = alignment.elements
    lc = []
    nxt = els[t]
    for el in reversed(els[:t]):
        if el.x_end != nxt.x_start or el.y_end != nxt.y_start:
            break
        lc.append(el.keys)
        nxt = el
    lc.reverse()
    rc = []
    prev = els[t]
    for el in els[t + 1 :]:
        if el.x_start != prev.x_end or el.y_start != prev.y_end:
            break
        rc.append(el.keys)
        prev = el
    return lc, rc


def _pair_indices(n: int, limit: int, seed: int) -> Iterable[tuple[int, int]]:
    total = n * (n - 1) // 2
    if total <= limit:
        return combinations(range(n), 2)
    logger.info("sampling %d of %d context pairs", limit, total)
    picks = sorted(random.Random(seed).sample(range(total), limit))
    return [_unrank_pair(k, n) for k in picks]


def _unrank_pair(k: int, n: int) -> tuple[int, int]:
    """The k-th pair (i < j) in lexicographic order."""
    i = n - 2 - math.floor(math.sqrt(-8 * k + 4 * n * (n - 1) - 7) / 2.0 - 0.5)
    j = k + i + 1 - n * (n - 1) // 2 + (n - i) * ((n - i) - 1) // 2
    return i, j


def _unique(grids: Sequence[AnnotationGrid]) -> tuple[list[AnnotationGrid], list[int]]:
    """Distinct grids and how often each occurred."""
    seen: dict[tuple, list] = {}
    for g in grids:
        entry = seen.setdefault(g.signature, [g, 0])
        entry[1] += 1
    return [g for g, _ in seen.values()], [n for _, n in seen.values()]


def _pairs_with_repeats(counts: Sequence[int], limit: int, seed: int) -> list[tuple[int, int]]:
    """Distinct pairs plus a self pair for every grid seen more than once.

    Aligning two copies of the same grid gives the same result however many
    copies there are, so one self pair stands for all of them.
    """
    pairs = list(_pair_indices(len(counts), limit, seed))
    return pairs + [(i, i) for i, n in enumerate(counts) if n > 1]


def _context_job(args) -> list[tuple]:
    grids, pairs, cfg = args
    out = []
    for i, j in pairs:
        split = split_at_target(align(grids[i], grids[j], cfg))
        if split is not None:
            out.append((tuple(split[0]), tuple(split[1])))
    return out


def _target_job(args) -> list[tuple]:
    grids, pairs, cfg = args
    out = []
    for i, j in pairs:
        elements = covering_elements(align(grids[i], grids[j], cfg), grids[i], grids[j])
        if elements:
            out.append(elements)
    return out


def _run_pairs(job, grids, pairs, cfg, jobs: int) -> list:
    pairs = list(pairs)
    if jobs <= 1 or len(pairs) < 200:
        return job((grids, pairs, cfg))
    size = math.ceil(len(pairs) / (jobs * 4))
    chunks = [(grids, pairs[k : k + size], cfg) for k in range(0, len(pairs), size)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return [item for part in pool.map(job, chunks) for item in part]


def generate_context_patterns(
    contexts: Sequence[GeneralContext],
    cfg: ScoringConfig | None = None,
    *,
    max_pairs: int = MAX_PAIRS,
    seed: int = 0,
    jobs: int = 1,
) -> list[ContextPattern]:
    """Pairwise-align general contexts and keep what they share around the target.

    Contexts are bucketed by label and deduplicated by grid before pairing.
    """
    cfg = cfg or ScoringConfig()
    buckets: dict[str, list[AnnotationGrid]] = {}
    for gc in contexts:
        buckets.setdefault(gc.label, []).append(gc.grid)
    patterns: dict[str, ContextPattern] = {}
    for label, grids in buckets.items():
        grids, counts = _unique(grids)
        pairs = _pairs_with_repeats(counts, max_pairs, seed)
        for lc, rc in _run_pairs(_context_job, grids, pairs, cfg, jobs):
            if not lc and not rc:
                continue
            pattern = ContextPattern(canonical(lc), canonical(rc), label)
            if not pattern.lexical:
                continue
            patterns.setdefault(str(pattern), pattern)
        logger.info("%s: %d unique contexts -> %d context patterns", label, len(grids), len(patterns))
    return list(patterns.values())


def target_grids(
    corpus: Iterable[Document],
    target_type: str,
    policy: KeyPolicy = DEFAULT_POLICY,
    exclude_types: Iterable[str] = (),
) -> list[AnnotationGrid]:
    """The sub-grid covered by each target, without label annotations."""
    exclude = set(exclude_types) | {target_type}
    grids = []
    for doc in corpus:
        for t in sorted(doc.of_type(target_type), key=lambda a: a.extent):
            grids.append(build_grid(doc, t.extent, policy, exclude_types=exclude))
    return grids


def covering_elements(
    alignment: Alignment, x: AnnotationGrid, y: AnnotationGrid
) -> tuple | None:
    """Element keys if the alignment tiles both grids end to end without gaps."""
    els = alignment.elements
    if not els or els[0].x_start != 0 or els[0].y_start != 0:
        return None
    if els[-1].x_end != x.length or els[-1].y_end != y.length:
        return None
    if any(gx or gy for gx, gy in alignment.gaps):
        return None
    return tuple(el.keys for el in els)


def whole_target_keys(grid: AnnotationGrid) -> list:
    """Keys of single elements that exactly cover the whole grid."""
    return sorted({e.key for e in grid.starts[0] if e.length == grid.length}) if grid.length else []


def generate_target_patterns(
    grids: Sequence[AnnotationGrid],
    label: str,
    cfg: ScoringConfig | None = None,
    *,
    max_pairs: int = MAX_PAIRS,
    seed: int = 0,
    jobs: int = 1,
) -> list[TargetPattern]:
    cfg = cfg or ScoringConfig()
    grids, counts = _unique(grids)
    found: dict[str, TargetPattern] = {}

    def add(elements) -> None:
        pattern = TargetPattern(canonical(elements), label)
        found.setdefault(str(pattern), pattern)

    for grid in grids:
        for key in whole_target_keys(grid):
            add([(key,)])
    pairs = _pairs_with_repeats(counts, max_pairs, seed)
    for elements in _run_pairs(_target_job, grids, pairs, cfg, jobs):
        add(elements)
    logger.info("%s: %d unique targets -> %d target patterns", label, len(grids), len(found))
    return list(found.values())


def pair_up(
    contexts: Iterable[ContextPattern], targets: Iterable[TargetPattern]
) -> list[PatternTargetPair]:
    """Every (context, target) combination sharing a label."""
    by_label: dict[str, list[TargetPattern]] = {}
    for t in targets:
        by_label.setdefault(t.label, []).append(t)
    return [PatternTargetPair(c, t) for c in contexts for t in by_label.get(c.label, [])]
