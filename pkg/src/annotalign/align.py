"""Smith-Waterman local alignment over two annotation grids.

Every pair of elements (x starting at i, y starting at j) with common keys
forms a span: a rectangle whose score ``M[i][j] + S`` is offered to the
origin cell ``(i + len(x), j + len(y))``.  Pairs sharing the same rectangle
co-occur; their key scores are combined (sum by default).  A pair of atom
positions with no common key at all is a diagonal mismatch step.

    M[i][j] = max(0, best span into (i, j), M[i-1][j] - d, M[i][j-1] - d)

Backtracking starts at the global maximum and walks span to terminal to
predecessor until it reaches a zero cell.
"""

from __future__ import annotations

import enum
from collections.abc import Mapping
from dataclasses import dataclass, field

from annotalign.annotations import AnnotationGrid, ElementKey, TARGET
from annotalign.serialize import serialize_element


class Link(enum.IntEnum):
    STOP = 0
    SPAN = 1
    SKIP_X = 2  # M[i-1][j]: X atom i-1 left unaligned
    SKIP_Y = 3  # M[i][j-1]: Y atom j-1 left unaligned


@dataclass(frozen=True)
class ScoringConfig:
    match_score: float = 1.0
    mismatch_score: float = -1.0
    gap_penalty: float = 2.0
    target_score: float = 100.0
    type_scores: Mapping[str, float] = field(default_factory=dict)
    target_types: frozenset[str] = frozenset({TARGET.type})
    combine: str = "sum"

    def __post_init__(self) -> None:
        if self.gap_penalty < 0:
            raise ValueError("gap_penalty must be non-negative")
        if self.target_score < self.match_score:
            raise ValueError("target_score must be at least match_score")
        if self.combine not in ("sum", "max"):
            raise ValueError(f"combine must be 'sum' or 'max', not {self.combine!r}")

    def key_score(self, key: ElementKey) -> float:
        if key.type in self.target_types:
            return self.target_score
        return self.type_scores.get(key.type, self.match_score)

    def combined(self, keys) -> float:
        scores = [self.key_score(k) for k in keys]
        return sum(scores) if self.combine == "sum" else max(scores)


UNIT_CONFIG = ScoringConfig(match_score=1, mismatch_score=-1, gap_penalty=0)


@dataclass(frozen=True)
class Span:
    terminal: tuple[int, int]
    origin: tuple[int, int]
    score: float
    keys: frozenset[ElementKey]

    def __post_init__(self) -> None:
        if not (self.origin[0] > self.terminal[0] and self.origin[1] > self.terminal[1]):
            raise ValueError("span origin must lie strictly below-right of its terminal")

    @property
    def mismatch(self) -> bool:
        return not self.keys

    @property
    def lengths(self) -> tuple[int, int]:
        return (self.origin[0] - self.terminal[0], self.origin[1] - self.terminal[1])


@dataclass
class AlignmentMatrix:
    """Filled DP state.  ``scores[i][j]`` covers X[:i] and Y[:j]."""

    scores: list[list[float]]
    links: list[list[Link]]
    best_span: dict[tuple[int, int], Span]
    spans: dict[tuple[int, int], list[Span]]

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.scores), len(self.scores[0]))

    def dump(self, x_labels=None, y_labels=None) -> str:
        """Scores with Y down the rows and X across, then every recorded span."""
        rows, cols = self.shape
        xl = ["."] + [str(s) for s in (x_labels or range(rows - 1))]
        yl = ["."] + [str(s) for s in (y_labels or range(cols - 1))]
        width = max(len(s) for s in xl + yl + [_fmt(v) for r in self.scores for v in r])
        lines = ["# scores", " " * width + " " + " ".join(s.rjust(width) for s in xl)]
        for j in range(cols):
            cells = [_fmt(self.scores[i][j]).rjust(width) for i in range(rows)]
            lines.append(yl[j].rjust(width) + " " + " ".join(cells))
        lines.append("# spans: origin <- terminal score keys")
        for origin in sorted(self.spans):
            for sp in self.spans[origin]:
                chosen = "*" if self.best_span.get(origin) == sp else " "
                keys = serialize_element(sorted(sp.keys)) if sp.keys else "mismatch"
                lines.append(f"{chosen}{origin} <- {sp.terminal} {_fmt(sp.score)} {keys}")
        return "\n".join(lines)


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else f"{v:g}"


@dataclass(frozen=True)
class AlignedElement:
    x_start: int
    x_length: int
    y_start: int
    y_length: int
    keys: tuple[ElementKey, ...]
    score: float

    @property
    def x_end(self) -> int:
        return self.x_start + self.x_length

    @property
    def y_end(self) -> int:
        return self.y_start + self.y_length


@dataclass(frozen=True)
class Alignment:
    elements: tuple[AlignedElement, ...] = ()
    score: float = 0.0
    end: tuple[int, int] | None = None

    def __bool__(self) -> bool:
        return bool(self.elements)

    @property
    def gaps(self) -> list[tuple[int, int]]:
        """Atoms skipped in (X, Y) between consecutive elements."""
        return [
            (b.x_start - a.x_end, b.y_start - a.y_end)
            for a, b in zip(self.elements, self.elements[1:])
        ]

    def find(self, key: ElementKey) -> int | None:
        for n, el in enumerate(self.elements):
            if key in el.keys:
                return n
        return None


def fill_matrix(
    x: AnnotationGrid, y: AnnotationGrid, cfg: ScoringConfig, *, keep_spans: bool = False
) -> AlignmentMatrix:
    n, m = x.length, y.length
    d = cfg.gap_penalty
    mismatch = cfg.mismatch_score
    scores = [[0.0] * (m + 1) for _ in range(n + 1)]
    links = [[Link.STOP] * (m + 1) for _ in range(n + 1)]
    # origin -> (score, terminal_i, terminal_j, keys)
    best: dict[tuple[int, int], tuple[float, int, int, frozenset]] = {}
    spans: dict[tuple[int, int], list[Span]] = {}
    pair_scores: dict[frozenset, float] = {}
    gx, gy = x.groups, y.groups

    for i in range(n + 1):
        row = scores[i]
        up = scores[i - 1] if i else None
        link_row = links[i]
        for j in range(m + 1):
            s = 0.0
            link = Link.STOP
            entry = best.get((i, j))
            if entry is not None and entry[0] > s:
                s = entry[0]
                link = Link.SPAN
            if up is not None and up[j] - d > s:
                s = up[j] - d
                link = Link.SKIP_X
            if j and row[j - 1] - d > s:
                s = row[j - 1] - d
                link = Link.SKIP_Y
            row[j] = s
            link_row[j] = link
            if i == n or j == m:
                continue
            for lx, kx in gx[i]:
                for ly, ky in gy[j]:
                    common = kx & ky
                    if common:
                        gain = pair_scores.get(common)
                        if gain is None:
                            gain = pair_scores[common] = cfg.combined(common)
                    elif lx == 1 and ly == 1:
                        gain = mismatch
                    else:
                        continue
                    origin = (i + lx, j + ly)
                    value = s + gain
                    cur = best.get(origin)
                    if cur is None or value > cur[0]:
                        best[origin] = (value, i, j, common)
                    if keep_spans:
                        spans.setdefault(origin, []).append(Span((i, j), origin, value, common))

    best_span = {o: Span((ti, tj), o, sc, keys) for o, (sc, ti, tj, keys) in best.items()}
    if keep_spans:
        # the chosen span is the first recorded one with the best score
        for origin, lst in spans.items():
            top = best_span[origin]
            for k, sp in enumerate(lst):
                if sp == top:
                    lst[k] = top
                    break
    return AlignmentMatrix(scores, links, best_span, spans)


def global_max(matrix: AlignmentMatrix) -> tuple[int, int] | None:
    """Cell of the maximum score, lexicographically smallest on ties; None if all zero."""
    cell = None
    top = 0.0
    for i, row in enumerate(matrix.scores):
        for j, v in enumerate(row):
            if v > top:
                top = v
                cell = (i, j)
    return cell


def backtrack(matrix: AlignmentMatrix, cell: tuple[int, int] | None) -> Alignment:
    if cell is None:
        return Alignment()
    scores = matrix.scores
    i, j = cell
    elements = []
    while scores[i][j] > 0:
        link = matrix.links[i][j]
        if link is Link.SPAN:
            sp = matrix.best_span[(i, j)]
            ti, tj = sp.terminal
            if sp.keys:
                elements.append(
                    AlignedElement(
                        ti, i - ti, tj, j - tj, tuple(sorted(sp.keys)), sp.score - scores[ti][tj]
                    )
                )
            i, j = ti, tj
        elif link is Link.SKIP_X:
            i -= 1
        elif link is Link.SKIP_Y:
            j -= 1
        else:  # pragma: no cover - a positive cell always has a predecessor
            raise AssertionError(f"positive cell {(i, j)} without a link")
    elements.reverse()
    return Alignment(tuple(elements), scores[cell[0]][cell[1]], cell)


def align(x: AnnotationGrid, y: AnnotationGrid, cfg: ScoringConfig | None = None) -> Alignment:
    cfg = cfg or ScoringConfig()
    if x.length == 0 or y.length == 0:
        return Alignment()
    matrix = fill_matrix(x, y, cfg)
    return backtrack(matrix, global_max(matrix))
