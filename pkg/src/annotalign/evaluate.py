"""Entity- and token-level scoring.

At the entity level only exact (range, label) matches count; a system entity
with a boundary error is both a false positive and a false negative.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field

from annotalign.annotations import Annotation

# entity-level F1 per label reported for the CoNLL-2003 test B split
REFERENCE_F1 = {"PER": 0.914, "ORG": 0.802, "LOC": 0.872}
REFERENCE_TOLERANCE = 0.05


@dataclass(frozen=True)
class Counts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def __add__(self, other: Counts) -> Counts:
        return Counts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


@dataclass
class EvalReport:
    labels: list[str]
    entity: dict[str, Counts]
    token: dict[str, Counts]
    pattern_token: dict[str, Counts] | None = None
    boundary_errors: dict[str, int] = field(default_factory=dict)

    def rows(self) -> list[tuple[str, dict[str, Counts]]]:
        out = [("Entity", self.entity), ("Token", self.token)]
        if self.pattern_token is not None:
            out.append(("Patterns, Token", self.pattern_token))
        return out

    def table(self) -> str:
        head = ["".ljust(16)]
        for label in self.labels:
            head += [f"{label} Prec".rjust(10), f"{label} Recall".rjust(11), f"{label} F1".rjust(8)]
        lines = [" ".join(head)]
        for name, counts in self.rows():
            cells = [name.ljust(16)]
            for label in self.labels:
                c = counts.get(label, Counts())
                cells += [f"{c.precision:.3f}".rjust(10), f"{c.recall:.3f}".rjust(11), f"{c.f1:.3f}".rjust(8)]
            lines.append(" ".join(cells))
        return "\n".join(lines)

    def records(self) -> list[str]:
        lines = []
        for name, counts in self.rows():
            level = name.lower().replace(", ", "-")
            for label in self.labels:
                c = counts.get(label, Counts())
                lines.append(
                    f"{level}\t{label}\t{c.tp}\t{c.fp}\t{c.fn}\t"
                    f"{c.precision:.6f}\t{c.recall:.6f}\t{c.f1:.6f}"
                )
        return lines


def entity_counts(system: set, gold: set) -> Counts:
    tp = len(system & gold)
    return Counts(tp, len(system) - tp, len(gold) - tp)


def _tokens(anns: Iterable[tuple[str, int, int, str]]) -> set[tuple[str, int, str]]:
    return {(doc, i, label) for doc, s, e, label in anns for i in range(s, e)}


def _by_label(items: set, label: str, pos: int) -> set:
    return {x for x in items if x[pos] == label}


def evaluate(
    system: Iterable[Annotation],
    gold: Iterable[Annotation],
    labels: Iterable[str] | None = None,
    pattern_system: Iterable[Annotation] | None = None,
) -> EvalReport:
    sys_ids = {a.identity for a in system}
    gold_ids = {a.identity for a in gold}
    if labels is None:
        labels = sorted({x[3] for x in sys_ids | gold_ids})
    labels = list(labels)
    sys_tok, gold_tok = _tokens(sys_ids), _tokens(gold_ids)
    pat_tok = _tokens({a.identity for a in pattern_system}) if pattern_system is not None else None
    entity, token, boundary = {}, {}, {}
    pattern_token = {} if pat_tok is not None else None
    for label in labels:
        s, g = _by_label(sys_ids, label, 3), _by_label(gold_ids, label, 3)
        entity[label] = entity_counts(s, g)
        boundary[label] = sum(
            1
            for doc, a, b, _ in s - g
            if any(d == doc and a < e and st < b for d, st, e, _ in g - s)
        )
        token[label] = entity_counts(_by_label(sys_tok, label, 2), _by_label(gold_tok, label, 2))
        if pat_tok is not None:
            pattern_token[label] = entity_counts(_by_label(pat_tok, label, 2), _by_label(gold_tok, label, 2))
    return EvalReport(labels, entity, token, pattern_token, boundary)


def compare_to_reference(
    report: EvalReport, reference: dict[str, float] = REFERENCE_F1, tolerance: float = REFERENCE_TOLERANCE
) -> list[tuple[str, float, float, float, bool]]:
    """(label, ours, reference, delta, flagged) for every reference label."""
    rows = []
    for label, ref in reference.items():
        ours = report.entity.get(label, Counts()).f1
        delta = ours - ref
        rows.append((label, ours, ref, delta, abs(delta) > tolerance))
    return rows
