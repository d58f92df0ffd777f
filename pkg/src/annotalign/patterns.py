"""Context patterns, target patterns and the pairs that apply them."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from annotalign.annotations import BOUNDARY_KEYS, TARGET, ElementKey
from annotalign.serialize import Pattern, parse_pattern, serialize_pattern

PatternElement = tuple[ElementKey, ...]


def canonical(elements) -> Pattern:
    """Sort sub-elements so equal patterns serialize identically."""
    return tuple(tuple(sorted(set(e))) for e in elements)


@dataclass(frozen=True)
class ContextPattern:
    lc: Pattern
    rc: Pattern
    label: str

    def __post_init__(self) -> None:
        if not self.lc and not self.rc:
            raise ValueError("a context pattern needs a left or a right context")
        for el in self.lc + self.rc:
            if not el:
                raise ValueError("pattern elements must be non-empty")
            if TARGET in el:
                raise ValueError(":target cannot appear inside a context")

    def __str__(self) -> str:
        return serialize_pattern(self.lc + ((TARGET,),) + self.rc)

    def __len__(self) -> int:
        return len(self.lc) + len(self.rc)

    @property
    def lexical(self) -> bool:
        """False when the context holds nothing but sentence boundaries."""
        return any(set(el) - BOUNDARY_KEYS for el in self.lc + self.rc)

    @classmethod
    def parse(cls, text: str, label: str) -> ContextPattern:
        elements = parse_pattern(text)
        slots = [n for n, el in enumerate(elements) if el == (TARGET,)]
        if len(slots) != 1:
            raise ValueError(f"context pattern needs exactly one ':target' element: {text!r}")
        n = slots[0]
        return cls(elements[:n], elements[n + 1 :], label)


@dataclass(frozen=True)
class TargetPattern:
    elements: Pattern
    label: str

    def __post_init__(self) -> None:
        if not self.elements or not all(self.elements):
            raise ValueError("a target pattern needs at least one non-empty element")

    def __str__(self) -> str:
        return serialize_pattern(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    @classmethod
    def parse(cls, text: str, label: str) -> TargetPattern:
        return cls(parse_pattern(text), label)


@dataclass(frozen=True)
class PairStats:
    applications: int = 0
    true_positives: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.true_positives <= self.applications:
            raise ValueError("need 0 <= true_positives <= applications")

    @property
    def precision(self) -> float | None:
        if not self.applications:
            return None
        return self.true_positives / self.applications


Footprint = frozenset[tuple[str, int, int, str]]


@dataclass(frozen=True)
class PatternTargetPair:
    context: ContextPattern
    target: TargetPattern
    stats: PairStats | None = field(default=None, compare=False)
    footprint: Footprint | None = field(default=None, compare=False, repr=False)
    count: int | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.context.label != self.target.label:
            raise ValueError("context and target patterns must share a label")

    @property
    def label(self) -> str:
        return self.context.label

    @property
    def pair_id(self) -> str:
        text = f"{self.context}\t{self.target}\t{self.label}"
        return hashlib.sha1(text.encode("utf-8")).hexdigest()[:12]

    def __str__(self) -> str:
        return f"{self.context}  =>  {self.target}  [{self.label}]"
