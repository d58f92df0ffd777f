"""Annotations, documents and two-dimensional annotation grids.

All coordinates are atom indices: the designated atomic annotation type
(``Token`` by default) tiles a document with length-1 units and every other
annotation is measured in those units.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace
from functools import cached_property

logger = logging.getLogger(__name__)

ATOM_TYPE = "Token"
SENTENCE_TYPE = "Sentence"


@dataclass(frozen=True, order=True)
class ElementKey:
    """The unit of matching: ``:type|feature|value`` with optional parts."""

    type: str
    feature: str = ""
    value: str = ""

    def __post_init__(self) -> None:
        if not self.type:
            raise ValueError("element key type cannot be empty")
        if self.value and not self.feature:
            raise ValueError(f"key with value {self.value!r} needs a feature")

    def __str__(self) -> str:
        from annotalign.serialize import serialize_key

        return serialize_key(self)


TARGET = ElementKey("target")
START = ElementKey("start")
END = ElementKey("end")
BOUNDARY_KEYS = frozenset({START, END})


@dataclass(frozen=True)
class Annotation:
    document_id: str
    start: int
    end: int
    type: str
    features: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        feats = self.features
        if isinstance(feats, Mapping):
            feats = feats.items()
        feats = tuple(sorted((str(k), str(v)) for k, v in feats))
        object.__setattr__(self, "features", feats)
        if not 0 <= self.start < self.end:
            raise ValueError(f"bad extent [{self.start}, {self.end}) for {self.type}")
        if not self.type:
            raise ValueError("annotation type cannot be empty")
        if any(not k for k, _ in feats):
            raise ValueError("feature names cannot be empty")

    @property
    def feats(self) -> dict[str, str]:
        return dict(self.features)

    def get(self, name: str, default: str | None = None) -> str | None:
        for k, v in self.features:
            if k == name:
                return v
        return default

    @property
    def extent(self) -> tuple[int, int]:
        return (self.start, self.end)

    @property
    def identity(self) -> tuple[str, int, int, str]:
        """What deduplication and evaluation compare: (doc, start, end, type)."""
        return (self.document_id, self.start, self.end, self.type)

    def __len__(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class Document:
    """A tokenized document: atoms, higher annotations and sentence ranges."""

    document_id: str
    atoms: tuple[Annotation, ...]
    annotations: tuple[Annotation, ...] = ()
    sentences: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "annotations", tuple(self.annotations))
        sentences = tuple(tuple(s) for s in self.sentences)
        if not sentences and self.atoms:
            sentences = ((0, len(self.atoms)),)
        object.__setattr__(self, "sentences", sentences)
        for i, atom in enumerate(self.atoms):
            if (atom.start, atom.end) != (i, i + 1):
                raise ValueError(f"{self.document_id}: atom {i} has extent {atom.extent}")
        n = len(self.atoms)
        for ann in self.annotations:
            if ann.end > n:
                raise ValueError(
                    f"{self.document_id}: {ann.type} [{ann.start}, {ann.end}) beyond {n} atoms"
                )
        pos = 0
        for s, e in sentences:
            if s != pos or e <= s:
                raise ValueError(f"{self.document_id}: sentences do not partition the atoms")
            pos = e
        if pos != n:
            raise ValueError(f"{self.document_id}: sentences do not partition the atoms")

    def __len__(self) -> int:
        return len(self.atoms)

    def sentence_of(self, start: int, end: int) -> tuple[int, int] | None:
        """The sentence wholly containing [start, end), if any."""
        for s, e in self.sentences:
            if s <= start and end <= e:
                return (s, e)
        return None

    def of_type(self, *types: str) -> list[Annotation]:
        return [a for a in self.annotations if a.type in types]

    def with_annotations(self, extra: Iterable[Annotation]) -> Document:
        seen = {a.identity + (a.features,) for a in self.annotations}
        added = []
        for ann in extra:
            sig = ann.identity + (ann.features,)
            if sig not in seen:
                seen.add(sig)
                added.append(ann)
        if not added:
            return self
        return replace(self, annotations=self.annotations + tuple(added))

    def without_types(self, types: Iterable[str]) -> Document:
        drop = set(types)
        kept = tuple(a for a in self.annotations if a.type not in drop)
        if len(kept) == len(self.annotations):
            return self
        return replace(self, annotations=kept)

    def strings(self) -> list[str]:
        return [a.get("string", "") or "" for a in self.atoms]


def make_document(
    document_id: str,
    tokens: list[str] | list[tuple[str, str]],
    annotations: Iterable[tuple] = (),
    sentences: Iterable[tuple[int, int]] = (),
) -> Document:
    """Convenience constructor: tokens are strings or (string, category) pairs.

    ``annotations`` holds ``(start, end, type)`` or ``(start, end, type, features)``.
    """
    atoms = []
    for i, tok in enumerate(tokens):
        if isinstance(tok, tuple):
            string, category = tok
            feats = {"string": string, "root": string.lower(), "category": category}
        else:
            feats = {"string": tok, "root": tok.lower()}
        atoms.append(Annotation(document_id, i, i + 1, ATOM_TYPE, feats))
    anns = []
    for item in annotations:
        start, end, typ, *rest = item
        anns.append(Annotation(document_id, start, end, typ, rest[0] if rest else ()))
    return Document(document_id, tuple(atoms), tuple(anns), tuple(sentences))


@dataclass(frozen=True)
class KeyPolicy:
    """Which features of which annotation types become matchable keys.

    ``features`` maps a lowercased type to the feature names that produce
    ``type|feature|value`` keys; types in ``bare`` also emit ``:type``; types in
    ``bare_only`` (extraction labels) emit nothing but ``:type``.  Unknown
    types fall back to the bare key.
    """

    features: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    bare: frozenset[str] = frozenset()
    bare_only: frozenset[str] = frozenset()

    def with_labels(self, labels: Iterable[str]) -> KeyPolicy:
        return replace(self, bare_only=self.bare_only | {lab.lower() for lab in labels})

    def derive(self, ann: Annotation) -> frozenset[ElementKey]:
        return derive_keys(ann, self)


DEFAULT_POLICY = KeyPolicy(
    features={
        "token": ("root", "string", "category"),
        "date": ("normalized",),
        "lookup": ("majortype",),
        "chunk": ("category",),
    },
    bare=frozenset({"number"}),
)


def derive_keys(ann: Annotation, policy: KeyPolicy = DEFAULT_POLICY) -> frozenset[ElementKey]:
    typ = ann.type.lower()
    if typ in policy.bare_only:
        return frozenset({ElementKey(typ)})
    wanted = policy.features.get(typ, ())
    keys = set()
    if wanted:
        lowered = {k.lower(): v for k, v in ann.features}
        for feat in wanted:
            value = lowered.get(feat.lower())
            # empty values cannot be told apart from a missing value in the pattern syntax
            if value:
                keys.add(ElementKey(typ, feat.lower(), value.lower()))
    if typ in policy.bare or not keys:
        keys.add(ElementKey(typ))
    return frozenset(keys)


@dataclass(frozen=True, order=True)
class GridElement:
    start: int
    length: int
    key: ElementKey
    atom: bool = False

    @property
    def end(self) -> int:
        return self.start + self.length


@dataclass(frozen=True)
class AnnotationGrid:
    """Per-position sets of (possibly overlapping, multi-atom) keyed elements.

    ``lead`` is 1 when a virtual ``:start`` atom occupies index 0; grid index
    ``i`` maps to document atom ``origin + i - lead``.
    """

    length: int
    starts: tuple[frozenset[GridElement], ...]
    document_id: str = ""
    origin: int = 0
    lead: int = 0
    trail: int = 0
    dropped: int = 0

    def __post_init__(self) -> None:
        if len(self.starts) != self.length:
            raise ValueError("starts must have one entry per atom position")
        for i, elems in enumerate(self.starts):
            if not any(e.atom and e.length == 1 for e in elems):
                raise ValueError(f"position {i} has no atom element")
            for e in elems:
                if e.start != i or e.length < 1 or e.end > self.length:
                    raise ValueError(f"element {e} does not fit at position {i}")

    @classmethod
    def from_sequence(cls, symbols: Iterable[object], feature: str = "string") -> AnnotationGrid:
        """A plain one-dimensional grid: one single-keyed atom per symbol."""
        starts = tuple(
            frozenset({GridElement(i, 1, ElementKey("token", feature, str(s).lower()), True)})
            for i, s in enumerate(symbols)
        )
        return cls(len(starts), starts)

    @classmethod
    def from_elements(
        cls, length: int, elements: Iterable[tuple[int, int, ElementKey]], atom_key=None
    ) -> AnnotationGrid:
        """Build from raw (start, length, key) triples; atoms get ``atom_key``."""
        buckets: list[set[GridElement]] = [set() for _ in range(length)]
        for i in range(length):
            key = atom_key(i) if atom_key else ElementKey("atom")
            buckets[i].add(GridElement(i, 1, key, True))
        for start, n, key in elements:
            buckets[start].add(GridElement(start, n, key))
        return cls(length, tuple(frozenset(b) for b in buckets))

    @cached_property
    def groups(self) -> tuple[tuple[tuple[int, frozenset[ElementKey]], ...], ...]:
        """Per position: (length, keys) groups sorted by length."""
        out = []
        for elems in self.starts:
            by_len: dict[int, set[ElementKey]] = {}
            for e in elems:
                by_len.setdefault(e.length, set()).add(e.key)
            out.append(tuple((n, frozenset(ks)) for n, ks in sorted(by_len.items())))
        return tuple(out)

    @cached_property
    def keyed_lengths(self) -> tuple[dict[ElementKey, frozenset[int]], ...]:
        """Per position: key -> lengths of elements with that key."""
        out = []
        for elems in self.starts:
            table: dict[ElementKey, set[int]] = {}
            for e in elems:
                table.setdefault(e.key, set()).add(e.length)
            out.append({k: frozenset(v) for k, v in table.items()})
        return tuple(out)

    @cached_property
    def signature(self) -> tuple:
        return tuple(tuple(sorted((e.length, e.key) for e in elems)) for elems in self.starts)

    @property
    def real_range(self) -> tuple[int, int]:
        """Grid indices of the real (non-virtual) atoms."""
        return (self.lead, self.length - self.trail)

    def doc_index(self, i: int) -> int:
        return self.origin + i - self.lead

    def grid_index(self, atom: int) -> int:
        return atom - self.origin + self.lead

    def elements(self) -> list[GridElement]:
        return sorted(e for elems in self.starts for e in elems)

    def subgrid(self, start: int, end: int) -> AnnotationGrid:
        """Elements wholly inside [start, end), re-indexed to 0."""
        buckets = []
        for i in range(start, end):
            buckets.append(
                frozenset(
                    GridElement(e.start - start, e.length, e.key, e.atom)
                    for e in self.starts[i]
                    if e.end <= end
                )
            )
        return AnnotationGrid(
            end - start,
            tuple(buckets),
            self.document_id,
            origin=self.doc_index(start),
        )


def build_grid(
    document: Document,
    rng: tuple[int, int] | None = None,
    policy: KeyPolicy = DEFAULT_POLICY,
    *,
    boundaries: bool = False,
    target: Annotation | None = None,
    exclude_types: Iterable[str] = (),
) -> AnnotationGrid:
    """Lay the annotations inside ``rng`` out as a grid re-indexed to 0.

    With ``boundaries``, virtual ``:start``/``:end`` atoms are added when the
    range begins or ends a sentence.  ``target`` is keyed as ``:target``
    instead of by its own keys.  Annotations straddling the range are dropped
    and counted in ``grid.dropped``.
    """
    n = len(document)
    start, end = rng if rng is not None else (0, n)
    if not 0 <= start <= end <= n:
        raise IndexError(f"range [{start}, {end}) outside document of {n} atoms")
    sentence_starts = {s for s, _ in document.sentences}
    sentence_ends = {e for _, e in document.sentences}
    lead = 1 if boundaries and start in sentence_starts else 0
    trail = 1 if boundaries and end in sentence_ends and end > start else 0
    length = (end - start) + lead + trail
    buckets: list[set[GridElement]] = [set() for _ in range(length)]

    for atom in document.atoms[start:end]:
        i = atom.start - start + lead
        for key in derive_keys(atom, policy):
            buckets[i].add(GridElement(i, 1, key, True))

    dropped = 0
    skip = {t for t in exclude_types}
    for ann in document.annotations:
        if ann.type in skip and ann != target:
            continue
        if ann.end <= start or ann.start >= end:
            continue
        if ann.start < start or ann.end > end:
            dropped += 1
            continue
        i = ann.start - start + lead
        keys = {TARGET} if ann == target else derive_keys(ann, policy)
        for key in keys:
            buckets[i].add(GridElement(i, len(ann), key))
    if lead:
        buckets[0].add(GridElement(0, 1, START, True))
    if trail:
        buckets[-1].add(GridElement(length - 1, 1, END, True))
    if dropped:
        logger.debug("%s: dropped %d straddling annotations", document.document_id, dropped)
    return AnnotationGrid(
        length,
        tuple(frozenset(b) for b in buckets),
        document.document_id,
        origin=start,
        lead=lead,
        trail=trail,
        dropped=dropped,
    )
