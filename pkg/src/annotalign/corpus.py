"""Reading and writing corpora, annotation records and pattern files."""

from __future__ import annotations

import logging
import os
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, replace
from pathlib import Path

from annotalign.annotations import ATOM_TYPE, SENTENCE_TYPE, Annotation, Document
from annotalign.patterns import (
    ContextPattern,
    PairStats,
    PatternTargetPair,
    TargetPattern,
)
from annotalign.refine import PriorTable

logger = logging.getLogger(__name__)

CHUNK_TYPE = "Chunk"
DOCSTART = "-DOCSTART-"


class CorpusError(ValueError):
    pass


def _lines(source) -> Iterable[str]:
    """Lines of a file path, or of any iterable of lines."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            yield from fh
    else:
        yield from source


def _runs(tags: Sequence[str], sentence_end: Sequence[bool]) -> tuple[list, int]:
    """(start, end, label) runs from IOB tags; I- after a different label opens a run."""
    runs = []
    lenient = 0
    open_label, open_start = None, 0
    for i, tag in enumerate(tags):
        prefix, _, label = tag.partition("-")
        if tag == "O" or not label:
            if open_label is not None:
                runs.append((open_start, i, open_label))
            open_label = None
        elif prefix == "B" or label != open_label:
            if prefix == "I":
                lenient += 1
            if open_label is not None:
                runs.append((open_start, i, open_label))
            open_label, open_start = label, i
        if sentence_end[i] and open_label is not None:
            runs.append((open_start, i + 1, open_label))
            open_label = None
    return runs, lenient


def _build_conll_doc(doc_id: str, rows: list[tuple], sentences: list[tuple[int, int]]) -> Document:
    atoms = []
    for i, (token, root, pos, _, _) in enumerate(rows):
        feats = {"string": token, "root": root, "category": pos}
        atoms.append(Annotation(doc_id, i, i + 1, ATOM_TYPE, feats))
    ends = [False] * len(rows)
    for _, e in sentences:
        ends[e - 1] = True
    anns = []
    chunks, _ = _runs([r[3] for r in rows], ends)
    for s, e, cat in chunks:
        anns.append(Annotation(doc_id, s, e, CHUNK_TYPE, {"category": cat}))
    entities, lenient = _runs([r[4] for r in rows], ends)
    if lenient:
        logger.debug("%s: %d I- tags opened a new entity", doc_id, lenient)
    for s, e, label in entities:
        anns.append(Annotation(doc_id, s, e, label))
    return Document(doc_id, tuple(atoms), tuple(anns), tuple(sentences))


def read_conll(source, prefix: str | None = None) -> list[Document]:
    """CoNLL-2003 columns: token [lemma] POS chunk NER; blank lines end sentences.

    Documents are named ``<prefix>:<n>``, the prefix defaulting to the file stem.
    """
    if prefix is None:
        prefix = Path(source).stem if isinstance(source, (str, os.PathLike)) else "doc"
    docs: list[Document] = []
    rows: list[tuple] = []
    sentences: list[tuple[int, int]] = []
    sent_start = 0
    started = False

    def close_sentence() -> None:
        nonlocal sent_start
        if len(rows) > sent_start:
            sentences.append((sent_start, len(rows)))
        sent_start = len(rows)

    def close_doc() -> None:
        nonlocal rows, sentences, sent_start
        close_sentence()
        docs.append(_build_conll_doc(f"{prefix}:{len(docs)}", rows, sentences))
        rows, sentences, sent_start = [], [], 0

    for lineno, raw in enumerate(_lines(source), 1):
        line = raw.strip()
        if line.startswith(DOCSTART):
            if started or rows:
                close_doc()
            started = True
            continue
        if not line:
            close_sentence()
            continue
        cols = line.split()
        if len(cols) == 4:
            token, pos, chunk, ner = cols
            root = token.lower()
        elif len(cols) == 5:
            token, root, pos, chunk, ner = cols
        else:
            raise CorpusError(f"line {lineno}: expected 4 or 5 columns, got {len(cols)}: {line!r}")
        rows.append((token, root, pos, chunk, ner))
    if started or rows:
        close_doc()
    return docs


def _iob(doc: Document, types: Iterable[str], default: str = "O") -> list[str]:
    tags = [default] * len(doc)
    spans = sorted((a for a in doc.annotations if a.type in set(types)), key=lambda a: a.extent)
    prev_end, prev_label = None, None
    for a in spans:
        label = a.get("category") if a.type == CHUNK_TYPE else a.type
        for i in range(a.start, a.end):
            tags[i] = f"I-{label}"
        if prev_end == a.start and prev_label == label:
            tags[a.start] = f"B-{label}"
        prev_end, prev_label = a.end, label
    return tags


def write_conll(docs: Iterable[Document], path, labels: Iterable[str]) -> None:
    labels = list(labels)
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(f"{DOCSTART} -X- -X- O\n\n")
            ner = _iob(doc, labels)
            chunks = _iob(doc, [CHUNK_TYPE])
            for s, e in doc.sentences:
                for i in range(s, e):
                    atom = doc.atoms[i]
                    fh.write(f"{atom.get('string')} {atom.get('category') or '-X-'} {chunks[i]} {ner[i]}\n")
                fh.write("\n")


def _esc(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def _unesc(text: str) -> str:
    out, i = [], 0
    while i < len(text):
        c = text[i]
        if c == "\\" and i + 1 < len(text):
            out.append({"t": "\t", "n": "\n"}.get(text[i + 1], text[i + 1]))
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def _esc_name(name: str) -> str:
    return _esc(name).replace("=", "\\=")


def format_record(ann: Annotation) -> str:
    fields = [_esc(ann.document_id), str(ann.start), str(ann.end), _esc(ann.type)]
    fields += [_esc_name(k) + "=" + _esc(v) for k, v in ann.features]
    return "\t".join(fields)


def _split_feature(text: str) -> tuple[str, str] | None:
    i = 0
    while i < len(text):
        if text[i] == "\\":
            i += 2
            continue
        if text[i] == "=":
            return text[:i], text[i + 1 :]
        i += 1
    return None


def parse_record(line: str, lineno: int = 0) -> Annotation:
    fields = line.rstrip("\n").split("\t")
    if len(fields) < 4:
        raise CorpusError(f"line {lineno}: annotation record needs doc, start, end, type")
    doc_id, start, end, typ, *feats = fields
    features = {}
    for f in feats:
        split = _split_feature(f)
        if split is None:
            raise CorpusError(f"line {lineno}: feature {f!r} is not name=value")
        name, value = split
        features[_unesc(name)] = _unesc(value)
    try:
        return Annotation(_unesc(doc_id), int(start), int(end), _unesc(typ), features)
    except ValueError as exc:
        raise CorpusError(f"line {lineno}: {exc}") from exc


def read_annotations(source) -> list[Annotation]:
    out = []
    for lineno, line in enumerate(_lines(source), 1):
        if line.strip() and not line.startswith("#"):
            out.append(parse_record(line, lineno))
    return out


def documents_from_annotations(anns: Iterable[Annotation], atom_type: str = ATOM_TYPE) -> list[Document]:
    """Rebuild documents: atoms from ``atom_type``, sentences from ``Sentence``."""
    grouped: dict[str, list[Annotation]] = {}
    for a in anns:
        grouped.setdefault(a.document_id, []).append(a)
    docs = []
    for doc_id, items in grouped.items():
        atoms = sorted((a for a in items if a.type == atom_type), key=lambda a: a.start)
        sentences = sorted(a.extent for a in items if a.type == SENTENCE_TYPE)
        rest = [a for a in items if a.type not in (atom_type, SENTENCE_TYPE)]
        try:
            docs.append(Document(doc_id, tuple(atoms), tuple(rest), tuple(sentences)))
        except ValueError as exc:
            raise CorpusError(str(exc)) from exc
    return docs


def read_records(source, atom_type: str = ATOM_TYPE) -> list[Document]:
    return documents_from_annotations(read_annotations(source), atom_type)


def document_records(doc: Document) -> list[Annotation]:
    sentences = [Annotation(doc.document_id, s, e, SENTENCE_TYPE) for s, e in doc.sentences]
    return list(doc.atoms) + sentences + sorted(doc.annotations, key=lambda a: (a.start, a.end, a.type))


def write_records(docs: Iterable[Document], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            for ann in document_records(doc):
                fh.write(format_record(ann) + "\n")


def attach_annotations(docs: Sequence[Document], anns: Iterable[Annotation]) -> list[Document]:
    """Add externally produced annotations (e.g. gazetteer lookups) to documents."""
    grouped: dict[str, list[Annotation]] = {}
    for a in anns:
        grouped.setdefault(a.document_id, []).append(a)
    known = {d.document_id for d in docs}
    missing = set(grouped) - known
    if missing:
        logger.info("annotations for %d unknown documents ignored", len(missing))
    return [d.with_annotations(grouped.get(d.document_id, ())) for d in docs]


def read_corpus(path, fmt: str = "auto", annotations: Iterable = ()) -> list[Document]:
    """Load CoNLL or record files, then attach extra annotation files."""
    if fmt == "auto":
        fmt = "records" if str(path).endswith((".tsv", ".ann")) else "conll"
    if fmt == "conll":
        docs = read_conll(path)
    elif fmt == "records":
        docs = read_records(path)
    else:
        raise CorpusError(f"unknown corpus format {fmt!r}")
    for extra in annotations:
        docs = attach_annotations(docs, read_annotations(extra))
    return docs


@dataclass(frozen=True)
class PatternFileRecord:
    context: str
    target: str
    label: str
    count: int | None = None

    def to_line(self) -> str:
        fields = [self.context, self.target, self.label]
        if self.count is not None:
            fields.append(str(self.count))
        return "\t".join(fields)

    @classmethod
    def from_line(cls, line: str, lineno: int = 0) -> PatternFileRecord:
        fields = line.rstrip("\n").split("\t")
        if len(fields) not in (3, 4):
            raise CorpusError(f"line {lineno}: pattern record needs 3 or 4 tab-separated fields")
        count = None
        if len(fields) == 4:
            try:
                count = int(fields[3])
            except ValueError:
                raise CorpusError(f"line {lineno}: count {fields[3]!r} is not an integer") from None
        return cls(fields[0], fields[1], fields[2], count)

    def to_pair(self) -> PatternTargetPair:
        return PatternTargetPair(
            ContextPattern.parse(self.context, self.label),
            TargetPattern.parse(self.target, self.label),
            count=self.count,
        )

    @classmethod
    def from_pair(cls, pair: PatternTargetPair) -> PatternFileRecord:
        return cls(str(pair.context), str(pair.target), pair.label, pair.count)


def write_patterns(pairs: Iterable[PatternTargetPair], path, stats_path=None) -> None:
    pairs = list(pairs)
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(PatternFileRecord.from_pair(pair).to_line() + "\n")
    if stats_path is not None:
        with open(stats_path, "w", encoding="utf-8") as fh:
            for pair in pairs:
                s = pair.stats or PairStats()
                precision = "" if s.precision is None else f"{s.precision:.6f}"
                fh.write(f"{pair.pair_id}\t{s.applications}\t{s.true_positives}\t{precision}\n")


def read_patterns(path, stats_path=None) -> list[PatternTargetPair]:
    pairs = []
    for lineno, line in enumerate(_lines(path), 1):
        if line.strip() and not line.startswith("#"):
            try:
                pairs.append(PatternFileRecord.from_line(line, lineno).to_pair())
            except ValueError as exc:
                raise CorpusError(f"{path}:{lineno}: {exc}") from exc
    if stats_path is not None:
        stats = {}
        for lineno, line in enumerate(_lines(stats_path), 1):
            if not line.strip():
                continue
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 4:
                raise CorpusError(f"{stats_path}:{lineno}: stats record needs 4 fields")
            stats[fields[0]] = PairStats(int(fields[1]), int(fields[2]))
        pairs = [replace(p, stats=stats.get(p.pair_id)) for p in pairs]
    return pairs


def write_priors(table: PriorTable, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for tok, total in sorted(table.totals.items()):
            fh.write(f"{_esc(tok)}\t\t0\t{total}\n")
        for tok, label, n, total in table.rows():
            fh.write(f"{_esc(tok)}\t{label}\t{n}\t{total}\n")


def read_priors(path) -> PriorTable:
    table = PriorTable()
    for lineno, line in enumerate(_lines(path), 1):
        fields = line.rstrip("\n").split("\t")
        if len(fields) != 4:
            raise CorpusError(f"{path}:{lineno}: prior record needs 4 fields")
        tok, label, n, total = _unesc(fields[0]), fields[1], int(fields[2]), int(fields[3])
        table.totals[tok] = total
        if label:
            table.labeled[(tok, label)] = n
    return table
