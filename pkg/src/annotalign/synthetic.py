"""Small synthetic corpora for tests, demos and the acceptance suite.

``sports_corpus`` imitates newswire sports reports (tennis results with
countries in parentheses, football and basketball score lines, standings,
datelines and a little prose) with gold PER/ORG/LOC entities plus the
gazetteer, number and date annotations an external tagger would supply.
``chain_corpus`` is a three-stage dependency chain for fixpoint tests.

Run ``python -m annotalign.synthetic DIR`` to (re)write the bundled files.
"""

from __future__ import annotations

import random
import re
import sys
from pathlib import Path

from annotalign.annotations import ATOM_TYPE, Annotation, Document
from annotalign.corpus import CHUNK_TYPE, format_record, write_conll
from annotalign.patterns import ContextPattern, PatternTargetPair, TargetPattern
from annotalign.serialize import parse_pattern

FIRST = ["Pete", "Boris", "Andre", "Michael", "Steffi", "Monica", "Martina", "Goran", "Thomas",
         "Carlos", "Marcelo", "Jim", "Richard", "Yevgeny", "Jana", "Lindsay", "Petr", "Wayne"]
LAST = ["Sampras", "Becker", "Agassi", "Chang", "Graf", "Seles", "Hingis", "Ivanisevic", "Muster",
        "Moya", "Rios", "Courier", "Krajicek", "Kafelnikov", "Novotna", "Davenport", "Korda",
        "Ferreira"]
# first names the gazetteer does not know
UNLISTED_FIRST = {"Yevgeny", "Petr", "Goran"}
COUNTRIES = ["Germany", "France", "U.S.", "Spain", "Italy", "Russia", "Croatia", "Austria",
             "Sweden", "Netherlands", "Chile", "Brazil", "Australia", "Switzerland",
             "Czech Republic", "South Africa"]
CITIES = ["Paris", "London", "Rome", "Berlin", "Melbourne", "Hamburg", "Milan", "Toronto",
          "Stockholm", "Vienna"]
SOCCER = ["Ajax", "PSV", "Feyenoord", "Juventus", "Lazio", "Inter", "Bayern Munich",
          "Werder Bremen", "Real Madrid", "Barcelona", "Celtic", "Rangers"]
BASKETBALL = ["Boston Celtics", "New York Knicks", "Chicago Bulls", "Utah Jazz",
              "Los Angeles Lakers", "Orlando Magic", "Miami Heat", "Houston Rockets"]
LISTED_ORGS = {"Ajax", "Juventus", "Bayern Munich", "Real Madrid", "Barcelona",
               "Chicago Bulls", "Los Angeles Lakers", "Celtic"}
EXTRA_LOCATIONS = ["Boston", "New York", "Los Angeles", "Chicago", "Madrid", "Munich", "Miami",
                   "Houston", "Orlando", "Bremen"]
JOBS = ["coach", "captain", "manager", "president"]
DAYS = ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"]

CLOSED = {"(": "(", ")": ")", ",": ",", ".": ".", "-": ":", ":": ":", "the": "DT", "of": "IN",
          "in": "IN", "on": "IN", "to": "TO", "for": "IN", "at": "IN", "beat": "VBD",
          "said": "VBD", "arrived": "VBD", "will": "MD", "play": "VB", "travel": "VB",
          "next": "JJ", "week": "NN", "his": "PRP$", "her": "PRP$", "team": "NN", "won": "VBD",
          "title": "NN", "after": "IN", "final": "JJ", "match": "NN", "scored": "VBD",
          "twice": "RB", "was": "VBD", "held": "VBN", "tournament": "NN", "results": "NNS",
          "standings": "NNS", "played": "VBN", "P": "NN", "W": "NN", "L": "NN", "Pts": "NN"}
NP_TAGS = {"NNP", "NNPS", "NN", "NNS", "DT", "CD", "JJ", "PRP$"}


def _pos(token: str) -> str:
    if token in CLOSED:
        return CLOSED[token]
    if token.lower() in JOBS:
        return "NN"
    if re.fullmatch(r"[\d\-]+", token) and any(c.isdigit() for c in token):
        return "CD"
    return "NNP"


class _Builder:
    """Accumulates one document's tokens, sentences and gold entities."""

    def __init__(self, doc_id: str):
        self.doc_id = doc_id
        self.tokens: list[str] = []
        self.sentences: list[tuple[int, int]] = []
        self.entities: list[tuple[int, int, str]] = []
        self._parts: list = []

    def sentence(self, *parts) -> None:
        """Parts are plain strings (split on spaces) or (text, label) entity tuples."""
        start = len(self.tokens)
        for part in parts:
            if isinstance(part, tuple):
                text, label = part
                s = len(self.tokens)
                self.tokens.extend(text.split())
                self.entities.append((s, len(self.tokens), label))
            else:
                self.tokens.extend(part.split())
        self.sentences.append((start, len(self.tokens)))

    def build(self, gazetteer: dict[tuple[str, ...], str]) -> Document:
        doc_id = self.doc_id
        atoms = []
        cats = [_pos(t) for t in self.tokens]
        for i, tok in enumerate(self.tokens):
            feats = {"string": tok, "root": tok.lower(), "category": cats[i]}
            atoms.append(Annotation(doc_id, i, i + 1, ATOM_TYPE, feats))
        anns = [Annotation(doc_id, s, e, label) for s, e, label in self.entities]
        for s, e in self.sentences:
            i = s
            while i < e:
                if cats[i] in NP_TAGS:
                    j = i
                    while j < e and cats[j] in NP_TAGS:
                        j += 1
                    anns.append(Annotation(doc_id, i, j, CHUNK_TYPE, {"category": "NP"}))
                    i = j
                else:
                    if cats[i].startswith("V") or cats[i] in ("MD", "TO"):
                        anns.append(Annotation(doc_id, i, i + 1, CHUNK_TYPE, {"category": "VP"}))
                    elif cats[i] == "IN":
                        anns.append(Annotation(doc_id, i, i + 1, CHUNK_TYPE, {"category": "PP"}))
                    i += 1
            for i in range(s, e):
                for n in (2, 1):
                    key = tuple(self.tokens[i : i + n])
                    if i + n <= e and key in gazetteer:
                        anns.append(Annotation(doc_id, i, i + n, "Lookup", {"majorType": gazetteer[key]}))
                tok = self.tokens[i]
                if tok.isdigit():
                    anns.append(Annotation(doc_id, i, i + 1, "Number", {"value": tok}))
                if tok in DAYS:
                    anns.append(Annotation(doc_id, i, i + 1, "Date", {"normalized": tok.lower()}))
                if re.fullmatch(r"\d{4}-\d\d-\d\d", tok):
                    anns.append(Annotation(doc_id, i, i + 1, "Date", {"normalized": tok}))
        return Document(doc_id, tuple(atoms), tuple(anns), tuple(self.sentences))


def gazetteer() -> dict[tuple[str, ...], str]:
    gaz: dict[tuple[str, ...], str] = {}
    for name in FIRST:
        if name not in UNLISTED_FIRST:
            gaz[(name,)] = "person_first"
    for name in COUNTRIES + CITIES + EXTRA_LOCATIONS:
        gaz[tuple(name.split())] = "location"
    for name in LISTED_ORGS:
        gaz[tuple(name.split())] = "organization"
    for job in JOBS:
        gaz[(job,)] = "jobtitle"
    return gaz


class _Writer:
    def __init__(self, rng: random.Random):
        self.rng = rng

    def person(self, full: float = 0.8) -> tuple[str, str]:
        r = self.rng
        name = f"{r.choice(FIRST)} {r.choice(LAST)}" if r.random() < full else r.choice(LAST)
        return (name, "PER")

    def country(self) -> tuple[str, str]:
        return (self.rng.choice(COUNTRIES), "LOC")

    def city(self) -> tuple[str, str]:
        return (self.rng.choice(CITIES), "LOC")

    def set_score(self) -> str:
        r = self.rng
        win = r.choice(["6-3", "6-4", "6-2", "7-5", "6-1", "7-6"])
        lose = r.choice(["3-6", "4-6", "6-7", "2-6"])
        return " ".join(r.sample([win, win, lose], r.choice([2, 3])))

    def dateline(self, b: _Builder) -> None:
        b.sentence(self.city(), f"1996-08-{self.rng.randint(10, 31)}")

    def tennis(self, b: _Builder) -> None:
        r = self.rng
        b.sentence("results of the tournament in", self.city(), "on", r.choice(DAYS), ":")
        for _ in range(r.randint(3, 5)):
            b.sentence(self.person(), "(", self.country(), ") beat", self.person(), "(",
                       self.country(), ")", self.set_score())
        if r.random() < 0.6:
            b.sentence(self.person(), "won the title after the final in", self.city(), ".")

    def soccer(self, b: _Builder) -> None:
        r = self.rng
        b.sentence("results of the matches played on", r.choice(DAYS), ":")
        teams = r.sample(SOCCER, 8)
        for k in range(0, r.choice([4, 6, 8]), 2):
            b.sentence((teams[k], "ORG"), str(r.randint(0, 4)), (teams[k + 1], "ORG"), str(r.randint(0, 4)))
        b.sentence("standings : P W L Pts")
        for team in r.sample(SOCCER, r.randint(3, 5)):
            b.sentence((team, "ORG"), *(str(r.randint(0, 30)) for _ in range(4)))
        if r.random() < 0.7:
            b.sentence((r.choice(SOCCER), "ORG"), r.choice(JOBS), self.person(), "said the team will travel to",
                       self.country(), "next week .")

    def basketball(self, b: _Builder) -> None:
        r = self.rng
        b.sentence("results of games played on", r.choice(DAYS), ":")
        teams = r.sample(BASKETBALL, 6)
        for k in range(0, r.choice([4, 6]), 2):
            b.sentence((teams[k], "ORG"), str(r.randint(85, 120)), (teams[k + 1], "ORG"), str(r.randint(80, 115)))
        if r.random() < 0.7:
            b.sentence(self.person(), "scored twice for", (r.choice(BASKETBALL), "ORG"), "in",
                       (r.choice(EXTRA_LOCATIONS), "LOC"), ".")

    def prose(self, b: _Builder) -> None:
        r = self.rng
        b.sentence(self.person(), ", the", r.choice(JOBS), "of", (r.choice(SOCCER), "ORG"), ", said in",
                   self.city(), "on", r.choice(DAYS), ".")
        if r.random() < 0.5:
            b.sentence("the tournament was held in", self.city(), ".")

    def cup(self, b: _Builder) -> None:
        """Club sides in the person-result layout: the classic trap for person patterns."""
        r = self.rng
        home, away = r.sample(SOCCER, 2)
        b.sentence((home, "ORG"), "(", self.country(), ") beat", (away, "ORG"), "(", self.country(), ")",
                   f"{r.randint(1, 4)}-{r.randint(0, 1)}")

    def davis(self, b: _Builder) -> None:
        r = self.rng
        b.sentence("results of the team event :")
        for _ in range(r.randint(2, 4)):
            b.sentence(self.country(), str(r.randint(0, 5)), "-", str(r.randint(0, 5)))


def sports_corpus(n_docs: int = 30, seed: int = 7, prefix: str = "sports") -> list[Document]:
    """A deterministic mini-corpus of sports reports with gold entities."""
    rng = random.Random(seed)
    writer = _Writer(rng)
    gaz = gazetteer()
    kinds = ["tennis", "soccer", "basketball", "davis"]
    docs = []
    for k in range(n_docs):
        b = _Builder(f"{prefix}:{k}")
        writer.dateline(b)
        getattr(writer, kinds[k % len(kinds)])(b)
        if rng.random() < 0.5:
            writer.prose(b)
        if k % 7 == 3:
            writer.cup(b)
        docs.append(b.build(gaz))
    return docs


def split_sports(n_docs: int = 30, seed: int = 7, n_test: int = 10):
    """Train and held-out documents named as the bundled CoNLL files name them."""
    train = sports_corpus(n_docs - n_test, seed, "sports_train")
    test = sports_corpus(n_test, seed + 1, "sports_test")
    return train, test


def _extra_records(docs: list[Document]) -> list[str]:
    keep = {"Lookup", "Number", "Date"}
    return [format_record(a) for d in docs for a in d.annotations if a.type in keep]


def write_bundle(directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    train, test = split_sports()
    labels = ["PER", "ORG", "LOC"]
    write_conll(train, directory / "sports_train.conll", labels)
    write_conll(test, directory / "sports_test.conll", labels)
    (directory / "sports_lookups.tsv").write_text("\n".join(_extra_records(train + test)) + "\n")


def chain_corpus() -> tuple[list[Document], list[PatternTargetPair]]:
    """Three interdependent pairs: A follows 'alpha', B follows an A, C follows a B."""
    sentences = [
        "alpha apple bread cheese",
        "delta apple bread cheese",
        "alpha pear",
        "we bought alpha kiwi lime mango today",
    ]
    docs = []
    for k, text in enumerate(sentences):
        b = _Builder(f"chain:{k}")
        b.sentence(text)
        doc = b.build({})
        atoms = tuple(
            Annotation(a.document_id, a.start, a.end, a.type, {**a.feats, "category": "NN"})
            for a in doc.atoms
        )
        docs.append(Document(doc.document_id, atoms, (), doc.sentences))
    noun = parse_pattern(":token|category|nn")
    pairs = []
    for label, lc in (("A", ":token|string|alpha"), ("B", ":a"), ("C", ":b")):
        pairs.append(
            PatternTargetPair(ContextPattern(parse_pattern(lc), (), label), TargetPattern(noun, label))
        )
    return docs, pairs


if __name__ == "__main__":  # pragma: no cover
    write_bundle(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parent / "data")
