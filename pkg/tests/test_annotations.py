import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from annotalign.annotations import (
    DEFAULT_POLICY,
    END,
    START,
    TARGET,
    Annotation,
    AnnotationGrid,
    Document,
    ElementKey,
    KeyPolicy,
    build_grid,
    derive_keys,
    make_document,
)


def sued_acme():
    tokens = [("The", "DT"), ("man", "NN"), ("sued", "VBD"), ("Acme", "NNP"), ("Company", "NNP")]
    anns = [
        (0, 2, "Chunk", {"category": "NP"}),
        (2, 5, "Chunk", {"category": "VP"}),
        (3, 5, "Chunk", {"category": "NP"}),
        (3, 5, "Organization"),
    ]
    return make_document("d", tokens, anns)


def lengths_of(grid, i):
    return {(e.key, e.length) for e in grid.starts[i]}


def test_overlapping_layout():
    grid = build_grid(sued_acme())
    assert grid.length == 5
    s0 = lengths_of(grid, 0)
    assert (ElementKey("token", "string", "the"), 1) in s0
    assert (ElementKey("token", "category", "dt"), 1) in s0
    assert (ElementKey("chunk", "category", "np"), 2) in s0
    s3 = lengths_of(grid, 3)
    assert {
        (ElementKey("token", "string", "acme"), 1),
        (ElementKey("token", "category", "nnp"), 1),
        (ElementKey("chunk", "category", "np"), 2),
        (ElementKey("organization"), 2),
    } <= s3
    assert (ElementKey("chunk", "category", "vp"), 3) in lengths_of(grid, 2)


def test_atoms_only_grid():
    doc = make_document("d", ["a", "b", "c"])
    grid = build_grid(doc)
    for i, elems in enumerate(grid.starts):
        assert elems and all(e.atom and e.length == 1 for e in elems)
        assert {e.key.value for e in elems} == {["a", "b", "c"][i]}


def test_derive_keys_examples():
    tok = Annotation("d", 0, 1, "Token", {"root": "healed", "string": "healed", "category": "vbd"})
    assert derive_keys(tok) == {
        ElementKey("token", "root", "healed"),
        ElementKey("token", "string", "healed"),
        ElementKey("token", "category", "vbd"),
    }
    assert derive_keys(Annotation("d", 0, 1, "Number", {"value": "3"})) == {ElementKey("number")}
    assert derive_keys(Annotation("d", 0, 1, "Foo", {"x": "y"})) == {ElementKey("foo")}


def test_values_are_lowercased():
    ann = Annotation("d", 0, 1, "Lookup", {"majorType": "Person_First"})
    assert derive_keys(ann) == {ElementKey("lookup", "majortype", "person_first")}


def test_label_types_emit_bare_key_only():
    policy = DEFAULT_POLICY.with_labels(["PER"])
    ann = Annotation("d", 0, 1, "PER", {"rule": "x"})
    assert derive_keys(ann, policy) == {ElementKey("per")}


def test_missing_feature_falls_back_to_bare():
    assert derive_keys(Annotation("d", 0, 1, "Lookup")) == {ElementKey("lookup")}


def test_key_value_needs_feature():
    with pytest.raises(ValueError):
        ElementKey("token", "", "x")


def test_annotation_invariants():
    with pytest.raises(ValueError):
        Annotation("d", 2, 2, "X")
    with pytest.raises(ValueError):
        Annotation("d", 0, 1, "")
    with pytest.raises(ValueError):
        Annotation("d", 0, 1, "X", {"": "v"})


def test_document_invariants():
    doc = make_document("d", ["a", "b"])
    with pytest.raises(ValueError):
        Document("d", doc.atoms, (Annotation("d", 1, 3, "X"),))
    with pytest.raises(ValueError):
        Document("d", doc.atoms, (), ((0, 1),))
    with pytest.raises(ValueError):
        Document("d", doc.atoms[1:])


def test_range_and_straddlers():
    doc = make_document("d", ["a", "b", "c", "d"], [(1, 3, "X"), (2, 3, "Y")], [(0, 2), (2, 4)])
    grid = build_grid(doc, (2, 4))
    assert grid.dropped == 1
    assert grid.length == 2
    assert (ElementKey("y"), 1) in lengths_of(grid, 0)
    assert all(e.key != ElementKey("x") for e in grid.elements())
    with pytest.raises(IndexError):
        build_grid(doc, (3, 6))


def test_boundaries_and_target():
    doc = make_document("d", ["a", "b", "c", "d"], [(1, 2, "PER")], [(0, 2), (2, 4)])
    target = doc.annotations[0]
    grid = build_grid(doc, (0, 2), boundaries=True, target=target)
    assert (grid.lead, grid.trail, grid.length) == (1, 1, 4)
    assert START in {e.key for e in grid.starts[0]}
    assert END in {e.key for e in grid.starts[3]}
    assert (TARGET, 1) in lengths_of(grid, 2)
    assert grid.doc_index(2) == 1 and grid.grid_index(1) == 2
    # a range inside a sentence gets no virtual atoms
    inner = build_grid(doc, (1, 2), boundaries=True)
    assert (inner.lead, inner.trail) == (0, 1)
    doc3 = make_document("e", ["a", "b", "c"])
    assert build_grid(doc3, (1, 2), boundaries=True).length == 1


def random_document(rng: random.Random, n_atoms: int, n_anns: int) -> Document:
    tokens = [(rng.choice("abc"), rng.choice(["NN", "VB"])) for _ in range(n_atoms)]
    anns = []
    for k in range(n_anns):
        s = rng.randrange(n_atoms)
        e = rng.randint(s + 1, min(n_atoms, s + 3))
        kind = rng.choice(["Lookup", "Chunk", "Misc"])
        feats = {"majorType": f"m{k}"} if kind == "Lookup" else {"category": f"c{k}"}
        anns.append((s, e, f"{kind}" if kind != "Misc" else f"Misc{k}", feats))
    return make_document("r", tokens, anns)


def expected_pairs(doc: Document, rng, policy=DEFAULT_POLICY):
    """Brute force: every (annotation, key) inside the range, re-indexed."""
    lo, hi = rng
    out = set()
    for ann in doc.atoms + doc.annotations:
        if lo <= ann.start and ann.end <= hi:
            for key in derive_keys(ann, policy):
                out.add((ann.start - lo, ann.end - ann.start, key))
    return out


@pytest.mark.parametrize("seed", range(30))
def test_grid_matches_enumeration(seed):
    rng = random.Random(seed)
    doc = random_document(rng, rng.randint(1, 8), rng.randint(0, 6))
    lo = rng.randrange(len(doc))
    hi = rng.randint(lo + 1, len(doc))
    grid = build_grid(doc, (lo, hi))
    flat = {(e.start, e.length, e.key) for e in grid.elements()}
    assert flat == expected_pairs(doc, (lo, hi))
    # every annotation here has distinct keys, so counting works too
    inside = [a for a in doc.annotations if lo <= a.start and a.end <= hi]
    atoms = doc.atoms[lo:hi]
    assert len(grid.elements()) == sum(len(derive_keys(a)) for a in list(atoms) + inside)
    straddling = [a for a in doc.annotations if a.start < hi and a.end > lo and not (lo <= a.start and a.end <= hi)]
    assert grid.dropped == len(straddling)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_atom_identity_and_determinism(seed):
    rng = random.Random(seed)
    doc = random_document(rng, rng.randint(1, 7), rng.randint(0, 5))
    grid = build_grid(doc)
    assert sum(1 for e in grid.elements() if e.atom and e.key.feature == "string") == grid.length
    for elems in grid.starts:
        assert any(e.atom and e.length == 1 for e in elems)
    assert build_grid(doc) == grid


def test_custom_policy():
    policy = KeyPolicy({"token": ("category",)})
    doc = make_document("d", [("Dogs", "NNS")])
    assert {e.key for e in build_grid(doc, policy=policy).elements()} == {ElementKey("token", "category", "nns")}


def test_grid_rejects_bad_elements():
    grid = AnnotationGrid.from_elements(2, [(0, 2, ElementKey("x"))])
    assert grid.length == 2
    with pytest.raises(ValueError):
        AnnotationGrid(1, (frozenset(),))


def test_subgrid_reindexes():
    grid = build_grid(sued_acme())
    sub = grid.subgrid(3, 5)
    assert sub.length == 2 and sub.origin == 3
    assert (ElementKey("organization"), 2) in lengths_of(sub, 0)
    assert all(e.end <= 2 for e in sub.elements())
