import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from annotalign.annotations import make_document
from annotalign.patterns import ContextPattern, PairStats, PatternTargetPair, TargetPattern
from annotalign.pipeline import apply, system_annotations
from annotalign.refine import (
    PriorTable,
    apply_priors,
    build_priors,
    filter_subsumed,
    footprints,
    label_high_priors,
    propagate_person_labels,
    refine,
    remove_low_priors,
    score_pairs,
)
from annotalign.evaluate import evaluate


def pair(ctx, tgt=":token|category|nnp", label="PER", **kw):
    return PatternTargetPair(ContextPattern.parse(ctx, label), TargetPattern.parse(tgt, label), **kw)


def coach_docs():
    """Four 'coach X' sentences, three of them with a gold person."""
    names = ["Smith", "Jones", "Brown", "Ajax"]
    docs = []
    for k, name in enumerate(names):
        anns = [(1, 2, "PER")] if name != "Ajax" else [(1, 2, "ORG")]
        docs.append(make_document(f"d{k}", [("coach", "NN"), (name, "NNP")], anns))
    return docs


def test_precision_by_count():
    scored = score_pairs([pair(":token|string|coach :target")], coach_docs(), ["PER", "ORG"])
    (p,) = scored
    assert (p.stats.applications, p.stats.true_positives) == (4, 3)
    assert p.stats.precision == 0.75
    assert p.count == 4 and len(p.footprint) == 4


def test_unevaluable_pair():
    (p,) = score_pairs([pair(":token|string|referee :target")], coach_docs(), ["PER"])
    assert p.stats.applications == 0 and p.stats.precision is None
    assert refine([p], 0.0, 0) == []


def test_scoring_ignores_gold_in_contexts():
    # a context that needs the gold label itself must not see it while scored
    (p,) = score_pairs([pair(":per :target", ":token|category|nn")], coach_docs(), ["PER"])
    assert p.stats.applications == 0


def stats_pair(n, tp, ctx=":a :target"):
    return pair(ctx, stats=PairStats(n, tp))


def test_refine_defaults():
    kept = refine([stats_pair(25, 24, ":a :target"), stats_pair(50, 47, ":b :target"), stats_pair(2, 2, ":c :target")])
    assert [str(p.context) for p in kept] == [":a :target"]


def test_stats_invariants():
    with pytest.raises(ValueError):
        PairStats(1, 2)
    with pytest.raises(ValueError):
        refine([], threshold=1.5)


@settings(max_examples=100)
@given(st.lists(st.tuples(st.integers(0, 30), st.integers(0, 30)), min_size=1, max_size=20))
def test_refine_monotone_in_threshold(raw):
    pairs = [stats_pair(max(a, b), min(a, b), f":k{i} :target") for i, (a, b) in enumerate(raw)]
    sizes = [len(refine(pairs, t / 20, 0)) for t in range(10, 21)]
    assert sizes == sorted(sizes, reverse=True)


def fp(*hits):
    return frozenset(("d", h, h + 1, "PER") for h in hits)


def test_subsumed_pair_removed():
    short = pair(":a :target", footprint=fp(1, 2, 3))
    long = pair(":b :a :target", footprint=fp(1, 2))
    unique = pair(":c :b :a :target", footprint=fp(9))
    kept = filter_subsumed([long, short, unique])
    assert kept == [short, unique]


def test_equal_length_pairs_do_not_cover_each_other():
    a = pair(":a :target", footprint=fp(1))
    b = pair(":b :target", footprint=fp(1))
    assert filter_subsumed([a, b]) == [a, b]


def test_filter_needs_footprints():
    with pytest.raises(ValueError):
        filter_subsumed([pair(":a :target")])


@settings(max_examples=200)
@given(st.lists(st.tuples(st.integers(1, 4), st.sets(st.integers(0, 8), max_size=4)), max_size=12))
def test_filter_preserves_union(layout):
    pairs = []
    for k, (n, hits) in enumerate(layout):
        ctx = " ".join(f":k{k}x{i}" for i in range(n)) + " :target"
        pairs.append(pair(ctx, footprint=fp(*hits)))
    kept = filter_subsumed(pairs)
    union = set().union(*(p.footprint for p in pairs)) if pairs else set()
    assert set().union(*(p.footprint for p in kept)) == union if kept else not union
    # every removed pair is covered by strictly shorter kept pairs
    for p in pairs:
        if p not in kept:
            shorter = set().union(*(q.footprint for q in kept if len(q.context) < len(p.context)))
            assert p.footprint <= shorter


def test_filter_preserves_rerun_extractions():
    docs = coach_docs()
    pairs = [pair(":token|string|coach :target"), pair(":start :token|string|coach :target")]
    scored = score_pairs(pairs, docs, ["PER", "ORG"])
    kept = filter_subsumed(scored)
    assert len(kept) == 1
    before = set().union(*footprints(pairs, docs).values())
    after = set().union(*footprints(kept, docs).values())
    assert before == after


def prior_docs():
    docs = []
    for k in range(20):
        tokens = ["Smith", "met", "Paris" if k else "Smith"]
        anns = [(0, 1, "PER")] + ([(2, 3, "LOC")] if k else [])
        if k == 1:
            anns = [(2, 3, "LOC")]  # one unlabeled Smith: prior 19/20 = 0.95
        docs.append(make_document(f"t{k}", tokens, anns))
    return docs


def test_prior_table():
    table = build_priors(prior_docs(), ["PER", "LOC"])
    assert table.prior("smith", "PER") == pytest.approx(19 / 21)
    assert table.prior("paris", "LOC") == 1.0
    assert table.prior("met", "PER") == 0.0
    assert table.prior("nowhere", "PER") is None
    assert table.labels_for("paris") == {"LOC": 1.0}


def test_high_prior_labels_everywhere():
    table = build_priors(prior_docs(), ["PER", "LOC"])
    test = make_document("x", ["Smith", "and", "Unknown"])
    (out,), added = label_high_priors([test], table, ["PER", "LOC"])
    assert [a.identity for a in added] == [("x", 0, 1, "PER")]
    assert [a.identity for a in out.annotations] == [("x", 0, 1, "PER")]


def test_low_priors_only_remove_emitted():
    table = build_priors(prior_docs(), ["PER", "LOC"])
    doc = make_document("x", ["met", "Smith", "Unknown"], [(0, 1, "PER"), (1, 2, "PER")])
    emitted = [a for a in doc.annotations if a.start == 0]
    gold_like = make_document("x", ["met"], [(0, 1, "PER")])
    (out,), removed = remove_low_priors([doc], emitted, table)
    assert [a.identity for a in removed] == [("x", 0, 1, "PER")]
    assert [a.identity for a in out.annotations] == [("x", 1, 2, "PER")]
    (kept,), _ = remove_low_priors([gold_like], [], table)
    assert kept == gold_like


def test_unseen_tokens_untouched():
    table = build_priors(prior_docs(), ["PER"])
    doc = make_document("x", ["Zed"], [(0, 1, "PER")])
    assert apply_priors([doc], table, ["PER"], emitted=doc.annotations) == [doc]


def test_apply_priors_checks_thresholds():
    with pytest.raises(ValueError):
        apply_priors([], PriorTable(), ["PER"], hi=0.1, lo=0.9)


@pytest.mark.parametrize("seed", range(10))
def test_apply_priors_never_removes_gold(seed):
    rng = random.Random(seed)
    docs = prior_docs()
    table = build_priors(docs, ["PER", "LOC"])
    doc = rng.choice(docs)
    out = apply_priors([doc], table, ["PER", "LOC"], emitted=())
    assert set(doc.annotations) <= set(out[0].annotations)


def test_person_propagation():
    tokens = [("Smith", "NNP"), ("won", "VBD"), (".", "."), ("later", "RB"), ("Smith", "NNP"), ("Smith", "VB")]
    doc = make_document("d", tokens, [(0, 1, "PER")], [(0, 3), (3, 6)])
    out = propagate_person_labels(doc)
    assert sorted(a.extent for a in out.of_type("PER")) == [(0, 1), (4, 5)]
    assert propagate_person_labels(out) == out


def test_propagation_without_persons():
    doc = make_document("d", [("Smith", "NNP")])
    assert propagate_person_labels(doc) is doc


@settings(max_examples=50)
@given(st.lists(st.sampled_from(["Ann", "Bob", "met", "ann"]), min_size=1, max_size=8), st.data())
def test_propagation_idempotent(words, data):
    i = data.draw(st.integers(0, len(words) - 1))
    doc = make_document("d", [(w, "NNP" if w[0].isupper() else "NN") for w in words], [(i, i + 1, "PER")])
    once = propagate_person_labels(doc)
    assert propagate_person_labels(once) == once


def test_priors_add_recall(sports):
    labels = ("PER", "ORG", "LOC")
    _, test_docs, model = sports
    gold = system_annotations(test_docs, labels)
    full = system_annotations(apply(model, test_docs).documents, labels)
    patterns = system_annotations(apply(model, test_docs, use_priors=False).documents, labels)
    report = evaluate(full, gold, labels, patterns)
    tp = lambda rows: sum(rows[label].tp for label in labels)
    assert tp(report.token) > tp(report.pattern_token)
    for label in labels:
        assert report.token[label].recall >= report.pattern_token[label].recall
        assert abs(report.token[label].precision - report.pattern_token[label].precision) <= 0.1
