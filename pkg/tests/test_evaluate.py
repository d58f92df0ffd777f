import random

import pytest

from annotalign.annotations import Annotation
from annotalign.evaluate import REFERENCE_F1, Counts, EvalReport, compare_to_reference, evaluate
from oracles import brute_force_counts


def ents(*specs, doc="d"):
    return [Annotation(doc, s, e, label) for s, e, label in specs]


def test_boundary_error_counts_twice():
    report = evaluate(ents((2, 5, "ORG")), ents((2, 4, "ORG")), ["ORG"])
    c = report.entity["ORG"]
    assert (c.tp, c.fp, c.fn) == (0, 1, 1)
    assert report.boundary_errors["ORG"] == 1
    t = report.token["ORG"]
    assert (t.tp, t.fp, t.fn) == (2, 1, 0)


def test_identical_sets():
    gold = ents((0, 1, "PER"), (3, 5, "LOC"))
    report = evaluate(gold, gold)
    for label in ("PER", "LOC"):
        c = report.entity[label]
        assert c.precision == c.recall == c.f1 == 1.0


def test_empty_counts_are_zero():
    c = Counts()
    assert c.precision == c.recall == c.f1 == 0.0


def test_wrong_label_is_fp_and_fn():
    report = evaluate(ents((0, 2, "ORG")), ents((0, 2, "PER")), ["PER", "ORG"])
    assert report.entity["ORG"].fp == 1 and report.entity["PER"].fn == 1


@pytest.mark.parametrize("seed", range(200))
def test_matches_brute_force(seed):
    rng = random.Random(seed)
    labels = ["PER", "ORG"]

    def draw(n):
        out = set()
        for _ in range(n):
            doc = rng.choice("ab")
            s = rng.randrange(10)
            out.add((doc, s, s + rng.randint(1, 3), rng.choice(labels)))
        return out

    gold, system = draw(rng.randint(0, 25)), draw(rng.randint(0, 25))
    report = evaluate(
        [Annotation(*x) for x in system], [Annotation(*x) for x in gold], labels
    )
    total = sum((report.entity[label] for label in labels), Counts())
    assert (total.tp, total.fp, total.fn) == brute_force_counts(system, gold)
    for label in labels:
        c = report.entity[label]
        expect = brute_force_counts({x for x in system if x[3] == label}, {x for x in gold if x[3] == label})
        assert (c.tp, c.fp, c.fn) == expect
        p, r = c.precision, c.recall
        assert c.f1 == (pytest.approx(2 * p * r / (p + r)) if p + r else 0.0)


def test_table_and_records():
    report = evaluate(ents((0, 1, "PER")), ents((0, 1, "PER"), (4, 5, "PER")), ["PER"], pattern_system=[])
    table = report.table()
    assert "PER Prec" in table and table.splitlines()[1].startswith("Entity")
    assert "Patterns, Token" in table
    records = report.records()
    assert records[0] == "entity\tPER\t1\t0\t1\t1.000000\t0.500000\t0.666667"
    assert records[-1].startswith("patterns-token\tPER\t0\t0\t2\t")


def test_reference_comparison():
    report = EvalReport(
        ["PER", "ORG", "LOC"],
        {"PER": Counts(914, 86, 86), "ORG": Counts(1, 1, 1), "LOC": Counts(87, 13, 13)},
        {},
    )
    rows = {label: (ours, flagged) for label, ours, _, _, flagged in compare_to_reference(report)}
    assert rows["PER"][0] == pytest.approx(0.914) and not rows["PER"][1]
    assert rows["ORG"][1]
    assert not rows["LOC"][1]
    assert set(REFERENCE_F1) == {"PER", "ORG", "LOC"}
