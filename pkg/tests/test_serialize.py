import pytest
from hypothesis import given
from hypothesis import strategies as st

from annotalign.annotations import TARGET, ElementKey
from annotalign.corpus import PatternFileRecord
from annotalign.patterns import ContextPattern, TargetPattern
from annotalign.serialize import PatternSyntaxError, parse_pattern, serialize_pattern
from tables import TABLES, all_pattern_strings

labels = st.text(alphabet=st.sampled_from("ab:!| \\-(),.éZ9"), min_size=1, max_size=6)


@st.composite
def keys(draw):
    typ = draw(labels)
    feature = draw(st.one_of(st.just(""), labels))
    value = draw(labels) if feature and draw(st.booleans()) else ""
    return ElementKey(typ, feature, value)


patterns = st.lists(st.lists(keys(), min_size=1, max_size=4).map(tuple), max_size=6).map(tuple)


@given(patterns)
def test_round_trip(pattern):
    text = serialize_pattern(pattern)
    assert parse_pattern(text) == pattern
    assert serialize_pattern(parse_pattern(text)) == text


@pytest.mark.parametrize("text", all_pattern_strings())
def test_reference_patterns_round_trip(text):
    assert serialize_pattern(parse_pattern(text)) == text


@pytest.mark.parametrize("label", sorted(TABLES))
def test_reference_rows_as_records(label):
    for ctx, tgt, count in TABLES[label]:
        record = PatternFileRecord(ctx, tgt, label, count)
        line = record.to_line()
        assert PatternFileRecord.from_line(line) == record
        assert str(TargetPattern.parse(tgt, label)) == tgt
        if parse_pattern(ctx).count((TARGET,)) == 1:
            assert str(ContextPattern.parse(ctx, label)) == ctx
            assert record.to_pair().count == count


def test_person_first_context():
    p = ContextPattern.parse(":lookup|majortype|person_first :target", "PER")
    assert p.lc == ((ElementKey("lookup", "majortype", "person_first"),),)
    assert p.rc == ()


def test_top_organization_context():
    p = ContextPattern.parse(":start :target :number :number :token|category|cd!:number", "ORG")
    assert p.lc == ((ElementKey("start"),),)
    assert len(p.rc) == 3
    assert p.rc[2] == (ElementKey("token", "category", "cd"), ElementKey("number"))


def test_escapes():
    key = ElementKey("token", "string", "a b!c|d\\")
    text = serialize_pattern(((key,),))
    assert text == ":token|string|a\\ b\\!c\\|d\\\\"
    assert parse_pattern(text) == ((key,),)


@pytest.mark.parametrize(
    "text, position",
    [
        (":a  :b", 3),
        (":a !:b", 3),
        (":a! :b", 3),
        (":a :b ", 6),
        ("a", 0),
        (":a||b", 3),
        (":a\\", 2),
        (":a|b|c|d", 7),
    ],
)
def test_syntax_errors_carry_position(text, position):
    with pytest.raises(PatternSyntaxError) as err:
        parse_pattern(text)
    assert err.value.position == position


def test_empty_pattern():
    assert parse_pattern("") == ()
    assert serialize_pattern(()) == ""


def test_context_pattern_rules():
    with pytest.raises(ValueError):
        ContextPattern((), (), "PER")
    with pytest.raises(ValueError):
        ContextPattern.parse(":a :b", "PER")
    with pytest.raises(ValueError):
        ContextPattern.parse(":target :a :target", "PER")
    assert not ContextPattern.parse(":start :target", "PER").lexical
    with pytest.raises(ValueError):
        TargetPattern((), "PER")
