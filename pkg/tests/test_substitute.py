import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import synth
from dstdoctor.corpus import Corpus, dumps_corpus
from dstdoctor.substitute import (
    Pool,
    ReplacementMap,
    SubstitutionError,
    apply_replacements,
    build_replacement_map,
    leakage_audit,
    load_lexicon,
    mention_coverage,
)

from synth import guest_house_dialog, lexicon, train_corpus


def test_pinned_pool_forces_mapping():
    lex = lexicon({("hotel", "name"): Pool(("best western of long beach",))})
    rmap = build_replacement_map(guest_house_dialog(), train_corpus(), lex, seed=1)
    assert rmap.for_dialog("PMUL4547.json")[("hotel", "name", "bridge guest house")] == "best western of long beach"
    new = apply_replacements(guest_house_dialog(), rmap)
    d = new.dialogs[0]
    assert d.turns[0].user_utterance == "Can you tell me about Best Western Of Long Beach?"
    assert d.turns[1].user_utterance == "Please book best western of long beach for monday."
    assert d.turns[1].value_of("hotel", "name") == "best western of long beach"


def test_closed_class_and_non_entity_slots_untouched():
    rmap = build_replacement_map(guest_house_dialog(), train_corpus(), lexicon(), seed=1)
    keys = {(d, s) for d, s, _ in rmap.for_dialog("PMUL4547.json")}
    assert keys == {("hotel", "name")}
    with_numeric = build_replacement_map(guest_house_dialog(), train_corpus(), lexicon(), seed=1, allow_non_entities=True)
    assert ("hotel", "bookday", "monday") in with_numeric.for_dialog("PMUL4547.json")


def test_map_is_deterministic():
    a = build_replacement_map(guest_house_dialog(), train_corpus(), lexicon(), seed=5)
    b = build_replacement_map(guest_house_dialog(), train_corpus(), lexicon(), seed=5)
    assert a == b
    assert ReplacementMap.from_json(a.to_json()) == a


def test_replacements_unseen_in_training():
    lex = lexicon({("hotel", "name"): Pool(("bridge guest house", "seaside inn"))})
    rmap = build_replacement_map(guest_house_dialog(), train_corpus(), lex, seed=0)
    assert rmap.for_dialog("PMUL4547.json")[("hotel", "name", "bridge guest house")] == "seaside inn"


def test_pool_exhausted_names_slot():
    lex = lexicon({("hotel", "name"): Pool(("bridge guest house",))})
    with pytest.raises(SubstitutionError, match="hotel.name"):
        build_replacement_map(guest_house_dialog(), train_corpus(), lex, seed=0)


def test_unmapped_dialog_unchanged():
    other = Corpus("test", (synth.dialog("X", ["train"], [("a train to ely", "", ["train.destination=ely"])]),))
    rmap = build_replacement_map(other, train_corpus(), lexicon(), seed=0)
    assert apply_replacements(other, rmap) == other


def test_repeated_mention_same_replacement():
    rmap = build_replacement_map(guest_house_dialog(), train_corpus(), lexicon(), seed=9)
    (new_name,) = set(rmap.for_dialog("PMUL4547.json").values())
    d = apply_replacements(guest_house_dialog(), rmap).dialogs[0]
    text = " ".join(t.user_utterance + " " + t.system_response for t in d.turns).lower()
    assert text.count(new_name) == 3
    assert "bridge guest house" not in text


def test_shared_value_gets_one_replacement():
    test = Corpus(
        "test",
        (
            synth.dialog(
                "X",
                ["hotel", "taxi"],
                [("book bridge guest house and a taxi there", "", ["hotel.name=bridge guest house", "taxi.destination=bridge guest house"])],
            ),
        ),
    )
    rmap = build_replacement_map(test, train_corpus(), lexicon(), seed=2)
    m = rmap.for_dialog("X")
    assert m[("hotel", "name", "bridge guest house")] == m[("taxi", "destination", "bridge guest house")]


def test_longest_original_first():
    test = Corpus(
        "test",
        (
            synth.dialog(
                "X",
                ["hotel"],
                [("the acorn guest house in the centre", "", ["hotel.name=acorn guest house", "hotel.area=centre"])],
            ),
        ),
    )
    rmap = ReplacementMap(0, {"X": {("hotel", "name", "acorn guest house"): "seaside inn", ("hotel", "area", "centre"): "harbour"}})
    new = apply_replacements(test, rmap)
    assert new.dialogs[0].turns[0].user_utterance == "the seaside inn in the harbour"


def test_ambiguous_overlap_is_an_error():
    test = Corpus("test", (synth.dialog("X", ["hotel"], [("red blue green", "", ["hotel.name=red blue", "hotel.area=blue green"])]),))
    rmap = ReplacementMap(0, {"X": {("hotel", "name", "red blue"): "aa bb", ("hotel", "area", "blue green"): "cc dd"}})
    with pytest.raises(SubstitutionError, match="X"):
        apply_replacements(test, rmap)


def test_leakage_audit():
    rmap = build_replacement_map(guest_house_dialog(), train_corpus(), lexicon(), seed=0)
    new = apply_replacements(guest_house_dialog(), rmap)
    assert leakage_audit(new, train_corpus(), lexicon()) == []
    # closed-class internet=yes is in training, but excluded
    assert leakage_audit(new, train_corpus()) == []
    leaked = leakage_audit(guest_house_dialog(), train_corpus(), lexicon())
    assert [str(t) for t in leaked] == ["hotel.name=bridge guest house"]


def test_load_lexicon(tmp_path):
    path = tmp_path / "lex.jsonl"
    path.write_text(
        '{"slot": "hotel.name", "replaceable": true, "values": ["Best Western of Long Beach"], "provenance": "sgd"}\n'
        '{"slot": "hotel.internet", "replaceable": false, "values": []}\n'
    )
    lex = load_lexicon(path)
    assert lex.pools[("hotel", "name")].values == ("best western of long beach",)
    assert not lex.is_replaceable(("hotel", "internet"))


# ------------------------------------------------------------------ properties

NAMES = synth.HOTEL_NAMES[:3]


@st.composite
def substitution_corpora(draw):
    dialogs = []
    for i in range(draw(st.integers(1, 3))):
        n = draw(st.integers(1, 3))
        turns, state = [], {}
        for t in range(n):
            name = draw(st.sampled_from(NAMES))
            area = draw(st.sampled_from(synth.AREAS))
            style = draw(st.sampled_from([str.lower, str.title, str.upper]))
            user = style(f"is {name} in the {area}?")
            system = draw(st.sampled_from([f"{name} is nice.", "sure.", f"yes, {name}!"])) if t < n - 1 else ""
            if draw(st.booleans()):
                state[("hotel", "name")] = name
            if draw(st.booleans()):
                state[("hotel", "area")] = area
            turns.append((user, system, [f"{d}.{s}={v}" for (d, s), v in state.items()]))
        dialogs.append(synth.dialog(f"D{i}", ["hotel"], turns))
    return Corpus("test", tuple(dialogs))


@settings(max_examples=80, deadline=None)
@given(substitution_corpora(), st.integers(0, 2**16))
def test_substitution_properties(corpus, seed):
    lex = lexicon()
    train = Corpus("train", (synth.dialog("T", ["hotel"], [("x", "", [f"hotel.name={NAMES[0]}", "hotel.area=north"])]),))
    rmap = build_replacement_map(corpus, train, lex, seed)
    new = apply_replacements(corpus, rmap)
    assert leakage_audit(new, train, lex) == []
    assert mention_coverage(corpus, new, rmap) == []
    assert dumps_corpus(apply_replacements(corpus, build_replacement_map(corpus, train, lex, seed))) == dumps_corpus(new)
    # structure preserved
    assert [len(d.turns) for d in new] == [len(d.turns) for d in corpus]
    # inverse restores the original
    assert apply_replacements(new, rmap.inverse()) == corpus
