import shutil

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import synth
from conftest import FIXTURES
from dstdoctor.corpus import (
    Corpus,
    CorpusError,
    Dialog,
    DialogTurn,
    SlotTriple,
    dumps_corpus,
    load_corpus,
    load_database,
    load_ontology,
    load_predictions,
    write_corpus,
    write_ontology,
    write_predictions,
)


def test_load_two_dialogs_sorted():
    corpus = load_corpus(FIXTURES / "two_dialogs.jsonl")
    assert corpus.split == "test"
    assert [d.id for d in corpus] == ["MUL0001.json", "PMUL0002.json"]
    # values are normalized, utterances are kept raw
    last = corpus.get("PMUL0002.json").turns[1]
    assert SlotTriple("hotel", "area", "north") in last.belief_state
    assert corpus.get("MUL0001.json").turns[0].system_response == "Byard Art is a museum."


def test_duplicate_id_rejected():
    with pytest.raises(CorpusError, match="MUL0001.json"):
        load_corpus(FIXTURES / "duplicate_ids.jsonl")


def test_parse_error_has_position(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"id": "a", "domains": [], "turns": []}\n{"id": "b", "turns": [}\n')
    with pytest.raises(CorpusError, match=r"bad.jsonl:2:\d+"):
        load_corpus(bad)


def test_invariant_error_names_dialog_and_turn(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"id": "X1", "domains": ["hotel"], "turns": [{"user": "u", "system": "s", "state": ["taxi.leaveat=10:00"]}]}\n')
    with pytest.raises(CorpusError, match="X1 turn 0"):
        load_corpus(bad)


def test_single_value_default_and_multi_value_flag(tmp_path):
    path = tmp_path / "mv.jsonl"
    path.write_text('{"id": "X1", "domains": ["hotel"], "turns": [{"user": "u", "system": "", "state": ["hotel.name=a", "hotel.name=b"]}]}\n')
    with pytest.raises(CorpusError, match="several values"):
        load_corpus(path)
    corpus = load_corpus(path, multi_value=True)
    assert len(corpus.dialogs[0].turns[0].belief_state) == 2


def test_empty_system_response_only_on_last_turn():
    with pytest.raises(CorpusError, match="empty system response"):
        Dialog("X", frozenset(), (DialogTurn(0, "hi", ""), DialogTurn(1, "bye", "")))


def test_turn_indices_consecutive():
    with pytest.raises(CorpusError, match="expected 0"):
        Dialog("X", frozenset(), (DialogTurn(1, "hi", ""),))


def test_multiwoz22_adapter_flattens_state():
    corpus = load_corpus(FIXTURES / "multiwoz22_sample.json", "multiwoz22")
    (dialog,) = corpus.dialogs
    # hand-flattened from the fixture; first listed value wins in single-value mode
    expected = [
        {"hotel.area=north"},
        {"hotel.area=north", "hotel.pricerange=moderate", "hotel.parking=yes"},
        {"hotel.area=north", "hotel.pricerange=moderate", "hotel.parking=yes"},
    ]
    assert [{str(t) for t in turn.belief_state} for turn in dialog.turns] == expected
    assert [t.system_response for t in dialog.turns] == ["Any price range?", "Acorn Guest House fits.", ""]
    assert dialog.active_domains == {"hotel"}


def test_multiwoz22_directory(tmp_path):
    shutil.copy(FIXTURES / "multiwoz22_sample.json", tmp_path / "dialogues_001.json")
    assert len(load_corpus(tmp_path, "multiwoz22")) == 1


def test_round_trip_and_determinism(tmp_path):
    corpus = load_corpus(FIXTURES / "two_dialogs.jsonl")
    write_corpus(corpus, tmp_path / "a.jsonl")
    write_corpus(load_corpus(tmp_path / "a.jsonl"), tmp_path / "b.jsonl")
    assert load_corpus(tmp_path / "a.jsonl") == corpus
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()


def test_empty_corpus_round_trip(tmp_path):
    write_corpus(Corpus("train", ()), tmp_path / "e.jsonl")
    again = load_corpus(tmp_path / "e.jsonl")
    assert again == Corpus("train", ())


def test_load_order_independence():
    c = synth.offer_twins()
    assert Corpus("test", tuple(reversed(c.dialogs))) == c


def test_ontology_loading():
    onto = load_ontology(FIXTURES / "ontology.jsonl")
    internet = onto.entry("hotel", "internet")
    assert internet.categorical and internet.values == {"yes", "no", "free"}
    assert "bridge guest house" in onto.entry("hotel", "name").values


def test_ontology_round_trip(tmp_path, ontology):
    write_ontology(ontology, tmp_path / "o.jsonl")
    assert load_ontology(tmp_path / "o.jsonl") == ontology


def test_categorical_cap(tmp_path):
    path = tmp_path / "o.jsonl"
    path.write_text('{"slot": "hotel.stars", "categorical": true, "values": [%s]}\n' % ",".join(f'"{i}"' for i in range(60)))
    with pytest.raises(CorpusError, match="cap is 50"):
        load_ontology(path)


def test_database_mismatch_is_a_diagnostic():
    onto = load_ontology(FIXTURES / "ontology.jsonl")
    db = load_database(FIXTURES / "database.jsonl", onto)
    assert len(db.records["hotel"]) == 2
    assert len(db.diagnostics) == 1
    assert "hotel.internet=maybe" in db.diagnostics[0]


def test_predictions(tmp_path):
    gold = load_corpus(FIXTURES / "two_dialogs.jsonl")
    path = tmp_path / "p.jsonl"
    path.write_text('{"dialog_id": "MUL0001.json", "turn": 1, "state": ["attraction.type=Museum"]}\n')
    preds = load_predictions(path, gold)
    assert preds.get("MUL0001.json", 1) == {SlotTriple("attraction", "type", "museum")}
    write_predictions(preds, tmp_path / "q.jsonl")
    assert load_predictions(tmp_path / "q.jsonl", gold) == preds


def test_prediction_for_absent_turn(tmp_path):
    gold = load_corpus(FIXTURES / "two_dialogs.jsonl")
    path = tmp_path / "p.jsonl"
    path.write_text('{"dialog_id": "MUL0001.json", "turn": 5, "state": []}\n')
    with pytest.raises(CorpusError, match="MUL0001.json turn 5"):
        load_predictions(path, gold)


def test_prediction_unknown_slot(tmp_path):
    gold = load_corpus(FIXTURES / "two_dialogs.jsonl")
    path = tmp_path / "p.jsonl"
    path.write_text('{"dialog_id": "MUL0001.json", "turn": 0, "state": ["hotel.colour=red"]}\n')
    with pytest.raises(CorpusError, match="hotel.colour"):
        load_predictions(path, gold, load_ontology(FIXTURES / "ontology.jsonl"))


def test_cumulativity_report():
    d = synth.dialog(
        "X",
        ["hotel"],
        [("a", "b", ["hotel.area=north"]), ("c", "d", ["hotel.area=south"]), ("e", "", [])],
    )
    # overwrite at turn 1 is fine; the drop at turn 2 is reported
    assert d.cumulativity_violations() == ["X turn 2: hotel.area=south dropped"]


values = st.sampled_from(["north", "south", "bridge guest house", "cheap", "All Saints Church"])
slots = st.sampled_from([("hotel", "area"), ("hotel", "name"), ("attraction", "name"), ("hotel", "pricerange")])


@st.composite
def corpora(draw):
    dialogs = []
    for i in range(draw(st.integers(0, 4))):
        n = draw(st.integers(1, 4))
        turns = []
        for t in range(n):
            state = {}
            for _ in range(draw(st.integers(0, 3))):
                state[draw(slots)] = draw(values)
            turns.append(
                DialogTurn(
                    t,
                    draw(st.text(max_size=20)),
                    draw(st.text(min_size=1, max_size=20)) if t < n - 1 else "",
                    frozenset(SlotTriple.parse(f"{d}.{s}={v}") for (d, s), v in state.items()),
                )
            )
        dialogs.append(Dialog(f"D{i}", frozenset({"hotel", "attraction"}), tuple(turns)))
    return Corpus("valid", tuple(dialogs))


@settings(max_examples=60, deadline=None)
@given(corpora())
def test_round_trip_property(tmp_path_factory, corpus):
    path = tmp_path_factory.mktemp("rt") / "c.jsonl"
    write_corpus(corpus, path)
    assert load_corpus(path) == corpus
    assert dumps_corpus(load_corpus(path)) == path.read_text(encoding="utf-8")
