import pytest
from hypothesis import given
from hypothesis import strategies as st

from dstdoctor.canonicalize import (
    NormalizationConfig,
    SynonymTableError,
    canonical_value,
    check_synonyms,
    load_synonyms,
    normalize_text,
    normalize_with_offsets,
    surface_variants,
)


@pytest.mark.parametrize(
    "raw, expected",
    [
        ("All Saints Church.", "all saints church"),
        ("guest  house", "guest house"),
        ("  Yes, please!  ", "yes please"),
        ("centre", "centre"),
    ],
)
def test_normalize_text(raw, expected):
    assert normalize_text(raw) == expected


def test_synonym_fixed_point(ontology):
    config = NormalizationConfig(synonym_table={("hotel", "area"): {"center": "centre"}})
    assert canonical_value("hotel", "area", "centre", ontology, config) == "centre"
    assert canonical_value("hotel", "area", "Center", ontology, config) == "centre"


@pytest.mark.parametrize(
    "domain, slot, raw, expected",
    [
        ("attraction", "name", "All Saints Church", "all saints church"),
        ("hotel", "pricerange", "Moderate", "moderate"),
        ("hotel", "internet", "maybe", None),
        ("hotel", "name", "bridge guest hous", None),
    ],
)
def test_canonical_value(ontology, domain, slot, raw, expected):
    assert canonical_value(domain, slot, raw, ontology) == expected


def test_canonical_value_unknown_slot(ontology):
    with pytest.raises(KeyError, match="hotel.colour"):
        canonical_value("hotel", "colour", "red", ontology)


def test_chained_synonyms_rejected():
    with pytest.raises(SynonymTableError):
        NormalizationConfig(synonym_table={("hotel", "type"): {"guesthouse": "guest house", "guest house": "b and b"}})


def test_synonym_targets_checked_for_categorical(ontology):
    config = NormalizationConfig(synonym_table={("hotel", "area"): {"center": "middle"}})
    assert check_synonyms(config, ontology) == ["hotel.area: 'center' -> 'middle' is not an ontology value"]


def test_load_synonyms(tmp_path):
    path = tmp_path / "syn.jsonl"
    path.write_text('{"slot": "hotel.area", "variant": "Center", "canonical": "centre"}\n')
    config = load_synonyms(path)
    assert config.synonyms_for("hotel", "area") == {"center": "centre"}
    assert surface_variants("hotel", "area", "centre", config) == {"centre", "center"}


def test_offsets_map_back_to_raw():
    raw = "Try  Bridge Guest House."
    norm, offsets = normalize_with_offsets(raw)
    i = norm.index("bridge guest house")
    j = i + len("bridge guest house")
    assert raw[offsets[i] : offsets[j - 1] + 1] == "Bridge Guest House"


def test_diacritics_flag():
    assert normalize_text("Café") == "café"
    assert normalize_text("Café", NormalizationConfig(strip_diacritics=True)) == "cafe"


@given(st.text())
def test_normalize_idempotent(raw):
    once = normalize_text(raw)
    assert normalize_text(once) == once


@given(st.text(), st.booleans(), st.booleans())
def test_normalize_idempotent_any_config(raw, lowercase, diacritics):
    config = NormalizationConfig(lowercase=lowercase, strip_diacritics=diacritics)
    once = normalize_text(raw, config)
    assert normalize_text(once, config) == once
