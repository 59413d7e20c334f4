"""Text normalization and slot-value canonicalization.

Utterances are never rewritten here. Normalization is only used to compare
annotation values against each other and against utterance text.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Mapping

if TYPE_CHECKING:
    from .corpus import Ontology

DEFAULT_PUNCTUATION = frozenset('.,!?;:"')

SlotKey = tuple[str, str]


class SynonymTableError(ValueError):
    pass


@dataclass(frozen=True)
class NormalizationConfig:
    lowercase: bool = True
    strip_punctuation: frozenset[str] = DEFAULT_PUNCTUATION
    collapse_whitespace: bool = True
    strip_diacritics: bool = False
    # (domain, slot_type) -> {normalized variant: canonical value}
    synonym_table: Mapping[SlotKey, Mapping[str, str]] = field(default_factory=dict)

    def __post_init__(self):
        for key, table in self.synonym_table.items():
            chained = set(table) & set(table.values())
            # a variant mapping to itself is harmless, anything else is a chain
            chained = {v for v in chained if table.get(v) != v}
            if chained:
                raise SynonymTableError(
                    f"synonym table for {key[0]}.{key[1]} chains through "
                    f"{sorted(chained)}: a canonical target cannot also be a variant"
                )

    def synonyms_for(self, domain: str, slot_type: str) -> Mapping[str, str]:
        return self.synonym_table.get((domain, slot_type), {})


DEFAULT_CONFIG = NormalizationConfig()


def _char_forms(ch: str, config: NormalizationConfig) -> str:
    if config.strip_diacritics:
        ch = "".join(c for c in unicodedata.normalize("NFKD", ch) if not unicodedata.combining(c))
    if config.lowercase:
        ch = ch.casefold()
    return "".join(" " if c in config.strip_punctuation else c for c in ch)


def normalize_with_offsets(raw: str, config: NormalizationConfig = DEFAULT_CONFIG) -> tuple[str, list[int]]:
    """Normalize ``raw`` and keep, for each output character, the index of the
    raw character it came from. Used to map matches back onto utterances."""
    chars: list[str] = []
    offsets: list[int] = []
    for i, ch in enumerate(raw):
        for out in _char_forms(ch, config):
            if config.collapse_whitespace and out.isspace():
                if not chars or chars[-1] == " ":
                    continue
                out = " "
            chars.append(out)
            offsets.append(i)
    if config.collapse_whitespace and chars and chars[-1] == " ":
        chars.pop()
        offsets.pop()
    return "".join(chars), offsets


def normalize_text(raw: str, config: NormalizationConfig = DEFAULT_CONFIG) -> str:
    """Lowercase, drop configured punctuation and collapse whitespace.

    >>> normalize_text("All Saints Church.")
    'all saints church'
    """
    text, _ = normalize_with_offsets(raw, config)
    # casefold can emit characters that fold again (rare Unicode cases), so
    # iterate to a fixed point to keep the function idempotent
    while True:
        again, _ = normalize_with_offsets(text, config)
        if again == text:
            return text
        text = again


def apply_synonyms(domain: str, slot_type: str, normalized: str, config: NormalizationConfig = DEFAULT_CONFIG) -> str:
    return config.synonyms_for(domain, slot_type).get(normalized, normalized)


def canonical_value(
    domain: str,
    slot_type: str,
    raw: str,
    ontology: Ontology,
    config: NormalizationConfig = DEFAULT_CONFIG,
) -> str | None:
    """Return the ontology value matching ``raw`` exactly after normalization
    and synonym mapping, or ``None``. No fuzzy matching happens here."""
    entry = ontology.entry(domain, slot_type)
    value = apply_synonyms(domain, slot_type, normalize_text(raw, config), config)
    return value if value in entry.values else None


def surface_variants(domain: str, slot_type: str, value: str, config: NormalizationConfig = DEFAULT_CONFIG) -> set[str]:
    """All normalized surface forms that stand for ``value`` in text."""
    variants = {normalize_text(value, config)}
    for variant, target in config.synonyms_for(domain, slot_type).items():
        if target == value:
            variants.add(variant)
    variants.discard("")
    return variants


def load_synonyms(path: str | Path, base: NormalizationConfig = DEFAULT_CONFIG) -> NormalizationConfig:
    """Read a synonym table (JSON lines with ``slot``, ``variant``, ``canonical``)."""
    table: dict[SlotKey, dict[str, str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                domain, slot_type = rec["slot"].split(".", 1)
                variant = normalize_text(rec["variant"], base)
                canonical = normalize_text(rec["canonical"], base)
            except (json.JSONDecodeError, KeyError, ValueError, AttributeError) as exc:
                raise SynonymTableError(f"{path}:{lineno}: bad synonym record: {exc}") from exc
            slot_table = table.setdefault((domain, slot_type), {})
            if slot_table.get(variant, canonical) != canonical:
                raise SynonymTableError(
                    f"{path}:{lineno}: variant {variant!r} of {domain}.{slot_type} maps to both "
                    f"{slot_table[variant]!r} and {canonical!r}"
                )
            slot_table[variant] = canonical
    return NormalizationConfig(
        lowercase=base.lowercase,
        strip_punctuation=base.strip_punctuation,
        collapse_whitespace=base.collapse_whitespace,
        strip_diacritics=base.strip_diacritics,
        synonym_table=table,
    )


def check_synonyms(config: NormalizationConfig, ontology: Ontology) -> list[str]:
    """Synonym targets of categorical slots must be ontology members."""
    problems = []
    for (domain, slot_type), table in sorted(config.synonym_table.items()):
        if not ontology.has(domain, slot_type):
            problems.append(f"synonyms given for unknown slot {domain}.{slot_type}")
            continue
        entry = ontology.entry(domain, slot_type)
        if not entry.categorical:
            continue
        for variant, target in sorted(table.items()):
            if target not in entry.values:
                problems.append(f"{domain}.{slot_type}: {variant!r} -> {target!r} is not an ontology value")
    return problems
