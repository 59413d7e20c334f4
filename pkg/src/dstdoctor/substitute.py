"""Unseen-entity test sets: swap every slot value of a test corpus for one
that never occurs in training, consistently in states and utterances."""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .canonicalize import DEFAULT_CONFIG, NormalizationConfig, normalize_text, normalize_with_offsets, surface_variants
from .corpus import Corpus, Dialog, SlotKey, SlotTriple, replace_turns

# times and counts are not named entities
NON_ENTITY_SLOT_TYPES = frozenset(
    {"leaveat", "arriveby", "stay", "people", "day", "time", "bookday", "bookpeople", "bookstay", "booktime"}
)
CLOSED_CLASS_SLOT_TYPES = frozenset({"internet", "parking"})
SPECIAL_VALUES = frozenset({"dontcare", "none", "do n't care", "not mentioned"})


class SubstitutionError(ValueError):
    pass


@dataclass(frozen=True)
class Pool:
    values: tuple[str, ...]
    replaceable: bool = True
    provenance: str = ""


@dataclass(frozen=True)
class ReplacementLexicon:
    pools: Mapping[SlotKey, Pool]

    def is_replaceable(self, slot: SlotKey, allow_non_entities: bool = False) -> bool:
        pool = self.pools.get(slot)
        if pool is None or not pool.replaceable:
            return False
        return allow_non_entities or slot[1] not in NON_ENTITY_SLOT_TYPES


def load_lexicon(path: str | Path, config: NormalizationConfig = DEFAULT_CONFIG) -> ReplacementLexicon:
    pools = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                domain, slot_type = rec["slot"].split(".", 1)
                values = tuple(dict.fromkeys(v for v in (normalize_text(x, config) for x in rec.get("values", ())) if v))
                pool = Pool(values, bool(rec.get("replaceable", True)), rec.get("provenance", ""))
            except (json.JSONDecodeError, KeyError, ValueError, AttributeError) as exc:
                raise SubstitutionError(f"{path}:{lineno}: bad lexicon record ({exc})") from exc
            if pool.replaceable and not pool.values:
                raise SubstitutionError(f"{path}:{lineno}: replaceable pool {domain}.{slot_type} has no values")
            pools[(domain, slot_type)] = pool
    return ReplacementLexicon(pools)


@dataclass(frozen=True)
class ReplacementMap:
    seed: int
    # dialog id -> {(domain, slot_type, original): replacement}
    dialogs: Mapping[str, Mapping[tuple[str, str, str], str]] = field(default_factory=dict)

    def for_dialog(self, dialog_id: str) -> Mapping[tuple[str, str, str], str]:
        return self.dialogs.get(dialog_id, {})

    def inverse(self) -> ReplacementMap:
        return ReplacementMap(
            self.seed,
            {did: {(d, s, new): old for (d, s, old), new in m.items()} for did, m in self.dialogs.items()},
        )

    def to_json(self) -> str:
        rows = []
        for did, m in sorted(self.dialogs.items()):
            for (d, s, old), new in sorted(m.items()):
                rows.append(json.dumps({"dialog_id": did, "slot": f"{d}.{s}", "original": old, "replacement": new}, ensure_ascii=False))
        header = json.dumps({"seed": self.seed})
        return "\n".join([header] + rows) + "\n"

    @classmethod
    def from_json(cls, text: str) -> ReplacementMap:
        lines = [json.loads(x) for x in text.splitlines() if x.strip()]
        dialogs: dict[str, dict] = {}
        for rec in lines[1:]:
            d, s = rec["slot"].split(".", 1)
            dialogs.setdefault(rec["dialog_id"], {})[(d, s, rec["original"])] = rec["replacement"]
        return cls(lines[0]["seed"], dialogs)


def _vocabulary(corpus: Corpus) -> dict[SlotKey, set[str]]:
    vocab: dict[SlotKey, set[str]] = {}
    for dialog in corpus:
        for turn in dialog.turns:
            for t in turn.belief_state:
                vocab.setdefault(t.slot, set()).add(t.value)
    return vocab


def _owner(slots: list[SlotKey]) -> SlotKey:
    # a value shared by e.g. hotel.name and taxi.destination takes a hotel name
    return sorted(slots, key=lambda k: (k[1] != "name", k))[0]


def build_replacement_map(
    test: Corpus,
    train: Corpus,
    lexicon: ReplacementLexicon,
    seed: int = 0,
    *,
    allow_non_entities: bool = False,
) -> ReplacementMap:
    """Pick, per dialog, an unseen replacement for every replaceable value.

    Each dialog draws from its own RNG seeded by ``(seed, dialog id)``, so the
    result does not depend on dialog order. A value filling several slots in
    one dialog gets a single replacement, drawn from the pool of its
    preferred slot and unseen in training for all of them.
    """
    train_vocab = _vocabulary(train)
    out = {}
    for dialog in test:
        by_value: dict[str, set[SlotKey]] = {}
        for turn in dialog.turns:
            for t in turn.belief_state:
                if t.value not in SPECIAL_VALUES and lexicon.is_replaceable(t.slot, allow_non_entities):
                    by_value.setdefault(t.value, set()).add(t.slot)
        if not by_value:
            continue
        # slots that are not replaceable still follow a value they share
        for turn in dialog.turns:
            for t in turn.belief_state:
                if t.value in by_value:
                    by_value[t.value].add(t.slot)
        rng = random.Random(f"{seed}:{dialog.id}")
        used: set[str] = set(by_value)
        text = _dialog_text(dialog, DEFAULT_CONFIG)
        mapping = {}
        for value in sorted(by_value):
            slots = sorted(by_value[value])
            owner = _owner([s for s in slots if lexicon.is_replaceable(s, allow_non_entities)])
            seen = set().union(*(train_vocab.get(s, set()) for s in slots))
            # a candidate already said in the dialog would create a false mention
            candidates = [
                v for v in lexicon.pools[owner].values if v not in seen and v not in used and not _word_in(v, text)
            ]
            if not candidates:
                raise SubstitutionError(
                    f"dialog {dialog.id}: replacement pool for {owner[0]}.{owner[1]} has no unseen value left for {value!r}"
                )
            choice = rng.choice(candidates)
            used.add(choice)
            for d, s in slots:
                mapping[(d, s, value)] = choice
        out[dialog.id] = dict(sorted(mapping.items()))
    return ReplacementMap(seed, out)


def _match_case(surface: str, text: str) -> str:
    if surface.isupper() and any(c.isalpha() for c in surface):
        return text.upper()
    if surface.istitle():
        return text.title()
    if surface[:1].isupper():
        return text[:1].upper() + text[1:]
    return text


def _replace_text(text: str, originals: list[tuple[str, str, set[str]]], config, dialog_id: str) -> str:
    """``originals`` holds (original, replacement, normalized variants),
    longest first."""
    norm, offsets = normalize_with_offsets(text, config)
    spans = []
    for original, replacement, variants in originals:
        for variant in sorted(variants, key=len, reverse=True):
            start = 0
            while (i := norm.find(variant, start)) != -1:
                j = i + len(variant)
                start = i + 1
                if (i > 0 and (norm[i - 1].isalnum() or norm[i - 1] == "_")) or (j < len(norm) and (norm[j].isalnum() or norm[j] == "_")):
                    continue
                clash = [s for s in spans if i < s[1] and s[0] < j]
                if not clash:
                    spans.append((i, j, replacement))
                    continue
                # inside a longer value already claimed: leave it alone
                if all(s[0] <= i and j <= s[1] for s in clash):
                    continue
                raise SubstitutionError(
                    f"dialog {dialog_id}: overlapping values at characters {offsets[i]}-{offsets[j - 1] + 1} of {text!r}"
                )
    out = text
    for i, j, replacement in sorted(spans, reverse=True):
        a, b = offsets[i], offsets[j - 1] + 1
        out = out[:a] + _match_case(out[a:b], replacement) + out[b:]
    return out


def _substitute_dialog(dialog: Dialog, mapping, config: NormalizationConfig) -> Dialog:
    if not mapping:
        return dialog
    flat: dict[str, str] = {}
    variants: dict[str, set[str]] = {}
    for (d, s, old), new in mapping.items():
        if flat.setdefault(old, new) != new:
            raise SubstitutionError(f"dialog {dialog.id}: {old!r} maps to both {flat[old]!r} and {new!r}")
        variants.setdefault(old, set()).update(surface_variants(d, s, old, config))
    originals = sorted(((o, flat[o], variants[o]) for o in flat), key=lambda x: (-len(x[0]), x[0]))
    states = [
        frozenset(SlotTriple(t.domain, t.slot_type, mapping.get((t.domain, t.slot_type, t.value), t.value)) for t in turn.belief_state)
        for turn in dialog.turns
    ]
    utterances = [
        (
            _replace_text(turn.user_utterance, originals, config, dialog.id),
            _replace_text(turn.system_response, originals, config, dialog.id),
        )
        for turn in dialog.turns
    ]
    return replace_turns(dialog, states, utterances)


def apply_replacements(test: Corpus, rmap: ReplacementMap, config: NormalizationConfig = DEFAULT_CONFIG) -> Corpus:
    """Rewrite states (exact triple values) and utterances (word-bounded,
    case-insensitive matches of any normalized variant). Longer originals
    are claimed first so a shorter value inside a longer one is left alone."""
    return Corpus(test.split, tuple(_substitute_dialog(d, rmap.for_dialog(d.id), config) for d in test))


def default_replaceable(slot: SlotKey) -> bool:
    return slot[1] not in NON_ENTITY_SLOT_TYPES | CLOSED_CLASS_SLOT_TYPES


def leakage_audit(new_test: Corpus, train: Corpus, lexicon: ReplacementLexicon | None = None) -> list[SlotTriple]:
    """Triples of replaceable slots in ``new_test`` whose value also occurs in
    training. Empty means no leak."""
    check = (lambda s: lexicon.is_replaceable(s)) if lexicon is not None else default_replaceable
    train_vocab = _vocabulary(train)
    leaks = set()
    for dialog in new_test:
        for turn in dialog.turns:
            for t in turn.belief_state:
                if t.value not in SPECIAL_VALUES and check(t.slot) and t.value in train_vocab.get(t.slot, ()):
                    leaks.add(t)
    return sorted(leaks)


def mention_coverage(before: Corpus, after: Corpus, rmap: ReplacementMap, config: NormalizationConfig = DEFAULT_CONFIG) -> list[str]:
    """State values that had a surface mention before substitution but whose
    replacement has none afterwards."""
    problems = []
    after_by_id = after.by_id()
    for dialog in before:
        mapping = rmap.for_dialog(dialog.id)
        if not mapping:
            continue
        old_text = _dialog_text(dialog, config)
        new_text = _dialog_text(after_by_id[dialog.id], config)
        for (d, s, old), new in sorted(mapping.items()):
            if _word_in(old, old_text) and not _word_in(normalize_text(new, config), new_text):
                problems.append(f"{dialog.id}: {d}.{s} {old!r} -> {new!r} lost its mention")
    return problems


def _dialog_text(dialog: Dialog, config: NormalizationConfig) -> str:
    return " | ".join(normalize_text(f"{t.user_utterance} | {t.system_response}", config) for t in dialog.turns)


def _word_in(word: str, text: str) -> bool:
    return re.search(r"(?<!\w)" + re.escape(word) + r"(?!\w)", text) is not None
