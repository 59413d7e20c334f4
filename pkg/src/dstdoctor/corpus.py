"""In-memory model for dialog corpora, ontologies, entity databases and
prediction files, plus the JSON-lines readers and writers for each.

All structures are frozen after construction. Triple values are stored in
normalized form; utterances are kept exactly as read.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .canonicalize import DEFAULT_CONFIG, NormalizationConfig, normalize_text

SPLITS = ("train", "valid", "test")
CATEGORICAL_CAP = 50
CORPUS_HEADER = "dstdoctor-corpus"

_IDENT = re.compile(r"[a-z][a-z0-9_]*\Z")

SlotKey = tuple[str, str]


class CorpusError(ValueError):
    """Raised for unparsable input or violated corpus invariants."""


@dataclass(frozen=True, order=True)
class SlotTriple:
    domain: str
    slot_type: str
    value: str

    def __post_init__(self):
        for name in ("domain", "slot_type"):
            ident = getattr(self, name)
            if not _IDENT.match(ident):
                raise CorpusError(f"{name} must be a lowercase identifier, got {ident!r}")
        if not self.value:
            raise CorpusError(f"empty value for {self.domain}.{self.slot_type}")

    @property
    def slot(self) -> SlotKey:
        return (self.domain, self.slot_type)

    def __str__(self) -> str:
        return f"{self.domain}.{self.slot_type}={self.value}"

    @classmethod
    def parse(cls, text: str, config: NormalizationConfig = DEFAULT_CONFIG) -> SlotTriple:
        """Parse ``domain.slot_type=value``; the value is normalized."""
        name, sep, value = text.partition("=")
        domain, dot, slot_type = name.strip().partition(".")
        if not sep or not dot:
            raise CorpusError(f"malformed slot triple {text!r}, expected domain.slot_type=value")
        return cls(domain, slot_type, normalize_text(value, config))


def state_slots(state: Iterable[SlotTriple]) -> dict[SlotKey, set[str]]:
    """Group a belief state by (domain, slot_type)."""
    slots: dict[SlotKey, set[str]] = {}
    for t in state:
        slots.setdefault(t.slot, set()).add(t.value)
    return slots


@dataclass(frozen=True)
class DialogTurn:
    index: int
    user_utterance: str
    system_response: str
    belief_state: frozenset[SlotTriple] = frozenset()

    def slot_values(self) -> dict[SlotKey, set[str]]:
        return state_slots(self.belief_state)

    def value_of(self, domain: str, slot_type: str) -> str | None:
        for t in sorted(self.belief_state):
            if t.domain == domain and t.slot_type == slot_type:
                return t.value
        return None


@dataclass(frozen=True)
class Dialog:
    id: str
    active_domains: frozenset[str]
    turns: tuple[DialogTurn, ...]
    multi_value: bool = field(default=False, compare=False)

    def __post_init__(self):
        if not self.id:
            raise CorpusError("dialog without id")
        for i, turn in enumerate(self.turns):
            where = f"dialog {self.id} turn {i}"
            if turn.index != i:
                raise CorpusError(f"{where}: turn index {turn.index}, expected {i}")
            if not turn.system_response and i != len(self.turns) - 1:
                raise CorpusError(f"{where}: empty system response before the final turn")
            stray = {t.domain for t in turn.belief_state} - self.active_domains
            if stray:
                raise CorpusError(f"{where}: state uses inactive domains {sorted(stray)}")
            if not self.multi_value:
                for (d, s), values in state_slots(turn.belief_state).items():
                    if len(values) > 1:
                        raise CorpusError(f"{where}: {d}.{s} has several values {sorted(values)}")

    def cumulativity_violations(self) -> list[str]:
        """Triples that vanish between consecutive turns without being
        overwritten. Reported, not rejected."""
        problems = []
        for prev, cur in zip(self.turns, self.turns[1:]):
            now = cur.slot_values()
            for t in sorted(prev.belief_state):
                if t.slot not in now:
                    problems.append(f"{self.id} turn {cur.index}: {t} dropped")
        return problems


@dataclass(frozen=True)
class Corpus:
    split: str
    dialogs: tuple[Dialog, ...]

    def __post_init__(self):
        if self.split not in SPLITS:
            raise CorpusError(f"unknown split {self.split!r}, expected one of {SPLITS}")
        seen = set()
        for d in self.dialogs:
            if d.id in seen:
                raise CorpusError(f"duplicate dialog id {d.id!r}")
            seen.add(d.id)
        ordered = tuple(sorted(self.dialogs, key=lambda d: d.id))
        if ordered != self.dialogs:
            object.__setattr__(self, "dialogs", ordered)

    def __len__(self) -> int:
        return len(self.dialogs)

    def __iter__(self) -> Iterator[Dialog]:
        return iter(self.dialogs)

    def get(self, dialog_id: str) -> Dialog:
        for d in self.dialogs:
            if d.id == dialog_id:
                return d
        raise KeyError(dialog_id)

    def by_id(self) -> dict[str, Dialog]:
        return {d.id: d for d in self.dialogs}

    def slots(self) -> set[SlotKey]:
        return {t.slot for d in self.dialogs for turn in d.turns for t in turn.belief_state}

    def cumulativity_violations(self) -> list[str]:
        return [p for d in self.dialogs for p in d.cumulativity_violations()]


@dataclass(frozen=True)
class OntologyEntry:
    values: frozenset[str]
    categorical: bool = False


@dataclass(frozen=True)
class Ontology:
    entries: Mapping[SlotKey, OntologyEntry]
    categorical_cap: int = CATEGORICAL_CAP

    def __post_init__(self):
        for (d, s), entry in self.entries.items():
            if entry.categorical and len(entry.values) >= self.categorical_cap:
                raise CorpusError(
                    f"categorical slot {d}.{s} has {len(entry.values)} values, cap is {self.categorical_cap}"
                )

    def has(self, domain: str, slot_type: str) -> bool:
        return (domain, slot_type) in self.entries

    def entry(self, domain: str, slot_type: str) -> OntologyEntry:
        try:
            return self.entries[(domain, slot_type)]
        except KeyError:
            raise KeyError(f"unknown slot {domain}.{slot_type}") from None

    def slots(self) -> list[SlotKey]:
        return sorted(self.entries)

    def domains(self) -> set[str]:
        return {d for d, _ in self.entries}


@dataclass(frozen=True)
class EntityDatabase:
    records: Mapping[str, tuple[Mapping[str, str], ...]]
    diagnostics: tuple[str, ...] = ()

    def values(self, domain: str, slot_type: str) -> set[str]:
        return {r[slot_type] for r in self.records.get(domain, ()) if r.get(slot_type)}


EMPTY_DATABASE = EntityDatabase({})


@dataclass(frozen=True)
class PredictionSet:
    entries: Mapping[tuple[str, int], frozenset[SlotTriple]]

    def get(self, dialog_id: str, turn_index: int) -> frozenset[SlotTriple] | None:
        return self.entries.get((dialog_id, turn_index))


# ---------------------------------------------------------------- reading


def _json_records(path: str | Path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}:{exc.colno}: {exc.msg}") from exc
            if not isinstance(rec, dict):
                raise CorpusError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, rec


def _parse_state(items, where: str, config: NormalizationConfig, ontology: Ontology | None) -> frozenset[SlotTriple]:
    state = set()
    for item in items:
        try:
            t = SlotTriple.parse(item, config)
        except CorpusError as exc:
            raise CorpusError(f"{where}: {exc}") from None
        if ontology is not None and not ontology.has(t.domain, t.slot_type):
            raise CorpusError(f"{where}: unknown slot {t.domain}.{t.slot_type}")
        state.add(t)
    return frozenset(state)


def _dialog_from_native(rec: dict, where: str, config, ontology, multi_value) -> Dialog:
    try:
        dialog_id = rec["id"]
        turns = []
        for i, raw in enumerate(rec["turns"]):
            turns.append(
                DialogTurn(
                    index=i,
                    user_utterance=raw.get("user", ""),
                    system_response=raw.get("system", ""),
                    belief_state=_parse_state(raw.get("state", ()), f"{where} dialog {dialog_id} turn {i}", config, ontology),
                )
            )
        return Dialog(dialog_id, frozenset(rec.get("domains", ())), tuple(turns), multi_value=multi_value)
    except (KeyError, TypeError, AttributeError) as exc:
        raise CorpusError(f"{where}: malformed dialog record ({exc!r})") from exc


def _read_native(path, split, config, ontology, multi_value) -> Corpus:
    dialogs = []
    for lineno, rec in _json_records(path):
        if rec.get("format") == CORPUS_HEADER:
            split = split or rec.get("split")
            continue
        dialogs.append(_dialog_from_native(rec, f"{path}:{lineno}", config, ontology, multi_value))
    return Corpus(split or "test", tuple(dialogs))


def _read_multiwoz22(path, split, config, ontology, multi_value) -> Corpus:
    path = Path(path)
    files = sorted(path.glob("*.json")) if path.is_dir() else [path]
    dialogs = []
    for file in files:
        try:
            data = json.loads(file.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{file}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
        for raw in data:
            dialogs.append(_dialog_from_multiwoz22(raw, str(file), config, ontology, multi_value))
    return Corpus(split or "test", tuple(dialogs))


def _dialog_from_multiwoz22(raw: dict, where: str, config, ontology, multi_value) -> Dialog:
    """Pair each USER turn with the SYSTEM turn that follows it and flatten the
    per-service ``slot_values`` maps into triples."""
    try:
        dialog_id = raw["dialogue_id"]
        domains = set(raw.get("services", ()))
        turns = []
        pending = None
        for t in raw["turns"]:
            if t["speaker"] == "USER":
                if pending is not None:
                    turns.append(pending)
                state = []
                for frame in t.get("frames", ()):
                    slot_values = frame.get("state", {}).get("slot_values", {})
                    for name, values in sorted(slot_values.items()):
                        domain, _, slot_type = name.partition("-")
                        values = values if multi_value else values[:1]
                        state.extend(f"{domain}.{slot_type}={v}" for v in values)
                        domains.add(domain)
                pending = [t["utterance"], "", state]
            elif pending is not None:
                pending[1] = t["utterance"]
                turns.append(pending)
                pending = None
        if pending is not None:
            turns.append(pending)
    except (KeyError, TypeError, AttributeError) as exc:
        raise CorpusError(f"{where}: malformed MultiWOZ 2.2 dialog ({exc!r})") from exc
    return Dialog(
        dialog_id,
        frozenset(domains),
        tuple(
            DialogTurn(i, u, s, _parse_state(st, f"{where} dialog {dialog_id} turn {i}", config, ontology))
            for i, (u, s, st) in enumerate(turns)
        ),
        multi_value=multi_value,
    )


def load_corpus(
    path: str | Path,
    format: str = "native",
    split: str | None = None,
    *,
    ontology: Ontology | None = None,
    config: NormalizationConfig = DEFAULT_CONFIG,
    multi_value: bool = False,
) -> Corpus:
    """Load and validate a corpus.

    ``format`` is ``"native"`` (JSON lines, see docs/formats.md) or
    ``"multiwoz22"`` (a MultiWOZ 2.2 dialogues file or directory of them).
    When an ontology is given, every state slot must be declared in it.
    """
    readers = {"native": _read_native, "multiwoz22": _read_multiwoz22}
    if format not in readers:
        raise CorpusError(f"unknown corpus format {format!r}")
    return readers[format](path, split, config, ontology, multi_value)


def _dialog_record(dialog: Dialog) -> dict:
    return {
        "id": dialog.id,
        "domains": sorted(dialog.active_domains),
        "turns": [
            {
                "user": t.user_utterance,
                "system": t.system_response,
                "state": [str(x) for x in sorted(t.belief_state)],
            }
            for t in dialog.turns
        ],
    }


def dumps_corpus(corpus: Corpus) -> str:
    lines = [json.dumps({"format": CORPUS_HEADER, "version": 1, "split": corpus.split})]
    lines += [json.dumps(_dialog_record(d), ensure_ascii=False) for d in corpus.dialogs]
    return "\n".join(lines) + "\n"


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    Path(path).write_text(dumps_corpus(corpus), encoding="utf-8")


def load_ontology(path: str | Path, config: NormalizationConfig = DEFAULT_CONFIG, categorical_cap: int = CATEGORICAL_CAP) -> Ontology:
    entries = {}
    for lineno, rec in _json_records(path):
        try:
            domain, slot_type = rec["slot"].split(".", 1)
            SlotTriple(domain, slot_type, "-")
            values = frozenset(v for v in (normalize_text(x, config) for x in rec.get("values", ())) if v)
            categorical = bool(rec.get("categorical", False))
        except (KeyError, ValueError, AttributeError) as exc:
            raise CorpusError(f"{path}:{lineno}: bad ontology record ({exc})") from exc
        if (domain, slot_type) in entries:
            raise CorpusError(f"{path}:{lineno}: slot {domain}.{slot_type} declared twice")
        entries[(domain, slot_type)] = OntologyEntry(values, categorical)
    return Ontology(dict(sorted(entries.items())), categorical_cap)


def write_ontology(ontology: Ontology, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for (d, s), entry in sorted(ontology.entries.items()):
            rec = {"slot": f"{d}.{s}", "categorical": entry.categorical, "values": sorted(entry.values)}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def load_database(
    path: str | Path,
    ontology: Ontology | None = None,
    config: NormalizationConfig = DEFAULT_CONFIG,
) -> EntityDatabase:
    """Read entity records (one ``{"domain": ..., "record": {...}}`` per line).

    Values are normalized. Record values that fall outside the ontology entry
    for their slot are kept and listed in ``diagnostics``.
    """
    records: dict[str, list[dict[str, str]]] = {}
    diagnostics = []
    for lineno, rec in _json_records(path):
        try:
            domain = rec["domain"]
            fields = {str(k): normalize_text(str(v), config) for k, v in rec["record"].items()}
        except (KeyError, AttributeError) as exc:
            raise CorpusError(f"{path}:{lineno}: bad database record ({exc})") from exc
        records.setdefault(domain, []).append(fields)
        if ontology is None:
            continue
        for slot_type, value in sorted(fields.items()):
            if ontology.has(domain, slot_type) and value not in ontology.entry(domain, slot_type).values:
                diagnostics.append(f"{path}:{lineno}: {domain}.{slot_type}={value} not in ontology")
    return EntityDatabase({d: tuple(rs) for d, rs in sorted(records.items())}, tuple(diagnostics))


def load_predictions(
    path: str | Path,
    gold: Corpus,
    ontology: Ontology | None = None,
    config: NormalizationConfig = DEFAULT_CONFIG,
) -> PredictionSet:
    turns = {d.id: len(d.turns) for d in gold.dialogs}
    entries = {}
    for lineno, rec in _json_records(path):
        where = f"{path}:{lineno}"
        try:
            key = (rec["dialog_id"], int(rec["turn"]))
            items = rec.get("state", ())
        except (KeyError, ValueError, TypeError) as exc:
            raise CorpusError(f"{where}: bad prediction record ({exc!r})") from exc
        if key[0] not in turns or not 0 <= key[1] < turns[key[0]]:
            raise CorpusError(f"{where}: prediction for {key[0]} turn {key[1]}, which is not in the gold corpus")
        if key in entries:
            raise CorpusError(f"{where}: second prediction for {key[0]} turn {key[1]}")
        entries[key] = _parse_state(items, where, config, ontology)
    return PredictionSet(dict(sorted(entries.items())))


def write_predictions(preds: PredictionSet, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for (dialog_id, turn), state in sorted(preds.entries.items()):
            rec = {"dialog_id": dialog_id, "turn": turn, "state": [str(t) for t in sorted(state)]}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def replace_turns(dialog: Dialog, states: list[frozenset[SlotTriple]] | None = None, utterances=None) -> Dialog:
    """Copy of ``dialog`` with new belief states and/or (user, system) pairs."""
    turns = []
    for i, turn in enumerate(dialog.turns):
        user, system = utterances[i] if utterances is not None else (turn.user_utterance, turn.system_response)
        state = states[i] if states is not None else turn.belief_state
        turns.append(DialogTurn(turn.index, user, system, state))
    return Dialog(dialog.id, dialog.active_domains, tuple(turns), multi_value=dialog.multi_value)
