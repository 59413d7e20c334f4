"""Cross-dialog annotation consistency: find slot values mentioned in user or
system turns that the belief state forgot, propose additions, apply them,
and summarize what changed.
"""

from __future__ import annotations

import csv
import json
import random
import re
import warnings
from collections import Counter
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .canonicalize import DEFAULT_CONFIG, NormalizationConfig, normalize_text, normalize_with_offsets, surface_variants
from .corpus import (
    EMPTY_DATABASE,
    Corpus,
    CorpusError,
    Dialog,
    EntityDatabase,
    Ontology,
    SlotKey,
    SlotTriple,
    replace_turns,
)

USER, SYSTEM = "user", "system"
PROPOSED, APPLIED, REJECTED = "proposed", "applied", "rejected"
USER_RULE_ID = "user-mention"

# slot types only the user can fill; never taken from system responses
USER_ONLY_SLOT_TYPES = frozenset(
    {"day", "people", "stay", "time", "bookday", "bookpeople", "bookstay", "booktime", "leaveat", "arriveby"}
)
DEFAULT_IGNORED_VALUES = frozenset({"yes", "no", "none", "dontcare", "do n't care", "not mentioned"})


class RuleError(ValueError):
    pass


class CorrectionConflict(ValueError):
    pass


@dataclass(frozen=True)
class DetectionConfig:
    normalization: NormalizationConfig = DEFAULT_CONFIG
    # "domain.slot_type" or bare "slot_type"; earlier entries win ties
    slot_priority: tuple[str, ...] = ("name", "type", "food", "area", "pricerange", "destination", "departure")
    ignored_values: frozenset[str] = DEFAULT_IGNORED_VALUES
    user_only_slot_types: frozenset[str] = USER_ONLY_SLOT_TYPES
    allow_overwrite: bool = False

    def priority(self, domain: str, slot_type: str) -> int:
        for i, name in enumerate(self.slot_priority):
            if name in (slot_type, f"{domain}.{slot_type}"):
                return i
        return len(self.slot_priority)


DEFAULT_DETECTION = DetectionConfig()


@dataclass(frozen=True)
class MentionCandidate:
    dialog_id: str
    turn_index: int
    side: str
    domain: str
    slot_type: str
    value: str
    span: tuple[int, int]

    @property
    def triple(self) -> SlotTriple:
        return SlotTriple(self.domain, self.slot_type, self.value)


@dataclass(frozen=True)
class CorrectionRecord:
    dialog_id: str
    turn_index: int
    added: SlotTriple
    side: str
    rule_id: str
    status: str = PROPOSED

    def to_json(self) -> dict:
        return {
            "dialog_id": self.dialog_id,
            "turn": self.turn_index,
            "added": str(self.added),
            "side": self.side,
            "rule_id": self.rule_id,
            "status": self.status,
        }

    @classmethod
    def from_json(cls, rec: dict) -> CorrectionRecord:
        return cls(rec["dialog_id"], int(rec["turn"]), SlotTriple.parse(rec["added"]), rec["side"], rec["rule_id"], rec.get("status", PROPOSED))


@dataclass(frozen=True)
class CorrectionRule:
    rule_id: str
    domain: str
    slot_type: str
    side: str
    trigger: str
    rejection_patterns: tuple[str, ...] = ()
    _rejects: tuple[re.Pattern, ...] = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.trigger.count("{value}") != 1:
            raise RuleError(f"rule {self.rule_id}: trigger must contain {{value}} exactly once")
        try:
            re.compile(self.trigger.replace("{value}", "x"), re.MULTILINE)
            rejects = tuple(re.compile(p) for p in self.rejection_patterns)
        except re.error as exc:
            raise RuleError(f"rule {self.rule_id}: bad pattern: {exc}") from exc
        object.__setattr__(self, "_rejects", rejects)

    def covers(self, domain: str, slot_type: str, side: str) -> bool:
        return self.side == side and self.domain in ("*", domain) and self.slot_type in ("*", slot_type)

    def fires(self, value: str, system_text: str, user_text: str) -> bool:
        """Both texts are expected normalized."""
        pattern = self.trigger.replace("{value}", re.escape(value))
        if not re.search(pattern, f"S: {system_text}\nU: {user_text}", re.MULTILINE):
            return False
        return not any(r.search(user_text) for r in self._rejects)


def load_rules(path: str | Path | None = None) -> list[CorrectionRule]:
    """Load correction rules; ``None`` gives the shipped defaults."""
    if path is None:
        text = resources.files("dstdoctor").joinpath("rules/default.rules").read_text(encoding="utf-8")
        source = "default.rules"
    else:
        text = Path(path).read_text(encoding="utf-8")
        source = str(path)
    rules = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            rec = json.loads(line)
            domain, slot_type = rec["slot"].split(".", 1)
            rule = CorrectionRule(
                rec["rule_id"], domain, slot_type, rec.get("side", SYSTEM), rec["trigger"], tuple(rec.get("reject", ()))
            )
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise RuleError(f"{source}:{lineno}: {exc}") from exc
        rules.append(rule)
    return rules


# ---------------------------------------------------------------- detection


def _lexicon(dialog: Dialog, ontology: Ontology, database: EntityDatabase, config: DetectionConfig):
    """(variant, domain, slot_type, canonical value) for every value legal in
    the dialog's active domains."""
    entries = set()
    for domain, slot_type in ontology.slots():
        if domain not in dialog.active_domains:
            continue
        values = set(ontology.entry(domain, slot_type).values) | database.values(domain, slot_type)
        for value in values:
            if value in config.ignored_values:
                continue
            for variant in surface_variants(domain, slot_type, value, config.normalization):
                entries.add((variant, domain, slot_type, value))
    return sorted(entries)


def _find_all(text: str, variant: str) -> list[tuple[int, int]]:
    pattern = re.compile(r"(?<!\w)" + re.escape(variant) + r"(?!\w)")
    spans = []
    pos = 0
    while True:
        m = pattern.search(text, pos)
        if not m:
            return spans
        spans.append(m.span())
        pos = m.start() + 1


def mentions_in_text(text: str, lexicon, config: DetectionConfig = DEFAULT_DETECTION):
    """Maximal non-overlapping matches in raw ``text`` as
    ``(raw_start, raw_end, domain, slot_type, value)``."""
    norm, offsets = normalize_with_offsets(text, config.normalization)
    found = []
    for variant, domain, slot_type, value in lexicon:
        for start, end in _find_all(norm, variant):
            found.append((start, end, domain, slot_type, value))
    found.sort(key=lambda m: (-(m[1] - m[0]), config.priority(m[2], m[3]), m[0], m[2], m[3], m[4]))
    taken: list[tuple[int, int]] = []
    chosen = []
    for m in found:
        if any(m[0] < e and s < m[1] for s, e in taken):
            continue
        taken.append((m[0], m[1]))
        chosen.append(m)
    chosen.sort()
    return [(offsets[s], offsets[e - 1] + 1, d, st, v) for s, e, d, st, v in chosen]


def detect_mentions(
    dialog: Dialog,
    ontology: Ontology,
    database: EntityDatabase = EMPTY_DATABASE,
    config: DetectionConfig = DEFAULT_DETECTION,
) -> list[MentionCandidate]:
    lexicon = _lexicon(dialog, ontology, database, config)
    out = []
    for turn in dialog.turns:
        for side, text in ((USER, turn.user_utterance), (SYSTEM, turn.system_response)):
            for start, end, domain, slot_type, value in mentions_in_text(text, lexicon, config):
                out.append(MentionCandidate(dialog.id, turn.index, side, domain, slot_type, value, (start, end)))
    return out


class _EffectiveState:
    """Gold states plus pending additions, propagated the same way
    ``apply_corrections`` will propagate them."""

    def __init__(self, dialog: Dialog):
        self.gold = [turn.slot_values() for turn in dialog.turns]
        self.added: list[dict[SlotKey, str]] = [{} for _ in dialog.turns]

    def values(self, turn: int, slot: SlotKey) -> set[str]:
        if slot in self.added[turn]:
            return {self.added[turn][slot]}
        return self.gold[turn].get(slot, set())

    def add(self, turn: int, triple: SlotTriple) -> None:
        for t in range(turn, len(self.gold)):
            gold = self.gold[t].get(triple.slot)
            if t > turn and gold and gold != {triple.value}:
                break
            self.added[t][triple.slot] = triple.value


def _wants(state: _EffectiveState, turn: int, triple: SlotTriple, config: DetectionConfig) -> bool:
    current = state.values(turn, triple.slot)
    if triple.value in current:
        return False
    return not current or config.allow_overwrite


def _user_records(dialog, mentions, state: _EffectiveState, config) -> list[CorrectionRecord]:
    records = []
    for m in mentions:
        if m.side != USER:
            continue
        if _wants(state, m.turn_index, m.triple, config):
            state.add(m.turn_index, m.triple)
            records.append(CorrectionRecord(dialog.id, m.turn_index, m.triple, USER, USER_RULE_ID))
    return records


def _system_records(dialog, mentions, rules, state: _EffectiveState, config) -> list[CorrectionRecord]:
    norm = config.normalization
    records = []
    for m in mentions:
        if m.side != SYSTEM or m.slot_type in config.user_only_slot_types:
            continue
        target = m.turn_index + 1
        if target >= len(dialog.turns) or not _wants(state, target, m.triple, config):
            continue
        system_text = normalize_text(dialog.turns[m.turn_index].system_response, norm)
        user_text = normalize_text(dialog.turns[target].user_utterance, norm)
        for rule in rules:
            if rule.covers(m.domain, m.slot_type, SYSTEM) and rule.fires(m.value, system_text, user_text):
                state.add(target, m.triple)
                records.append(CorrectionRecord(dialog.id, target, m.triple, SYSTEM, rule.rule_id))
                break
    return records


def detect_missing_user_annotations(
    dialog: Dialog,
    ontology: Ontology,
    config: DetectionConfig = DEFAULT_DETECTION,
    database: EntityDatabase = EMPTY_DATABASE,
) -> list[CorrectionRecord]:
    mentions = detect_mentions(dialog, ontology, database, config)
    return _user_records(dialog, mentions, _EffectiveState(dialog), config)


def detect_missing_system_annotations(
    dialog: Dialog,
    rules: Sequence[CorrectionRule],
    ontology: Ontology,
    database: EntityDatabase = EMPTY_DATABASE,
    config: DetectionConfig = DEFAULT_DETECTION,
) -> list[CorrectionRecord]:
    mentions = detect_mentions(dialog, ontology, database, config)
    return _system_records(dialog, mentions, rules, _EffectiveState(dialog), config)


def propose_corrections(
    dialog: Dialog,
    rules: Sequence[CorrectionRule],
    ontology: Ontology,
    database: EntityDatabase = EMPTY_DATABASE,
    config: DetectionConfig = DEFAULT_DETECTION,
) -> list[CorrectionRecord]:
    """User-side then system-side proposals for one dialog. System proposals
    see the user additions, so the two never contradict each other."""
    mentions = detect_mentions(dialog, ontology, database, config)
    state = _EffectiveState(dialog)
    records = _user_records(dialog, mentions, state, config)
    records += _system_records(dialog, mentions, rules, state, config)
    return sorted(records, key=lambda r: (r.dialog_id, r.turn_index, r.added))


# ---------------------------------------------------------------- application


def _check_conflicts(records: Iterable[CorrectionRecord]) -> None:
    seen: dict[tuple, CorrectionRecord] = {}
    for r in records:
        key = (r.dialog_id, r.turn_index, r.added.domain, r.added.slot_type)
        other = seen.setdefault(key, r)
        if other.added.value != r.added.value:
            raise CorrectionConflict(
                f"conflicting corrections for {r.dialog_id} turn {r.turn_index}: {other.added} vs {r.added}"
            )


def _apply_dialog(dialog: Dialog, records: list[CorrectionRecord]) -> Dialog:
    gold = [turn.slot_values() for turn in dialog.turns]
    states = [set(turn.belief_state) for turn in dialog.turns]
    by_slot: dict[SlotKey, list[CorrectionRecord]] = {}
    for r in sorted(records, key=lambda r: r.turn_index):
        by_slot.setdefault(r.added.slot, []).append(r)
    for slot, recs in by_slot.items():
        for i, r in enumerate(recs):
            stop = recs[i + 1].turn_index if i + 1 < len(recs) else len(states)
            for t in range(r.turn_index, stop):
                old = gold[t].get(slot, set())
                if t > r.turn_index and old and old != {r.added.value}:
                    break
                states[t] = {x for x in states[t] if x.slot != slot} | {r.added}
    return replace_turns(dialog, [frozenset(s) for s in states])


def apply_corrections(corpus: Corpus, records: Sequence[CorrectionRecord]) -> tuple[Corpus, list[CorrectionRecord]]:
    """Insert each proposed triple at its turn and carry it forward until a
    later turn sets that slot to something else."""
    records = [r for r in records if r.status != REJECTED]
    _check_conflicts(records)
    dialogs = corpus.by_id()
    grouped: dict[str, list[CorrectionRecord]] = {}
    for r in records:
        dialog = dialogs.get(r.dialog_id)
        if dialog is None or not 0 <= r.turn_index < len(dialog.turns):
            raise CorpusError(f"correction refers to missing turn {r.dialog_id}:{r.turn_index}")
        if r.added.domain not in dialog.active_domains:
            raise CorpusError(f"correction {r.added} uses a domain inactive in {r.dialog_id}")
        if r.added in dialog.turns[r.turn_index].belief_state:
            raise CorrectionConflict(f"{r.added} already present in {r.dialog_id} turn {r.turn_index}")
        grouped.setdefault(r.dialog_id, []).append(r)
    fixed = tuple(_apply_dialog(d, grouped[d.id]) if d.id in grouped else d for d in corpus.dialogs)
    applied = sorted((replace(r, status=APPLIED) for r in records), key=lambda r: (r.dialog_id, r.turn_index, r.added))
    return Corpus(corpus.split, fixed), applied


def check_corpus(
    corpus: Corpus,
    rules: Sequence[CorrectionRule],
    ontology: Ontology,
    database: EntityDatabase = EMPTY_DATABASE,
    config: DetectionConfig = DEFAULT_DETECTION,
    jobs: int = 1,
) -> list[CorrectionRecord]:
    from ._parallel import parallel_map

    per_dialog = parallel_map(_propose_worker, [(d, rules, ontology, database, config) for d in corpus.dialogs], jobs)
    return [r for recs in per_dialog for r in recs]


def _propose_worker(args) -> list[CorrectionRecord]:
    return propose_corrections(*args)


def fix_corpus(corpus, rules, ontology, database=EMPTY_DATABASE, config=DEFAULT_DETECTION, jobs=1):
    """Detect and apply in one go. Returns (corrected corpus, applied records)."""
    return apply_corrections(corpus, check_corpus(corpus, rules, ontology, database, config, jobs))


def write_records(records: Iterable[CorrectionRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r.to_json(), ensure_ascii=False) + "\n")


def read_records(path: str | Path) -> list[CorrectionRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if line.strip():
                try:
                    out.append(CorrectionRecord.from_json(json.loads(line)))
                except (json.JSONDecodeError, KeyError, ValueError) as exc:
                    raise CorpusError(f"{path}:{lineno}: bad correction record ({exc})") from exc
    return out


# ---------------------------------------------------------------- statistics


@dataclass
class CorrectionStats:
    split: str
    domain_dialogs: dict[str, int]
    slot_modified: dict[SlotKey, int]
    domain_modified: dict[str, int]
    total_dialogs: int
    total_modified: int
    source_counts: dict[SlotKey, dict[str, int]]

    def percent(self, count: int, base: int) -> float:
        return 100.0 * count / base if base else 0.0

    def slot_cell(self, domain: str, slot_type: str) -> str:
        n = self.slot_modified.get((domain, slot_type), 0)
        return f"{n} ({self.percent(n, self.domain_dialogs.get(domain, 0)):.1f}%)"

    def domain_cell(self, domain: str) -> str:
        n = self.domain_modified.get(domain, 0)
        return f"{n} ({self.percent(n, self.domain_dialogs.get(domain, 0)):.1f}%)"

    def total_cell(self) -> str:
        return f"{self.total_modified} ({self.percent(self.total_modified, self.total_dialogs):.1f}%)"

    def source_fractions(self, domain: str, slot_type: str) -> tuple[float, float]:
        counts = self.source_counts.get((domain, slot_type), {})
        n = counts.get(USER, 0) + counts.get(SYSTEM, 0)
        if not n:
            return (0.0, 0.0)
        return counts.get(USER, 0) / n, counts.get(SYSTEM, 0) / n

    def side_totals(self) -> dict[str, int]:
        totals = Counter()
        for counts in self.source_counts.values():
            totals.update(counts)
        return {USER: totals[USER], SYSTEM: totals[SYSTEM]}

    def to_json(self) -> dict:
        return {
            "split": self.split,
            "domain_dialogs": self.domain_dialogs,
            "slot_modified": {f"{d}.{s}": n for (d, s), n in sorted(self.slot_modified.items())},
            "domain_modified": self.domain_modified,
            "total_dialogs": self.total_dialogs,
            "total_modified": self.total_modified,
            "source_counts": {f"{d}.{s}": c for (d, s), c in sorted(self.source_counts.items())},
        }

    @classmethod
    def from_json(cls, rec: dict) -> CorrectionStats:
        key = lambda k: tuple(k.split(".", 1))  # noqa: E731
        return cls(
            rec["split"],
            dict(rec["domain_dialogs"]),
            {key(k): n for k, n in rec["slot_modified"].items()},
            dict(rec["domain_modified"]),
            rec["total_dialogs"],
            rec["total_modified"],
            {key(k): dict(c) for k, c in rec["source_counts"].items()},
        )


def correction_stats(before: Corpus, after: Corpus, records: Sequence[CorrectionRecord]) -> CorrectionStats:
    """Dialog counts per slot and domain with at least one applied record,
    as a share of the dialogs in which the domain is active."""
    if [d.id for d in before] != [d.id for d in after]:
        raise CorpusError("before/after corpora do not hold the same dialog ids")
    applied = [r for r in records if r.status == APPLIED]
    domain_dialogs = Counter(dom for d in before for dom in d.active_domains)
    slot_dialogs: dict[SlotKey, set[str]] = {}
    domain_mod: dict[str, set[str]] = {}
    sources: dict[SlotKey, Counter] = {}
    for r in applied:
        slot_dialogs.setdefault(r.added.slot, set()).add(r.dialog_id)
        domain_mod.setdefault(r.added.domain, set()).add(r.dialog_id)
        sources.setdefault(r.added.slot, Counter())[r.side] += 1
    return CorrectionStats(
        split=before.split,
        domain_dialogs=dict(sorted(domain_dialogs.items())),
        slot_modified={k: len(v) for k, v in sorted(slot_dialogs.items())},
        domain_modified={k: len(v) for k, v in sorted(domain_mod.items())},
        total_dialogs=len(before),
        total_modified=len({r.dialog_id for r in applied}),
        source_counts={k: {USER: c[USER], SYSTEM: c[SYSTEM]} for k, c in sorted(sources.items())},
    )


def render_stats_table(stats: Sequence[CorrectionStats]) -> str:
    """Tab-separated table with one count/percent column per split."""
    slots = sorted({k for s in stats for k in s.slot_modified})
    domains = sorted({d for d, _ in slots})
    lines = ["\t".join(["domain", "slot_type"] + [s.split for s in stats])]
    for domain in domains:
        for d, slot_type in slots:
            if d == domain:
                lines.append("\t".join([domain, slot_type] + [s.slot_cell(domain, slot_type) for s in stats]))
        lines.append("\t".join([domain, "total"] + [s.domain_cell(domain) for s in stats]))
    lines.append("\t".join(["total", ""] + [s.total_cell() for s in stats]))
    return "\n".join(lines) + "\n"


def render_source_table(stats: CorrectionStats) -> str:
    lines = ["domain\tslot_type\tuser\tsystem\tuser_fraction\tsystem_fraction"]
    for (d, s), counts in sorted(stats.source_counts.items()):
        uf, sf = stats.source_fractions(d, s)
        lines.append(f"{d}\t{s}\t{counts[USER]}\t{counts[SYSTEM]}\t{uf:.3f}\t{sf:.3f}")
    totals = stats.side_totals()
    n = totals[USER] + totals[SYSTEM]
    uf, sf = (totals[USER] / n, totals[SYSTEM] / n) if n else (0.0, 0.0)
    lines.append(f"total\t\t{totals[USER]}\t{totals[SYSTEM]}\t{uf:.3f}\t{sf:.3f}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- verification


WORKSHEET_COLUMNS = ("dialog_id", "stratum", "diff", "label")
MODIFIED, UNCHANGED = "modified", "unchanged"


def dialog_diff(before: Dialog, after: Dialog) -> str:
    parts = []
    for old, new in zip(before.turns, after.turns):
        for t in sorted(new.belief_state - old.belief_state):
            parts.append(f"t{new.index}:+{t}")
        for t in sorted(old.belief_state - new.belief_state):
            parts.append(f"t{new.index}:-{t}")
    return "; ".join(parts)


def sample_verification(
    before: Corpus, after: Corpus, n_modified: int, n_unchanged: int, seed: int = 0
) -> list[dict[str, str]]:
    """Seeded stratified sample of modified and unchanged dialogs for manual
    checking. Rows carry an empty ``label`` column to fill with
    ``correct`` or ``incorrect``."""
    after_by_id = after.by_id()
    if set(after_by_id) != {d.id for d in before}:
        raise CorpusError("before/after corpora do not hold the same dialog ids")
    modified = [d.id for d in before if d != after_by_id[d.id]]
    unchanged = [d.id for d in before if d == after_by_id[d.id]]
    for name, pool, n in ((MODIFIED, modified, n_modified), (UNCHANGED, unchanged, n_unchanged)):
        if n > len(pool):
            raise ValueError(f"asked for {n} {name} dialogs but only {len(pool)} exist")
    rng = random.Random(seed)
    rows = []
    for name, pool, n in ((MODIFIED, modified, n_modified), (UNCHANGED, unchanged, n_unchanged)):
        for dialog_id in sorted(rng.sample(pool, n)):
            diff = dialog_diff(before.get(dialog_id), after_by_id[dialog_id])
            rows.append({"dialog_id": dialog_id, "stratum": name, "diff": diff, "label": ""})
    return rows


def write_worksheet(rows: Sequence[dict[str, str]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, WORKSHEET_COLUMNS, delimiter="\t", lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def read_worksheet(path: str | Path) -> list[dict[str, str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh, delimiter="\t"))
    if rows and set(WORKSHEET_COLUMNS) - set(rows[0]):
        raise ValueError(f"{path}: worksheet needs columns {WORKSHEET_COLUMNS}")
    return rows


def worksheet_counts(rows: Sequence[dict[str, str]]) -> tuple[int, int, int, int]:
    """(tp, fp, fn, tn) from a labeled worksheet. A modified dialog labeled
    correct is a true positive; an unchanged dialog labeled incorrect is a
    missed correction."""
    tp = fp = fn = tn = 0
    for row in rows:
        label = row["label"].strip().lower()
        if label not in ("correct", "incorrect"):
            raise ValueError(f"dialog {row['dialog_id']}: label must be correct/incorrect, got {row['label']!r}")
        ok = label == "correct"
        if row["stratum"] == MODIFIED:
            tp, fp = tp + ok, fp + (not ok)
        else:
            tn, fn = tn + ok, fn + (not ok)
    return tp, fp, fn, tn


@dataclass(frozen=True)
class VerificationMetrics:
    precision: float
    recall: float
    f1: float


def _ratio(num: int, den: int, name: str) -> float:
    if den == 0:
        warnings.warn(f"{name} undefined (zero denominator), reporting 0.0", RuntimeWarning, stacklevel=3)
        return 0.0
    return num / den


def verification_metrics(tp: int, fp: int, fn: int, tn: int) -> VerificationMetrics:
    if min(tp, fp, fn, tn) < 0 or tp + fp + fn + tn == 0:
        raise ValueError("counts must be non-negative and not all zero")
    precision = _ratio(tp, tp + fp, "precision")
    recall = _ratio(tp, tp + fn, "recall")
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return VerificationMetrics(precision, recall, f1)
