"""Dialog state tracking scores: exact and fuzzy joint goal accuracy, slot
accuracy, and per-slot error-turn tables."""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .canonicalize import DEFAULT_CONFIG, NormalizationConfig, normalize_text
from .corpus import Corpus, CorpusError, Ontology, PredictionSet, SlotKey, SlotTriple, state_slots

FULL, PARTIAL = "full", "partial"
CORRECT, WRONG_VALUE, MISSING, SPURIOUS = "correct", "wrong-value", "missing", "spurious"


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance with unit costs."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        current = [i]
        for j, cb in enumerate(b, 1):
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb)))
        previous = current
    return previous[-1]


def _full(a: str, b: str) -> float:
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - edit_distance(a, b) / longest


def similarity(a: str, b: str, mode: str = PARTIAL, config: NormalizationConfig = DEFAULT_CONFIG) -> float:
    """Normalized edit similarity in [0, 1].

    ``full`` compares the whole strings. ``partial`` slides the shorter
    string over every window of the same length in the longer one and keeps
    the best score, so a value contained in the other scores 1.0.
    """
    a, b = normalize_text(a, config), normalize_text(b, config)
    if mode == FULL:
        return _full(a, b)
    if mode != PARTIAL:
        raise ValueError(f"unknown similarity mode {mode!r}")
    if not a or not b:
        return 1.0 if a == b else 0.0
    short, long_ = sorted((a, b), key=len)
    n = len(short)
    return max(_full(short, long_[i : i + n]) for i in range(len(long_) - n + 1))


@dataclass(frozen=True)
class EvalConfig:
    fuzzy_threshold: float = 0.9
    fuzzy_mode: str = PARTIAL
    normalization: NormalizationConfig = DEFAULT_CONFIG

    def __post_init__(self):
        if not 0 < self.fuzzy_threshold <= 1:
            raise ValueError(f"fuzzy threshold must be in (0, 1], got {self.fuzzy_threshold}")
        if self.fuzzy_mode not in (FULL, PARTIAL):
            raise ValueError(f"unknown fuzzy mode {self.fuzzy_mode!r}")


@dataclass(frozen=True)
class TurnScore:
    dialog_id: str
    turn_index: int
    exact_joint: bool
    fuzzy_joint: bool
    outcomes: Mapping[SlotKey, str]


def _slot_exact(gold: set[str], pred: set[str]) -> bool:
    # several gold values are alternatives; one predicted alternative suffices
    return gold == pred or (len(gold) > 1 and len(pred) == 1 and pred <= gold)


def _slot_fuzzy(gold: set[str], pred: set[str], config: EvalConfig) -> bool:
    def close(g, p):
        return similarity(g, p, config.fuzzy_mode, config.normalization) >= config.fuzzy_threshold

    if len(gold) > 1 and len(pred) == 1:
        (p,) = pred
        return any(close(g, p) for g in gold)
    if len(gold) != len(pred):
        return False
    gold_l, pred_l = sorted(gold), sorted(pred)
    return any(all(close(g, p) for g, p in zip(gold_l, perm)) for perm in itertools.permutations(pred_l))


def score_turn(
    gold: Iterable[SlotTriple],
    pred: Iterable[SlotTriple],
    fuzzy_threshold: float = 0.9,
    mode: str = PARTIAL,
    *,
    config: EvalConfig | None = None,
    dialog_id: str = "",
    turn_index: int = 0,
) -> TurnScore:
    config = config or EvalConfig(fuzzy_threshold, mode)
    g, p = state_slots(gold), state_slots(pred)
    outcomes = {}
    exact = fuzzy = True
    for slot in sorted(set(g) | set(p)):
        if slot not in p:
            outcomes[slot] = MISSING
            exact = fuzzy = False
        elif slot not in g:
            outcomes[slot] = SPURIOUS
            exact = fuzzy = False
        elif _slot_exact(g[slot], p[slot]):
            outcomes[slot] = CORRECT
        else:
            outcomes[slot] = WRONG_VALUE
            exact = False
            fuzzy = fuzzy and _slot_fuzzy(g[slot], p[slot], config)
    return TurnScore(dialog_id, turn_index, exact, fuzzy, outcomes)


@dataclass
class EvalResult:
    jga: float
    fuzzy_jga: float
    slot_accuracy: float
    error_turn_counts: dict[SlotKey, int]
    error_turn_fractions: dict[SlotKey, float]
    turn_total: int
    missing_predictions: int = 0
    turn_scores: list[TurnScore] = field(default_factory=list, repr=False)
    config: EvalConfig = field(default_factory=EvalConfig, repr=False)

    def summary(self) -> dict:
        return {
            "jga": self.jga,
            "fuzzy_jga": self.fuzzy_jga,
            "slot_accuracy": self.slot_accuracy,
            "turns": self.turn_total,
            "missing_predictions": self.missing_predictions,
            "fuzzy_threshold": self.config.fuzzy_threshold,
            "fuzzy_mode": self.config.fuzzy_mode,
            "error_turns": {f"{d}.{s}": n for (d, s), n in sorted(self.error_turn_counts.items())},
            "error_fractions": {f"{d}.{s}": x for (d, s), x in sorted(self.error_turn_fractions.items())},
        }


def evaluate(
    gold: Corpus,
    preds: PredictionSet,
    config: EvalConfig | None = None,
    ontology: Ontology | None = None,
) -> EvalResult:
    """Score every gold turn. Turns without a prediction count as an empty
    prediction. The slot-accuracy universe is the ontology's slots when
    given, otherwise every slot seen in gold or predictions; absent on both
    sides counts as correct."""
    config = config or EvalConfig()
    turns = {(d.id, t.index): t.belief_state for d in gold for t in d.turns}
    unknown = sorted(set(preds.entries) - set(turns))
    if unknown:
        raise CorpusError(f"predictions for turns not in the gold corpus: {unknown[:5]}")
    if ontology is not None:
        universe = ontology.slots()
    else:
        universe = sorted(gold.slots() | {t.slot for s in preds.entries.values() for t in s})

    scores = []
    missing = 0
    for key in sorted(turns):
        pred = preds.entries.get(key)
        if pred is None:
            missing += 1
            pred = frozenset()
        scores.append(score_turn(turns[key], pred, config=config, dialog_id=key[0], turn_index=key[1]))
    if missing:
        warnings.warn(f"{missing} gold turns have no prediction; scored as empty states", RuntimeWarning, stacklevel=2)

    n = len(scores)
    errors = {slot: 0 for slot in universe}
    in_scope = {slot: 0 for slot in universe}
    slot_correct = 0
    for s in scores:
        slot_correct += sum(s.outcomes.get(slot, CORRECT) == CORRECT for slot in universe)
        # slots outside the ontology still show up in the error table
        for slot, outcome in s.outcomes.items():
            in_scope[slot] = in_scope.get(slot, 0) + 1
            errors[slot] = errors.get(slot, 0) + (outcome != CORRECT)
    return EvalResult(
        jga=sum(s.exact_joint for s in scores) / n if n else 0.0,
        fuzzy_jga=sum(s.fuzzy_joint for s in scores) / n if n else 0.0,
        slot_accuracy=slot_correct / (n * len(universe)) if n and universe else 0.0,
        error_turn_counts=dict(sorted(errors.items())),
        error_turn_fractions={k: errors[k] / in_scope[k] if in_scope[k] else 0.0 for k in sorted(errors)},
        turn_total=n,
        missing_predictions=missing,
        turn_scores=scores,
        config=config,
    )


@dataclass(frozen=True)
class DeltaReport:
    jga_a: float
    jga_b: float
    fuzzy_jga_a: float
    fuzzy_jga_b: float
    rows: tuple[tuple[SlotKey, int, int], ...]

    @property
    def jga_delta(self) -> float:
        return self.jga_b - self.jga_a

    @property
    def fuzzy_jga_delta(self) -> float:
        return self.fuzzy_jga_b - self.fuzzy_jga_a

    def delta(self, domain: str, slot_type: str) -> int:
        for slot, a, b in self.rows:
            if slot == (domain, slot_type):
                return b - a
        raise KeyError(f"{domain}.{slot_type}")


def compare_evals(a: EvalResult, b: EvalResult) -> DeltaReport:
    """Per-slot error-turn changes going from ``a`` to ``b``."""
    if set(a.error_turn_counts) != set(b.error_turn_counts):
        only_a = sorted(set(a.error_turn_counts) - set(b.error_turn_counts))
        only_b = sorted(set(b.error_turn_counts) - set(a.error_turn_counts))
        raise ValueError(f"slot universes differ: only in first {only_a}, only in second {only_b}")
    rows = tuple((slot, a.error_turn_counts[slot], b.error_turn_counts[slot]) for slot in sorted(a.error_turn_counts))
    return DeltaReport(a.jga, b.jga, a.fuzzy_jga, b.fuzzy_jga, rows)


def render_summary(result: EvalResult) -> str:
    c = result.config
    return (
        "metric\tvalue\n"
        f"jga\t{result.jga:.4f}\n"
        f"fuzzy_jga\t{result.fuzzy_jga:.4f}\n"
        f"slot_accuracy\t{result.slot_accuracy:.4f}\n"
        f"turns\t{result.turn_total}\n"
        f"missing_predictions\t{result.missing_predictions}\n"
        f"fuzzy_threshold\t{c.fuzzy_threshold}\n"
        f"fuzzy_mode\t{c.fuzzy_mode}\n"
    )


def render_per_slot(result: EvalResult) -> str:
    lines = ["domain\tslot_type\terror_turns\terror_fraction"]
    for (d, s), n in sorted(result.error_turn_counts.items()):
        lines.append(f"{d}\t{s}\t{n}\t{result.error_turn_fractions[(d, s)]:.4f}")
    return "\n".join(lines) + "\n"


def render_per_turn(result: EvalResult) -> str:
    lines = ["dialog_id\tturn\texact\tfuzzy\terrors"]
    for s in result.turn_scores:
        errs = ",".join(f"{d}.{st}:{o}" for (d, st), o in sorted(s.outcomes.items()) if o != CORRECT)
        lines.append(f"{s.dialog_id}\t{s.turn_index}\t{int(s.exact_joint)}\t{int(s.fuzzy_joint)}\t{errs}")
    return "\n".join(lines) + "\n"


def render_delta(report: DeltaReport) -> str:
    lines = [
        f"# jga\t{report.jga_a:.4f}\t{report.jga_b:.4f}\t{report.jga_delta:+.4f}",
        "domain\tslot_type\terrors_a\terrors_b\tdelta",
    ]
    for (d, s), a, b in report.rows:
        lines.append(f"{d}\t{s}\t{a}\t{b}\t{b - a:+d}")
    return "\n".join(lines) + "\n"


def dumps_summary(result: EvalResult) -> str:
    return json.dumps(result.summary(), indent=2, sort_keys=True) + "\n"
