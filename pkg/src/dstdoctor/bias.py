"""Entity bias of slot values, measured with entropies normalized by the
log of the observed support size.

Both metrics use natural logarithms; the base cancels in the ratio.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .corpus import Corpus, SlotKey

POLICIES = ("final-state", "per-turn", "new-assignment")


class DegenerateDistribution(ValueError):
    """Normalized entropy is undefined for a single observed value."""


@dataclass(frozen=True)
class FrequencyVector:
    domain: str
    slot_type: str
    counts: Mapping[str, int]

    def __post_init__(self):
        if not self.counts:
            raise ValueError(f"{self.domain}.{self.slot_type}: empty frequency vector")
        if any(c <= 0 for c in self.counts.values()):
            raise ValueError(f"{self.domain}.{self.slot_type}: counts must be positive")

    @property
    def R(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def r(self) -> np.ndarray:
        c = np.fromiter(self.counts.values(), dtype=float, count=len(self.counts))
        return c / c.sum()

    def top(self) -> tuple[str, float]:
        value = min(self.counts, key=lambda v: (-self.counts[v], v))
        return value, self.counts[value] / self.total


def _frequencies(counts) -> np.ndarray:
    r = np.asarray(counts, dtype=float)
    if r.ndim != 1 or r.size == 0 or np.any(r <= 0):
        raise ValueError("need a non-empty vector of positive counts")
    if r.size < 2:
        raise DegenerateDistribution("normalized entropy needs at least two observed values")
    return r / r.sum()


def normalized_shannon(counts) -> float:
    """Shannon entropy of ``counts`` divided by log(R); 1 means uniform."""
    r = _frequencies(counts)
    return float(-(r * np.log(r)).sum() / np.log(r.size))


def normalized_min_entropy(counts) -> float:
    """Surprisal of the most frequent value divided by log(R)."""
    r = _frequencies(counts)
    return float(-np.log(r.max()) / np.log(r.size))


def shannon_normalized(freq: FrequencyVector) -> float:
    return normalized_shannon(list(freq.counts.values()))


def min_entropy_normalized(freq: FrequencyVector) -> float:
    return normalized_min_entropy(list(freq.counts.values()))


def _triples_to_count(corpus: Corpus, policy: str):
    for dialog in corpus:
        if not dialog.turns:
            continue
        if policy == "final-state":
            yield from dialog.turns[-1].belief_state
        elif policy == "per-turn":
            for turn in dialog.turns:
                yield from turn.belief_state
        else:
            previous: frozenset = frozenset()
            for turn in dialog.turns:
                yield from turn.belief_state - previous
                previous = turn.belief_state


def count_slot_values(corpus: Corpus, policy: str = "final-state") -> list[FrequencyVector]:
    """One frequency vector per slot present in the corpus.

    ``final-state`` counts each dialog's last belief state, ``per-turn``
    counts every turn's state and ``new-assignment`` counts a triple on the
    turn where it first appears (or reappears with a new value).
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown counting policy {policy!r}, expected one of {POLICIES}")
    counts: dict[SlotKey, Counter] = {}
    for t in _triples_to_count(corpus, policy):
        counts.setdefault(t.slot, Counter())[t.value] += 1
    return [
        FrequencyVector(d, s, dict(sorted(c.items(), key=lambda kv: (-kv[1], kv[0]))))
        for (d, s), c in sorted(counts.items())
    ]


@dataclass(frozen=True)
class BiasScore:
    domain: str
    slot_type: str
    R: int
    shannon_normalized: float
    min_entropy_normalized: float
    top_value: str
    top_frequency: float
    degenerate: bool = False


def bias_score(freq: FrequencyVector) -> BiasScore:
    top, share = freq.top()
    if freq.R < 2:
        return BiasScore(freq.domain, freq.slot_type, freq.R, 0.0, 0.0, top, share, degenerate=True)
    return BiasScore(
        freq.domain, freq.slot_type, freq.R, shannon_normalized(freq), min_entropy_normalized(freq), top, share
    )


def rank_scores(scores: Iterable[BiasScore]) -> list[BiasScore]:
    """Least uniform first."""
    return sorted(scores, key=lambda s: (s.shannon_normalized, s.domain, s.slot_type))


def bias_report(corpus: Corpus, policy: str = "final-state") -> list[BiasScore]:
    return rank_scores(bias_score(f) for f in count_slot_values(corpus, policy))


BIAS_COLUMNS = ("domain", "slot_type", "R", "H1/H0", "H∞/H0", "top_value", "top_frequency")


def render_bias_table(scores: Iterable[BiasScore], policy: str | None = None, split: str | None = None) -> str:
    lines = []
    if policy is not None:
        lines.append(f"# policy: {policy}" + (f"\tsplit: {split}" if split else ""))
    lines.append("\t".join(BIAS_COLUMNS))
    for s in scores:
        flag = "\tdegenerate" if s.degenerate else ""
        lines.append(
            f"{s.domain}\t{s.slot_type}\t{s.R}\t{s.shannon_normalized:.3f}\t{s.min_entropy_normalized:.3f}"
            f"\t{s.top_value}\t{s.top_frequency:.3f}{flag}"
        )
    return "\n".join(lines) + "\n"


def parse_bias_table(text: str) -> list[BiasScore]:
    scores = []
    for line in text.splitlines():
        if not line or line.startswith("#") or line.startswith("domain\t"):
            continue
        f = line.split("\t")
        scores.append(BiasScore(f[0], f[1], int(f[2]), float(f[3]), float(f[4]), f[5], float(f[6]), len(f) > 7))
    return scores
