"""Naive reference scorer, written straight from the metric definitions and
sharing no code with dstdoctor.dst_eval."""

from __future__ import annotations

import itertools
from functools import lru_cache


def levenshtein(a: str, b: str) -> int:
    @lru_cache(maxsize=None)
    def d(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + (a[i - 1] != b[j - 1]))

    return d(len(a), len(b))


def sim(a: str, b: str, mode: str) -> float:
    a, b = " ".join(a.lower().split()), " ".join(b.lower().split())
    if mode == "full":
        return 1.0 if not a and not b else 1 - levenshtein(a, b) / max(len(a), len(b))
    if not a or not b:
        return float(a == b)
    s, l = (a, b) if len(a) <= len(b) else (b, a)
    return max(sim(s, l[k : k + len(s)], "full") for k in range(len(l) - len(s) + 1))


def fuzzy_equal(gold: set, pred: set, threshold: float, mode: str) -> bool:
    gold, pred = sorted(gold), sorted(pred)
    if len(gold) != len(pred):
        return False
    for perm in itertools.permutations(pred):
        if all(g[0] == p[0] and g[1] == p[1] and sim(g[2], p[2], mode) >= threshold for g, p in zip(gold, perm)):
            return True
    return False


def score(gold_turns: dict, pred_turns: dict, threshold: float, mode: str):
    """gold_turns/pred_turns: (dialog, turn) -> set of (domain, slot, value)."""
    slots = sorted({(d, s) for st in list(gold_turns.values()) + list(pred_turns.values()) for d, s, _ in st})
    exact = fuzzy = slot_ok = 0
    for key, gold in gold_turns.items():
        pred = pred_turns.get(key, set())
        exact += gold == pred
        fuzzy += fuzzy_equal(gold, pred, threshold, mode)
        for d, s in slots:
            gv = {v for dd, ss, v in gold if (dd, ss) == (d, s)}
            pv = {v for dd, ss, v in pred if (dd, ss) == (d, s)}
            slot_ok += gv == pv
    n = len(gold_turns)
    return exact / n, fuzzy / n, slot_ok / (n * len(slots)) if slots else 0.0
