"""
Scoring a state tracker
=======================

Joint goal accuracy counts a turn as right only when the whole predicted
state matches. That punishes harmless surface differences such as an extra
"hotel" at the end of a name, so a fuzzy variant accepts values whose edit
similarity clears a threshold.
"""

import warnings

from dstdoctor.corpus import Corpus, Dialog, DialogTurn, PredictionSet, SlotTriple
from dstdoctor.dst_eval import (
    EvalConfig,
    compare_evals,
    edit_distance,
    evaluate,
    render_delta,
    render_per_slot,
    render_per_turn,
    similarity,
)

# Full mode compares whole strings; partial mode slides the shorter value
# along the longer one and keeps the best window.
gold, pred = "huntingdon marriott", "huntingdon marriott hotel"
print("edit distance:", edit_distance(gold, pred))
print("full    %.2f" % similarity(gold, pred, "full"))
print("partial %.2f" % similarity(gold, pred, "partial"))
print("centre vs west, full: %.3f" % similarity("centre", "west", "full"))


def state(*items):
    return frozenset(SlotTriple.parse(x) for x in items)


turns = (
    DialogTurn(0, "I need a hotel in the north.", "Any price range?", state("hotel.area=north")),
    DialogTurn(1, "Something expensive.", "The Huntingdon Marriott?", state("hotel.area=north", "hotel.pricerange=expensive")),
    DialogTurn(2, "Yes, book it please.", "",
               state("hotel.area=north", "hotel.pricerange=expensive", "hotel.name=huntingdon marriott")),
)
gold_corpus = Corpus("test", (Dialog("MUL0001.json", frozenset({"hotel", "train"}), turns),))

# The tracker gets the name nearly right and invents a train destination
# nobody asked for in the first turn.
preds = PredictionSet(
    {
        ("MUL0001.json", 0): state("hotel.area=north", "train.destination=cambridge"),
        ("MUL0001.json", 1): state("hotel.area=north", "hotel.pricerange=expensive"),
        ("MUL0001.json", 2): state("hotel.area=north", "hotel.pricerange=expensive", "hotel.name=huntingdon marriott hotel"),
    }
)

for mode in ("full", "partial"):
    r = evaluate(gold_corpus, preds, EvalConfig(0.9, mode))
    print(f"{mode:8s} jga={r.jga:.3f} fuzzy={r.fuzzy_jga:.3f} slot acc={r.slot_accuracy:.3f}")

result = evaluate(gold_corpus, preds, EvalConfig(0.9, "partial"))
print(render_per_turn(result))
print(render_per_slot(result))

# A turn with no prediction is scored as an empty state, with a warning.
partial_preds = PredictionSet({k: v for k, v in preds.entries.items() if k[1] != 1})
with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always")
    worse = evaluate(gold_corpus, partial_preds)
print(caught[0].message)

# Comparing two runs slot by slot shows where the errors moved.
print(render_delta(compare_evals(result, worse)))
