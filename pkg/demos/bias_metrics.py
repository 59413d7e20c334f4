"""
How skewed is a slot?
=====================

Two normalized entropies summarize how evenly a slot's values are spread.
Both are 1 for a uniform distribution and fall towards 0 as one value takes
over. The min-entropy only looks at the most frequent value, so it reacts
much more strongly to a single dominant entity.
"""

import numpy as np

from dstdoctor.bias import (
    FrequencyVector,
    bias_report,
    bias_score,
    normalized_min_entropy,
    normalized_shannon,
    render_bias_table,
)
from dstdoctor.corpus import Corpus, Dialog, DialogTurn, SlotTriple

# Destination counts for the train domain of a large booking corpus.
# One station accounts for half of all bookings.
destinations = {
    "cambridge": 8086, "london liverpool street": 760, "leicester": 746, "stansted airport": 711,
    "stevenage": 710, "ely": 695, "norwich": 692, "bishops stortford": 667, "broxbourne": 634,
    "peterborough": 630, "birmingham new street": 624, "london kings cross": 609, "kings lynn": 574,
}
counts = np.array(list(destinations.values()))
print("values:", counts.size, " total:", counts.sum(), " top share: %.3f" % (counts.max() / counts.sum()))
print("H1/H0   = %.3f" % normalized_shannon(counts))
print("Hinf/H0 = %.3f" % normalized_min_entropy(counts))

# A uniform slot scores 1 on both, whatever its size.
for r in (2, 13, 50):
    print(r, "uniform values:", normalized_shannon(np.ones(r)), normalized_min_entropy(np.ones(r)))

# Pushing more and more mass onto one value drives both scores to 0,
# min-entropy first.
for k in range(1, 7):
    skewed = [10**k] + [1] * 12
    print("top x%-8d H1/H0=%.4f  Hinf/H0=%.4f" % (10**k, normalized_shannon(skewed), normalized_min_entropy(skewed)))

# The same numbers come out of a corpus: one dialog per booking, counted
# from each dialog's final belief state, and rendered as a ranked table.
dialogs = []
for value, c in destinations.items():
    for _ in range(c):
        i = len(dialogs)
        state = frozenset({SlotTriple("train", "destination", value), SlotTriple("train", "day", ["monday", "friday"][i % 2])})
        dialogs.append(Dialog(f"D{i:05d}", frozenset({"train"}), (DialogTurn(0, "a train please", "", state),)))
corpus = Corpus("train", tuple(dialogs))

scores = bias_report(corpus)
print(render_bias_table(scores, "final-state", corpus.split))

# A slot with a single observed value has no spread to measure. It is
# reported with both scores at 0 and flagged as degenerate.
print(bias_score(FrequencyVector("hotel", "type", {"hotel": 42})))
