"""
An unseen-entity test set
=========================

A tracker that memorized frequent training entities can look better than
it is. Swapping every named entity in the test set for one never seen in
training, consistently in both the text and the belief states, exposes that.
"""

from dstdoctor.corpus import Corpus, Dialog, DialogTurn, SlotTriple
from dstdoctor.substitute import (
    Pool,
    ReplacementLexicon,
    apply_replacements,
    build_replacement_map,
    leakage_audit,
    mention_coverage,
)


def state(*items):
    return frozenset(SlotTriple.parse(x) for x in items)


test = Corpus(
    "test",
    (
        Dialog(
            "PMUL4547.json",
            frozenset({"hotel"}),
            (
                DialogTurn(0, "Can you tell me about Bridge Guest House?",
                           "Bridge Guest House is a guest house with free wifi.", state("hotel.name=bridge guest house")),
                DialogTurn(1, "Please book bridge guest house for monday.", "",
                           state("hotel.name=bridge guest house", "hotel.internet=yes", "hotel.bookday=monday")),
            ),
        ),
    ),
)
train = Corpus(
    "train",
    (Dialog("T1", frozenset({"hotel"}), (DialogTurn(0, "x", "", state("hotel.name=bridge guest house", "hotel.internet=yes")),)),),
)

# Replacement values come from an external lexicon, one pool per slot.
# Closed classes like internet stay as they are, and so do days and counts.
lexicon = ReplacementLexicon(
    {
        ("hotel", "name"): Pool(("best western of long beach", "seaside inn", "mountain lodge"), provenance="schema-guided hotels"),
        ("hotel", "internet"): Pool(("yes", "no", "free"), replaceable=False),
    }
)

# The map is drawn per dialog from a seeded generator, so it is reproducible
# and independent of dialog order.
rmap = build_replacement_map(test, train, lexicon, seed=4)
print(rmap.to_json())

new = apply_replacements(test, rmap)
for turn in new.dialogs[0].turns:
    print("U:", turn.user_utterance)
    print("S:", turn.system_response)
    print("  ", sorted(str(t) for t in turn.belief_state))

# No replaceable value of the new test set occurs in training, every state
# value that was mentioned in the text still is, and the inverse map
# restores the original corpus.
print("leaks:", leakage_audit(new, train, lexicon))
print("lost mentions:", mention_coverage(test, new, rmap))
print("round trip:", apply_replacements(new, rmap.inverse()) == test)

# Pinning the pool to a single value forces a particular mapping.
pinned = ReplacementLexicon({("hotel", "name"): Pool(("best western of long beach",))})
print(build_replacement_map(test, train, pinned, seed=0).for_dialog("PMUL4547.json"))
