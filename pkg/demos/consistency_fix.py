"""
Finding forgotten annotations
=============================

Two dialogs share the same context. In both, the system suggests a named
attraction and the user follows up on it. Only one of them records the name
in the belief state. The checker finds the gap and the fixer closes it, so
the twins end up with identical states.
"""

from dstdoctor.consistency import (
    apply_corrections,
    check_corpus,
    correction_stats,
    load_rules,
    render_source_table,
    render_stats_table,
    sample_verification,
    verification_metrics,
)
from dstdoctor.corpus import Corpus, Dialog, DialogTurn, Ontology, OntologyEntry, SlotTriple


def state(*items):
    return frozenset(SlotTriple.parse(x) for x in items)


def twin(dialog_id, annotated):
    base = ["attraction.type=architecture", "attraction.area=centre"]
    named = base + (["attraction.name=all saints church"] if annotated else [])
    return Dialog(
        dialog_id,
        frozenset({"attraction"}),
        (
            DialogTurn(0, "I am looking for an architectural attraction in the centre of town.",
                       "All Saints Church is an architectural attraction in the centre. Would you like their phone number?",
                       state(*base)),
            DialogTurn(1, "Yes, what is the entrance fee and the address?",
                       "It is free to enter. The address is Jesus Lane.", state(*named)),
            DialogTurn(2, "Thank you, that is all I need.", "", state(*named)),
        ),
    )


corpus = Corpus("test", (twin("MUL1088.json", False), twin("SNG1088.json", True)))

# Mentions are found by matching ontology values in the normalized text.
ontology = Ontology(
    {
        ("attraction", "area"): OntologyEntry(frozenset({"centre", "north", "south", "east", "west"}), True),
        ("attraction", "type"): OntologyEntry(frozenset({"architecture", "museum", "college"}), True),
        ("attraction", "name"): OntologyEntry(frozenset({"all saints church", "kettles yard"}), False),
    }
)

# A system-side mention is only added when a rule says the user took up the
# offer: here, an acceptance or follow-up cue in the next user reply and no
# rejection cue.
rules = load_rules()
for rule in rules[:3]:
    print(rule.rule_id, rule.domain, rule.slot_type, rule.side)

proposals = check_corpus(corpus, rules, ontology)
for p in proposals:
    print("proposed:", p.dialog_id, "turn", p.turn_index, p.added, "from", p.side, "via", p.rule_id)

# Applying inserts the triple at the acknowledgment turn and carries it
# forward until the gold state sets a different value for the slot.
fixed, applied = apply_corrections(corpus, proposals)
a, b = fixed.get("MUL1088.json"), fixed.get("SNG1088.json")
print("twins identical after fix:", [t.belief_state for t in a.turns] == [t.belief_state for t in b.turns])

# Running the checker again proposes nothing.
print("second pass proposals:", len(check_corpus(fixed, rules, ontology)))

# Statistics: modified dialogs per slot against dialogs of that domain, and
# which side of the conversation each added value came from.
stats = correction_stats(corpus, fixed, applied)
print(render_stats_table([stats]))
print(render_source_table(stats))

# For manual checking, draw a seeded sample of modified and unchanged
# dialogs. A reviewer labels each row; the counts turn into the usual scores.
for row in sample_verification(corpus, fixed, n_modified=1, n_unchanged=1, seed=0):
    print(row["stratum"], row["dialog_id"], row["diff"] or "-")

m = verification_metrics(tp=97, fp=3, fn=4, tn=96)
print("precision %.3f  recall %.3f  F1 %.3f" % (m.precision, m.recall, m.f1))
