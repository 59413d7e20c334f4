"""Quality tooling for slot-annotated task-oriented dialog corpora."""

__version__ = "0.1.0"

from .bias import bias_report, count_slot_values, min_entropy_normalized, shannon_normalized
from .canonicalize import NormalizationConfig, canonical_value, normalize_text
from .consistency import (
    apply_corrections,
    correction_stats,
    detect_mentions,
    detect_missing_system_annotations,
    detect_missing_user_annotations,
    load_rules,
    sample_verification,
    verification_metrics,
)
from .corpus import (
    Corpus,
    Dialog,
    DialogTurn,
    EntityDatabase,
    Ontology,
    PredictionSet,
    SlotTriple,
    load_corpus,
    load_database,
    load_ontology,
    load_predictions,
    write_corpus,
)
from .dst_eval import compare_evals, evaluate, score_turn, similarity
from .substitute import apply_replacements, build_replacement_map, leakage_audit, load_lexicon

__all__ = [
    "Corpus", "Dialog", "DialogTurn", "EntityDatabase", "NormalizationConfig", "Ontology", "PredictionSet",
    "SlotTriple", "apply_corrections", "apply_replacements", "bias_report", "build_replacement_map",
    "canonical_value", "compare_evals", "correction_stats", "count_slot_values", "detect_mentions",
    "detect_missing_system_annotations", "detect_missing_user_annotations", "evaluate", "leakage_audit",
    "load_corpus", "load_database", "load_lexicon", "load_ontology", "load_predictions", "load_rules",
    "min_entropy_normalized", "normalize_text", "sample_verification", "score_turn", "shannon_normalized",
    "similarity", "verification_metrics", "write_corpus",
]
