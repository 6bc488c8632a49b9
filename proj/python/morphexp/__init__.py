"""Morphological rule induction, corpus expansion and rare-word synthesis."""

from ._core import (
    EmbeddingTable,
    MorphSet,
    RareWordSynthesizer,
    TransformationRule,
    Vocabulary,
    build_morph_sets,
    config_entries,
    evaluate,
    expand_sentence,
    induce_rules,
    normalize_line,
    run_pipeline,
    spearman_rho,
    train_sgns,
)

__all__ = [
    "EmbeddingTable",
    "MorphSet",
    "RareWordSynthesizer",
    "TransformationRule",
    "Vocabulary",
    "build_morph_sets",
    "config_entries",
    "evaluate",
    "expand_sentence",
    "induce_rules",
    "normalize_line",
    "run_pipeline",
    "spearman_rho",
    "train_sgns",
]
