"""Experiment information extraction: corpus model, classifiers, CRF tagger, evaluation."""

from ._core import (
    BioError,
    Corpus,
    CorpusError,
    EmbeddingError,
    EmbeddingTable,
    Model,
    agreement,
    bio_decode,
    bio_encode,
    cohens_kappa,
    crf_log_partition,
    crf_viterbi,
    crossval,
    evaluate,
    is_valid_bio,
    load_embeddings,
    parse_embeddings,
    prf,
    span_prf,
    train,
)

__all__ = [
    "BioError",
    "Corpus",
    "CorpusError",
    "EmbeddingError",
    "EmbeddingTable",
    "Model",
    "agreement",
    "bio_decode",
    "bio_encode",
    "cohens_kappa",
    "crf_log_partition",
    "crf_viterbi",
    "crossval",
    "evaluate",
    "is_valid_bio",
    "load_embeddings",
    "parse_embeddings",
    "prf",
    "span_prf",
    "train",
]
