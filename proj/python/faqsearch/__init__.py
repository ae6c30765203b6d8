"""Intent-gated FAQ retrieval for e-commerce search."""

import json

from ._core import (
    FaqEntry,
    FeedbackLog,
    Index,
    Intent,
    IntentModel,
    LabeledQuery,
    Pipeline,
    Reformulator,
    ValidationError,
    compute_classification,
    compute_retrieval,
    extract_keywords,
    generate_synthetic_corpus,
    load_faq_corpus,
    normalize_query,
    read_feedback_log,
    split_dataset,
    starts_with_question_word,
    tokenize_terms,
    train_intent_model,
)


def search(pipeline, query):
    """Runs `query` through `pipeline` and returns the response as a dict."""
    return json.loads(pipeline.search_json(query))


__all__ = [
    "FaqEntry",
    "FeedbackLog",
    "Index",
    "Intent",
    "IntentModel",
    "LabeledQuery",
    "Pipeline",
    "Reformulator",
    "ValidationError",
    "compute_classification",
    "compute_retrieval",
    "extract_keywords",
    "generate_synthetic_corpus",
    "load_faq_corpus",
    "normalize_query",
    "read_feedback_log",
    "search",
    "split_dataset",
    "starts_with_question_word",
    "tokenize_terms",
    "train_intent_model",
]
