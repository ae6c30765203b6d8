import json

import pytest

import faqsearch as fs


def device_faqs():
    return [
        fs.FaqEntry("faq-1", "How do I connect a Bluetooth device to my Apple TV?", "Open Settings."),
        fs.FaqEntry("faq-2", "How do I reset my Kindle?", "Hold the power button."),
        fs.FaqEntry("faq-3", "How do I return a package?", "Use the returns centre."),
    ]


def test_keywords_match_the_worked_example():
    assert fs.extract_keywords("How do I connect a Bluetooth device to my Apple TV") == (
        "connect bluetooth device apple tv"
    )
    assert fs.starts_with_question_word("how do i reset")
    assert not fs.starts_with_question_word("kindle case")


def test_bm25_search_ranks_the_matching_question_first():
    index = fs.Index(device_faqs())
    assert len(index) == 3
    hits = index.search("kindle reset", 5)
    assert hits[0][0] == "faq-2"
    assert all(a[1] >= b[1] for a, b in zip(hits, hits[1:]))
    assert index.search("zebra") == []


def test_empty_corpus_is_rejected():
    with pytest.raises(ValueError):
        fs.Index([])


def test_metrics():
    q, n = fs.Intent.QUESTION, fs.Intent.NON_QUESTION
    r = fs.compute_classification([q, q, n, n], [q, n, q, n])
    assert (r["tp"], r["fp"], r["fn"], r["tn"]) == (1, 1, 1, 1)
    assert r["f1"] == pytest.approx(0.5)
    m = fs.compute_retrieval({"a": ["x", "y"], "b": ["y", "x"]}, {"a": "y", "b": "y"})
    assert m["mrr"] == pytest.approx(0.75)
    assert m["hit_at_1"] == pytest.approx(0.5)


def test_synthetic_training_round_trip(tmp_path):
    faqs, queries = fs.generate_synthetic_corpus(600, 0.2, 3, 40)
    assert len(faqs) == 40 and len(queries) == 600
    train, val, test = fs.split_dataset(queries, 0.5, 0.25, 0.25, 1)
    model = fs.train_intent_model(train, val, seed=1, dims=1 << 12)
    path = tmp_path / "intent.bin"
    model.save(path)
    loaded = fs.IntentModel.load(path)
    for q in test[:50]:
        assert loaded.probability(q.query) == model.probability(q.query)
    correct = sum(model.classify(q.query) == q.intent for q in test)
    assert correct / len(test) > 0.9

    pairs = [(q.query, q.gold_reformulation) for q in train if q.gold_reformulation]
    reformulator = fs.Reformulator.from_pairs(pairs)
    assert reformulator.reformulate("kindle reset").strip()
    assert fs.Reformulator.identity().reformulate("kindle reset") == "kindle reset"


def test_feedback_log_dedups_and_recovers(tmp_path):
    path = tmp_path / "feedback.jsonl"
    log = fs.FeedbackLog(path)
    assert log.append("kindle reset", "faq-2", "helpful", "s1")
    assert not log.append("Kindle  reset", "faq-2", "helpful", "s1")
    assert log.append("kindle reset", "faq-2", "not_helpful", "s1")
    del log
    with open(path, "a") as f:
        f.write('{"query": "torn')
    reopened = fs.FeedbackLog(path)
    assert reopened.recovered_records == 2
    assert reopened.quarantined_bytes > 0
    records = fs.read_feedback_log(path)
    assert [r["verdict"] for r in records] == ["helpful", "not_helpful"]
    with pytest.raises(ValueError):
        reopened.append("q", "faq-1", "maybe", "s1")


def test_pipeline_from_config(tmp_path):
    corpus = tmp_path / "faqs.jsonl"
    corpus.write_text(
        "".join(json.dumps({"id": f.id, "question": f.question, "answer": f.answer}) + "\n" for f in device_faqs())
    )
    config = tmp_path / "pipeline.conf"
    config.write_text(
        "name = smoke\nintent_source = always_on\nreformulator = identity\nscorer = bm25\ncorpus = faqs.jsonl\n"
    )
    pipeline = fs.Pipeline.from_config(config)
    assert pipeline.name == "smoke"
    response = fs.search(pipeline, "reset kindle")
    assert response["faq"]["id"] == "faq-2"
    assert isinstance(response["products"], list)
