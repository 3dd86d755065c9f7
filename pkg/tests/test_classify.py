import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from lectio.align import LabeledSentence
from lectio.classify import (FEATURE_DIM, BaselineModel, ModelDescriptor,
                             Prediction, TrainingConfig, dataset_gradient,
                             dataset_loss, dump_model_registry, evaluate,
                             featurize, load_model_registry, load_weights,
                             predict, save_weights, train_baseline,
                             validate_descriptor)
from lectio.errors import (EmptyDataset, IdMismatch, LabelMismatch,
                           LengthMismatch, ParseError, ProtocolError,
                           RemoteUnavailable, ValidationError)
from lectio.transcript import SentenceRecord


def fnv1a64_reference(data: bytes) -> int:
    """Independent FNV-1a reference for the stability vectors."""
    h = 14695981039346656037
    for b in data:
        h ^= b
        h = (h * 1099511628211) % (1 << 64)
    return h


def bucket(gram: str) -> int:
    return fnv1a64_reference(gram.encode()) % FEATURE_DIM


def sentences_of(texts):
    return [SentenceRecord(i, i * 5.0, i * 5.0 + 4.0, t)
            for i, t in enumerate(texts)]


def labeled(texts_labels, question=None):
    out = []
    for i, (text, labels) in enumerate(texts_labels):
        q = question[i] if question else bool(
            {"asking_questions", "student_questions"} & set(labels))
        out.append(LabeledSentence(i, text, i * 5.0, i * 5.0 + 4.0,
                                   frozenset(labels), q))
    return out


# -- featurize ---------------------------------------------------------------

def test_featurize_empty():
    assert featurize("") == []
    assert featurize("  ...  ") == []


def test_featurize_counts():
    pairs = dict(featurize("hello hello"))
    assert pairs[bucket("hello")] == 2.0
    assert pairs[bucket("hello hello")] == 1.0
    assert len(pairs) == 2


def test_featurize_deterministic():
    a = featurize("the quick brown fox")
    b = featurize("the quick brown fox")
    assert a == b


def test_featurize_published_vectors():
    # frozen stability vectors, computed with the independent FNV-1a reference
    assert featurize("hello")[0][0] == bucket("hello") == 179467
    vec = dict(featurize("to sum up"))
    for gram in ("to", "sum", "up", "to sum", "sum up"):
        assert vec[bucket(gram)] >= 1.0
    assert bucket("to") == 180388
    assert bucket("sum") == 246952
    assert bucket("up") == 186752
    assert bucket("to sum") == 22015
    assert bucket("sum up") == 48805
    assert bucket("waves") == 153637
    assert set(vec) == {180388, 246952, 186752, 22015, 48805}


def test_featurize_normalizes_case_and_punct():
    assert featurize("Hello, WORLD!") == featurize("hello world")


# -- descriptors ----------------------------------------------------------------

def test_descriptor_invariants():
    with pytest.raises(ValidationError):
        ModelDescriptor("m", "question_binary", "remote", ("question",))
    with pytest.raises(ValidationError):
        ModelDescriptor("m", "question_binary", "builtin_linear", ("question",),
                        endpoint="http://x")
    with pytest.raises(ValidationError):
        ModelDescriptor("m", "bad_task", "builtin_linear", ("question",))
    with pytest.raises(ValidationError):
        ModelDescriptor("m", "feature_multilabel", "builtin_linear", ())
    with pytest.raises(ValidationError):
        ModelDescriptor("m", "feature_multilabel", "builtin_linear", ("a",),
                        threshold=1.5)


def test_validate_descriptor_against_taxonomy(taxonomy):
    good = ModelDescriptor("m", "feature_multilabel", "builtin_linear",
                           taxonomy.text_label_set)
    validate_descriptor(good, taxonomy)
    bad = ModelDescriptor("m", "feature_multilabel", "builtin_linear",
                          ("writing_on_whiteboard",))
    with pytest.raises(ValidationError):
        validate_descriptor(bad, taxonomy)


# -- training -----------------------------------------------------------------------

TOY_DESCRIPTOR = ModelDescriptor(
    "toy", "feature_multilabel", "builtin_linear", ("assignments",))


def toy_dataset():
    rows = []
    for i in range(10):
        rows.append((f"please submit the homework set {i} by friday",
                     ["assignments"]))
        rows.append((f"the wave equation example number {i} on the board", []))
    return labeled(rows)


def test_train_separable_toy_set():
    dataset = toy_dataset()
    model = train_baseline(dataset, TOY_DESCRIPTOR)
    predictions = predict(model, sentences_of([s.text for s in dataset]))
    report = evaluate(predictions, dataset, TOY_DESCRIPTOR.label_set)
    assert report.per_label["assignments"][2] >= 0.95


def test_train_deterministic():
    dataset = toy_dataset()
    m1 = train_baseline(dataset, TOY_DESCRIPTOR)
    m2 = train_baseline(dataset, TOY_DESCRIPTOR)
    assert np.array_equal(m1.weights, m2.weights)
    assert np.array_equal(m1.bias, m2.bias)


def test_train_degenerate_label_flagged():
    descriptor = ModelDescriptor("toy2", "feature_multilabel", "builtin_linear",
                                 ("assignments", "summing_up"))
    dataset = labeled([("homework due friday", ["assignments"]),
                       ("waves on the board", [])])
    model = train_baseline(dataset, descriptor)
    assert any("summing_up" in w for w in model.warnings)
    predictions = predict(model, sentences_of(["anything at all"]))
    assert "summing_up" not in predictions[0].decided


def test_train_empty_dataset():
    with pytest.raises(EmptyDataset):
        train_baseline([], TOY_DESCRIPTOR)


def test_training_loss_non_increasing():
    dataset = toy_dataset()
    features = [featurize(s.text) for s in dataset]
    from lectio.classify import _targets
    y = _targets(dataset, TOY_DESCRIPTOR.label_set)
    cfg = TrainingConfig()
    zero_w = np.zeros((1, FEATURE_DIM))
    zero_b = np.zeros(1)
    initial = dataset_loss(zero_w, zero_b, features, y, cfg.l2)
    model = train_baseline(dataset, TOY_DESCRIPTOR, cfg)
    final = dataset_loss(model.weights, model.bias, features, y, cfg.l2)
    assert final <= initial


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    dataset = labeled([("alpha beta gamma", ["assignments"]),
                       ("beta delta", []),
                       ("gamma gamma alpha", ["assignments"])])
    features = [featurize(s.text) for s in dataset]
    from lectio.classify import _targets
    y = _targets(dataset, ("assignments",))
    l2 = 1e-4
    active = sorted({idx for f in features for idx, _ in f})
    w = np.zeros((1, FEATURE_DIM))
    for idx in active:
        w[0, idx] = rng.normal(scale=0.5)
    b = rng.normal(scale=0.5, size=1)

    gw, gb = dataset_gradient(w, b, features, y, l2)
    h = 1e-6
    for idx in active:
        w[0, idx] += h
        up = dataset_loss(w, b, features, y, l2)
        w[0, idx] -= 2 * h
        down = dataset_loss(w, b, features, y, l2)
        w[0, idx] += h
        fd = (up - down) / (2 * h)
        rel = abs(fd - gw[0, idx]) / max(abs(fd), abs(gw[0, idx]), 1e-8)
        assert rel < 1e-5, (idx, fd, gw[0, idx])
    b[0] += h
    up = dataset_loss(w, b, features, y, l2)
    b[0] -= 2 * h
    down = dataset_loss(w, b, features, y, l2)
    b[0] += h
    fd = (up - down) / (2 * h)
    assert abs(fd - gb[0]) / max(abs(fd), abs(gb[0]), 1e-8) < 1e-5


# -- predict -----------------------------------------------------------------------

def test_zero_weight_model_scores_half_decides_nothing():
    model = BaselineModel(
        descriptor=TOY_DESCRIPTOR,
        weights=np.zeros((1, FEATURE_DIM)),
        bias=np.zeros(1),
        training_config=TrainingConfig())
    predictions = predict(model, sentences_of(["some words here"]))
    assert predictions[0].scores == {"assignments": 0.5}
    assert predictions[0].decided == frozenset()  # strict > threshold


def test_predict_preserves_order():
    model = BaselineModel(
        descriptor=TOY_DESCRIPTOR,
        weights=np.zeros((1, FEATURE_DIM)),
        bias=np.zeros(1),
        training_config=TrainingConfig())
    predictions = predict(model, sentences_of(["a", "b", "c"]))
    assert [p.sentence_id for p in predictions] == [0, 1, 2]


def test_save_load_weights_round_trip(tmp_path):
    model = train_baseline(toy_dataset(), TOY_DESCRIPTOR)
    path = tmp_path / "toy.npz"
    save_weights(model, str(path))
    loaded = load_weights(TOY_DESCRIPTOR, str(path))
    assert np.array_equal(loaded.weights, model.weights)
    assert np.array_equal(loaded.bias, model.bias)


# -- remote backend ------------------------------------------------------------------

class _RemoteStub:
    """One-shot inference endpoint with a configurable response."""

    def __init__(self, status=200, body=None, raw=None):
        handler_cfg = {"status": status, "body": body, "raw": raw}

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                request = json.loads(self.rfile.read(length)) if length else {}
                if handler_cfg["raw"] is not None:
                    payload = handler_cfg["raw"]
                elif handler_cfg["body"] is not None:
                    payload = json.dumps(handler_cfg["body"]).encode()
                else:
                    rows = [{"sentence_id": s["sentence_id"],
                             "scores": {"question": 0.9}}
                            for s in request.get("sentences", [])]
                    payload = json.dumps(
                        {"model_version": "stub-1", "predictions": rows}).encode()
                self.send_response(handler_cfg["status"])
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def log_message(self, *args):
                pass

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)

    def __enter__(self):
        self.thread.start()
        host, port = self.server.server_address
        return f"http://{host}:{port}/infer"

    def __exit__(self, *exc):
        self.server.shutdown()
        self.server.server_close()


def remote_descriptor(endpoint):
    return ModelDescriptor("rq", "question_binary", "remote", ("question",),
                           endpoint=endpoint)


def test_remote_predict_round_trip():
    with _RemoteStub() as endpoint:
        predictions = predict(remote_descriptor(endpoint),
                              sentences_of(["is this a question?", "no"]))
    assert [p.sentence_id for p in predictions] == [0, 1]
    assert predictions[0].scores == {"question": 0.9}
    assert predictions[0].decided == {"question"}


def test_remote_unknown_label_raises():
    body = {"model_version": "1",
            "predictions": [{"sentence_id": 0, "scores": {"organization": 0.9}}]}
    with _RemoteStub(body=body) as endpoint:
        with pytest.raises(LabelMismatch):
            predict(remote_descriptor(endpoint), sentences_of(["x"]))


def test_remote_non_2xx_raises():
    with _RemoteStub(status=500) as endpoint:
        with pytest.raises(ProtocolError):
            predict(remote_descriptor(endpoint), sentences_of(["x"]))


def test_remote_malformed_json_raises():
    with _RemoteStub(raw=b"not json") as endpoint:
        with pytest.raises(ProtocolError):
            predict(remote_descriptor(endpoint), sentences_of(["x"]))


def test_remote_unreachable_raises():
    descriptor = remote_descriptor("http://127.0.0.1:1/infer")
    with pytest.raises(RemoteUnavailable):
        predict(descriptor, sentences_of(["x"]), timeout=0.5)


# -- evaluate ------------------------------------------------------------------------

def confusion_oracle(predictions, gold, label):
    """Direct nested counting, independent of evaluate()."""
    tp = fp = fn = 0
    for p, g in zip(predictions, gold):
        truth = g.question_flag if label == "question" else label in g.labels
        predicted = label in p.decided
        tp += predicted and truth
        fp += predicted and not truth
        fn += (not predicted) and truth
    return tp, fp, fn


def test_evaluate_perfect():
    gold = labeled([("a?", ["asking_questions"]), ("b", [])])
    predictions = [
        Prediction(0, {"asking_questions": 0.9}, frozenset({"asking_questions"})),
        Prediction(1, {"asking_questions": 0.1}, frozenset()),
    ]
    report = evaluate(predictions, gold, ("asking_questions",))
    assert report.per_label["asking_questions"][:3] == (1.0, 1.0, 1.0)
    assert report.macro == (1.0, 1.0, 1.0)


def test_f1_of_20_50():
    # p=0.2, r=0.5 -> f1 = 2*.2*.5/.7
    # tp=1 fp=4 -> p=0.2 ; fn=1 -> r=0.5
    gold = labeled([("x", ["organization"]) if i < 2 else ("x", [])
                    for i in range(7)])
    decided = [0, 2, 3, 4, 5]  # predicts organization on 5 sentences, 1 correct
    predictions = [
        Prediction(i, {"organization": 0.9 if i in decided else 0.1},
                   frozenset({"organization"}) if i in decided else frozenset())
        for i in range(7)
    ]
    report = evaluate(predictions, gold, ("organization",))
    p, r, f1, support = report.per_label["organization"]
    assert p == pytest.approx(0.2)
    assert r == pytest.approx(0.5)
    assert f1 == pytest.approx(0.2857, abs=1e-4)


def test_evaluate_matches_oracle_randomized():
    import random

    rng = random.Random(5)
    labels = ("a", "b", "c", "d", "e", "f")
    for _ in range(300):
        n = rng.randint(1, 50)
        gold = labeled([
            ("t", [l for l in labels if rng.random() < 0.3]) for _ in range(n)])
        predictions = [
            Prediction(i, {l: 1.0 for l in labels},
                       frozenset(l for l in labels if rng.random() < 0.3))
            for i in range(n)
        ]
        report = evaluate(predictions, gold, labels)
        for label in labels:
            assert report.confusion_counts[label] == \
                confusion_oracle(predictions, gold, label)


def test_evaluate_mismatches():
    gold = labeled([("a", [])])
    with pytest.raises(LengthMismatch):
        evaluate([], gold, ("x",))
    with pytest.raises(IdMismatch):
        evaluate([Prediction(5, {}, frozenset())], gold, ("x",))


def test_macro_skips_zero_support_labels():
    gold = labeled([("a", ["organization"])])
    predictions = [Prediction(0, {"organization": 1.0, "summing_up": 0.0},
                              frozenset({"organization"}))]
    report = evaluate(predictions, gold, ("organization", "summing_up"))
    assert report.macro == (1.0, 1.0, 1.0)


# -- registry file --------------------------------------------------------------------

def test_registry_round_trip():
    descriptors = [
        ModelDescriptor("q1", "question_binary", "builtin_linear", ("question",)),
        ModelDescriptor("r1", "feature_multilabel", "remote",
                        ("organization", "summing_up"), threshold=0.6,
                        endpoint="http://models.internal/infer", version="3"),
    ]
    text = dump_model_registry(descriptors)
    assert load_model_registry(text) == descriptors


def test_registry_rejects_unknown_fields():
    with pytest.raises(ParseError):
        load_model_registry("models:\n  - model_id: x\n    surprise: 1\n")
    with pytest.raises(ParseError):
        load_model_registry("not a mapping")
