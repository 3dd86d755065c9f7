"""Sentence classifiers: a trainable linear baseline and a remote client.

The baseline is one-vs-rest logistic regression over hashed unigram/bigram
counts (64-bit FNV-1a, low 18 bits), trained by plain SGD with a per-epoch
1/t learning-rate decay and exact L2 via a running scale factor. Everything
is deterministic under the training seed. Heavier models plug in through the
remote inference protocol instead of living in this repo.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import httpx
import numpy as np
import yaml

from .align import LabeledSentence
from .errors import (EmptyDataset, IdMismatch, LabelMismatch, LengthMismatch,
                     ParseError, ProtocolError, RemoteUnavailable, ValidationError)
from .taxonomy import Taxonomy
from .transcript import SentenceRecord, normalize_for_wer

HASH_BITS = 18
FEATURE_DIM = 1 << HASH_BITS
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

TASKS = ("question_binary", "feature_multilabel")
BACKENDS = ("builtin_linear", "remote")
QUESTION_LABEL = "question"


@dataclass(frozen=True)
class ModelDescriptor:
    model_id: str
    task: str
    backend: str
    label_set: tuple[str, ...]
    threshold: float | dict[str, float] = 0.5
    endpoint: str | None = None
    version: str = "1"

    def __post_init__(self):
        object.__setattr__(self, "label_set", tuple(self.label_set))
        if self.task not in TASKS:
            raise ValidationError(f"unknown task {self.task!r}")
        if self.backend not in BACKENDS:
            raise ValidationError(f"unknown backend {self.backend!r}")
        if not self.label_set:
            raise ValidationError("label_set must not be empty")
        if (self.backend == "remote") != (self.endpoint is not None):
            raise ValidationError("endpoint present iff backend is remote")
        for label in self.label_set:
            t = self.threshold_for(label)
            if not (0.0 < t < 1.0):
                raise ValidationError(f"threshold for {label} out of (0,1): {t}")

    def threshold_for(self, label: str) -> float:
        if isinstance(self.threshold, dict):
            return float(self.threshold.get(label, 0.5))
        return float(self.threshold)


def validate_descriptor(descriptor: ModelDescriptor, taxonomy: Taxonomy):
    """Check label_set consistency against a taxonomy."""
    if descriptor.task == "question_binary":
        if tuple(descriptor.label_set) != (QUESTION_LABEL,):
            raise ValidationError('question_binary models use label_set ["question"]')
        return
    known = {f.id for f in taxonomy.features if f.text_classifiable}
    unknown = [l for l in descriptor.label_set if l not in known]
    if unknown:
        raise ValidationError(f"labels not text-classifiable in taxonomy: {unknown}")


@dataclass(frozen=True)
class TrainingConfig:
    epochs: int = 10
    learning_rate: float = 0.1
    l2: float = 1e-4
    seed: int = 42


@dataclass(frozen=True)
class Prediction:
    sentence_id: int
    scores: dict[str, float]
    decided: frozenset[str]


@dataclass
class BaselineModel:
    descriptor: ModelDescriptor
    weights: np.ndarray  # (labels, FEATURE_DIM)
    bias: np.ndarray  # (labels,)
    training_config: TrainingConfig
    warnings: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class EvalReport:
    per_label: dict[str, tuple[float, float, float, int]]  # p, r, f1, support
    macro: tuple[float, float, float]
    confusion_counts: dict[str, tuple[int, int, int]]  # tp, fp, fn


def _fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def featurize(text: str) -> list[tuple[int, float]]:
    """Hashed unigram+bigram counts, sorted by bucket index.

    Stable across runs and platforms: tokens hash with 64-bit FNV-1a and the
    low 18 bits pick the bucket; colliding n-grams pool their counts.
    """
    tokens = normalize_for_wer(text)
    counts: dict[int, float] = {}
    grams = tokens + [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]
    for gram in grams:
        bucket = _fnv1a64(gram.encode("utf-8")) & (FEATURE_DIM - 1)
        counts[bucket] = counts.get(bucket, 0.0) + 1.0
    return sorted(counts.items())


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


def _targets(dataset: list[LabeledSentence], label_set: tuple[str, ...]) -> np.ndarray:
    y = np.zeros((len(dataset), len(label_set)))
    for i, s in enumerate(dataset):
        for j, label in enumerate(label_set):
            if label == QUESTION_LABEL:
                y[i, j] = 1.0 if s.question_flag else 0.0
            else:
                y[i, j] = 1.0 if label in s.labels else 0.0
    return y


def dataset_loss(weights: np.ndarray, bias: np.ndarray,
                 features: list[list[tuple[int, float]]], targets: np.ndarray,
                 l2: float) -> float:
    """Mean logistic loss over samples and labels plus (l2/2)*||W||^2."""
    total = 0.0
    for i, feats in enumerate(features):
        if feats:
            idx = np.array([k for k, _ in feats], dtype=np.int64)
            val = np.array([v for _, v in feats])
            z = weights[:, idx] @ val + bias
        else:
            z = bias.copy()
        p = np.clip(_sigmoid(z), 1e-12, 1 - 1e-12)
        y = targets[i]
        total += float(-(y * np.log(p) + (1 - y) * np.log(1 - p)).sum())
    n = len(features)
    return total / n + 0.5 * l2 * float((weights ** 2).sum())


def dataset_gradient(weights: np.ndarray, bias: np.ndarray,
                     features: list[list[tuple[int, float]]], targets: np.ndarray,
                     l2: float) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradient of dataset_loss (L2 term excludes the bias)."""
    gw = np.zeros_like(weights)
    gb = np.zeros_like(bias)
    for i, feats in enumerate(features):
        if feats:
            idx = np.array([k for k, _ in feats], dtype=np.int64)
            val = np.array([v for _, v in feats])
            z = weights[:, idx] @ val + bias
        else:
            idx = val = None
            z = bias.copy()
        err = _sigmoid(z) - targets[i]
        if idx is not None:
            gw[:, idx] += np.outer(err, val)
        gb += err
    n = len(features)
    return gw / n + l2 * weights, gb / n


def train_baseline(dataset: list[LabeledSentence],
                   descriptor: ModelDescriptor,
                   training_config: TrainingConfig | None = None) -> BaselineModel:
    """SGD over one-vs-rest logistic losses; deterministic under the seed.

    Labels with zero positive examples still train but are flagged in the
    model's warning list.
    """
    if not dataset:
        raise EmptyDataset("cannot train on an empty dataset")
    if descriptor.backend != "builtin_linear":
        raise ValidationError("train_baseline only fits builtin_linear models")
    cfg = training_config or TrainingConfig()
    label_set = descriptor.label_set
    n = len(dataset)

    features = [featurize(s.text) for s in dataset]
    y = _targets(dataset, label_set)

    warnings = []
    for j, label in enumerate(label_set):
        if y[:, j].sum() == 0:
            warnings.append(f"degenerate label {label}: no positive examples")

    bias = np.zeros(len(label_set))
    # exact L2 without dense per-step decay: weights = scale * raw
    raw = np.zeros((len(label_set), FEATURE_DIM))
    scale = 1.0
    rng = np.random.default_rng(cfg.seed)
    for epoch in range(1, cfg.epochs + 1):
        eta = cfg.learning_rate / epoch
        for i in rng.permutation(n):
            feats = features[i]
            if feats:
                idx = np.array([k for k, _ in feats], dtype=np.int64)
                val = np.array([v for _, v in feats])
                z = scale * (raw[:, idx] @ val) + bias
            else:
                idx = val = None
                z = bias.copy()
            err = _sigmoid(z) - y[i]
            scale *= 1.0 - eta * cfg.l2
            if scale < 1e-9:  # re-absorb to keep raw well-scaled
                raw *= scale
                scale = 1.0
            if idx is not None:
                raw[:, idx] -= (eta / scale) * np.outer(err, val)
            bias -= eta * err
    weights = scale * raw
    return BaselineModel(descriptor=descriptor, weights=weights, bias=bias,
                         training_config=cfg, warnings=warnings)


def _score_sentence(model: BaselineModel, text: str) -> np.ndarray:
    feats = featurize(text)
    if feats:
        idx = np.array([k for k, _ in feats], dtype=np.int64)
        val = np.array([v for _, v in feats])
        z = model.weights[:, idx] @ val + model.bias
    else:
        z = model.bias.copy()
    return _sigmoid(z)


def _decide(descriptor: ModelDescriptor, scores: dict[str, float]) -> frozenset[str]:
    # strict rule: a label is decided only when its score exceeds the threshold
    return frozenset(
        label for label, score in scores.items()
        if score > descriptor.threshold_for(label))


def predict(model: BaselineModel | ModelDescriptor,
            sentences: list[SentenceRecord],
            timeout: float = 30.0,
            client: httpx.Client | None = None) -> list[Prediction]:
    """Score each sentence; one Prediction per input, order preserved."""
    if isinstance(model, BaselineModel):
        descriptor = model.descriptor
        predictions = []
        for s in sentences:
            p = _score_sentence(model, s.text)
            scores = {label: float(p[j]) for j, label in enumerate(descriptor.label_set)}
            predictions.append(Prediction(
                sentence_id=s.sentence_id, scores=scores,
                decided=_decide(descriptor, scores)))
        return predictions

    descriptor = model
    if descriptor.backend != "remote":
        raise ValidationError("predict needs a BaselineModel or a remote descriptor")
    return _predict_remote(descriptor, sentences, timeout, client)


def _predict_remote(descriptor: ModelDescriptor, sentences: list[SentenceRecord],
                    timeout: float, client: httpx.Client | None) -> list[Prediction]:
    body = {
        "model_id": descriptor.model_id,
        "sentences": [{"sentence_id": s.sentence_id, "text": s.text}
                      for s in sentences],
    }
    close = False
    if client is None:
        client = httpx.Client(timeout=timeout)
        close = True
    try:
        try:
            response = client.post(descriptor.endpoint, json=body, timeout=timeout)
        except (httpx.ConnectError, httpx.TimeoutException) as exc:
            raise RemoteUnavailable(f"{descriptor.endpoint}: {exc}") from exc
        if response.status_code < 200 or response.status_code >= 300:
            raise ProtocolError(
                f"inference endpoint returned {response.status_code}: "
                f"{response.text[:200]}")
        try:
            doc = response.json()
        except (json.JSONDecodeError, ValueError) as exc:
            raise ProtocolError(f"non-JSON inference response: {exc}") from exc
    finally:
        if close:
            client.close()

    if not isinstance(doc, dict) or "predictions" not in doc:
        raise ProtocolError('inference response missing "predictions"')
    rows = doc["predictions"]
    if not isinstance(rows, list) or len(rows) != len(sentences):
        raise ProtocolError(
            f"inference response has {len(rows) if isinstance(rows, list) else '?'} "
            f"rows for {len(sentences)} sentences")
    wanted = set(descriptor.label_set)
    by_id = {}
    for row in rows:
        if not isinstance(row, dict) or "sentence_id" not in row or "scores" not in row:
            raise ProtocolError(f"malformed prediction row: {row!r}")
        scores = row["scores"]
        if not isinstance(scores, dict):
            raise ProtocolError(f"scores must be an object: {scores!r}")
        extra = set(scores) - wanted
        if extra:
            raise LabelMismatch(f"remote scored unknown labels: {sorted(extra)}")
        missing = wanted - set(scores)
        if missing:
            raise LabelMismatch(f"remote omitted labels: {sorted(missing)}")
        by_id[row["sentence_id"]] = {l: float(v) for l, v in scores.items()}

    predictions = []
    for s in sentences:
        if s.sentence_id not in by_id:
            raise ProtocolError(f"remote response missing sentence {s.sentence_id}")
        scores = by_id[s.sentence_id]
        predictions.append(Prediction(
            sentence_id=s.sentence_id, scores=scores,
            decided=_decide(descriptor, scores)))
    return predictions


def evaluate(predictions: list[Prediction], gold: list[LabeledSentence],
             label_set: tuple[str, ...] | list[str]) -> EvalReport:
    """Per-label precision/recall/F1 with 0/0 defined as 0; macro averages
    only labels that have gold support."""
    if len(predictions) != len(gold):
        raise LengthMismatch(f"{len(predictions)} predictions vs {len(gold)} gold")
    for p, g in zip(predictions, gold):
        if p.sentence_id != g.sentence_id:
            raise IdMismatch(f"prediction {p.sentence_id} vs gold {g.sentence_id}")

    per_label = {}
    confusion = {}
    macro_parts = []
    for label in label_set:
        tp = fp = fn = 0
        for p, g in zip(predictions, gold):
            if label == QUESTION_LABEL:
                truth = g.question_flag
            else:
                truth = label in g.labels
            predicted = label in p.decided
            if predicted and truth:
                tp += 1
            elif predicted and not truth:
                fp += 1
            elif truth:
                fn += 1
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        support = tp + fn
        per_label[label] = (precision, recall, f1, support)
        confusion[label] = (tp, fp, fn)
        if support > 0:
            macro_parts.append((precision, recall, f1))

    if macro_parts:
        macro = tuple(sum(part[k] for part in macro_parts) / len(macro_parts)
                      for k in range(3))
    else:
        macro = (0.0, 0.0, 0.0)
    return EvalReport(per_label=per_label, macro=macro, confusion_counts=confusion)


# -- persistence ---------------------------------------------------------------

def save_weights(model: BaselineModel, path: str):
    np.savez_compressed(
        path,
        weights=model.weights,
        bias=model.bias,
        label_set=np.array(model.descriptor.label_set, dtype=object),
        config=np.array([model.training_config.epochs,
                         model.training_config.learning_rate,
                         model.training_config.l2,
                         model.training_config.seed]),
    )


def load_weights(descriptor: ModelDescriptor, path: str) -> BaselineModel:
    data = np.load(path, allow_pickle=True)
    labels = tuple(str(l) for l in data["label_set"])
    if labels != tuple(descriptor.label_set):
        raise ValidationError(
            f"stored labels {labels} do not match descriptor {descriptor.label_set}")
    cfg = data["config"]
    return BaselineModel(
        descriptor=descriptor,
        weights=data["weights"],
        bias=data["bias"],
        training_config=TrainingConfig(
            epochs=int(cfg[0]), learning_rate=float(cfg[1]),
            l2=float(cfg[2]), seed=int(cfg[3])),
    )


# -- model registry file ---------------------------------------------------------

_REGISTRY_FIELDS = {"model_id", "task", "backend", "label_set", "threshold",
                    "endpoint", "version"}


def load_model_registry(document: str) -> list[ModelDescriptor]:
    """Parse a YAML registry of model descriptors."""
    try:
        raw = yaml.safe_load(document)
    except yaml.YAMLError as exc:
        raise ParseError(f"invalid YAML: {exc}") from exc
    if not isinstance(raw, dict) or "models" not in raw or \
            not isinstance(raw["models"], list):
        raise ParseError('registry document must carry a "models" list')
    extra = set(raw) - {"models", "version"}
    if extra:
        raise ParseError(f"unknown top-level fields: {sorted(extra)}")
    descriptors = []
    for entry in raw["models"]:
        if not isinstance(entry, dict):
            raise ParseError(f"model entry must be a mapping: {entry!r}")
        extra = set(entry) - _REGISTRY_FIELDS
        if extra:
            raise ParseError(f"unknown model fields: {sorted(extra)}")
        try:
            descriptors.append(ModelDescriptor(
                model_id=str(entry["model_id"]),
                task=str(entry["task"]),
                backend=str(entry["backend"]),
                label_set=tuple(entry["label_set"]),
                threshold=entry.get("threshold", 0.5),
                endpoint=entry.get("endpoint"),
                version=str(entry.get("version", "1")),
            ))
        except KeyError as exc:
            raise ParseError(f"model entry missing field {exc}") from exc
    return descriptors


def dump_model_registry(descriptors: list[ModelDescriptor]) -> str:
    doc = {"models": [
        {
            "model_id": d.model_id,
            "task": d.task,
            "backend": d.backend,
            "label_set": list(d.label_set),
            "threshold": d.threshold,
            "endpoint": d.endpoint,
            "version": d.version,
        }
        for d in descriptors
    ]}
    return yaml.safe_dump(doc, sort_keys=False)
