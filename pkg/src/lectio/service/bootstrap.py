"""Default model bootstrap.

The service ships two builtin linear models, trained deterministically at
first startup from the bundled synthetic keyword dataset: a binary question
detector and the six-label feature model. Weights live under
DATA_DIR/models/<model_id>.npz; administrators can replace or extend the
registry through the API.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from ..align import LabeledSentence, import_dataset
from ..classify import (BaselineModel, ModelDescriptor, QUESTION_LABEL,
                        load_weights, save_weights, train_baseline)
from ..errors import ValidationError
from ..store import Store
from ..taxonomy import Taxonomy, default_taxonomy

QUESTION_MODEL_ID = "questions_v1"
TEXT_MODEL_ID = "text_features_v1"


def default_descriptors(taxonomy: Taxonomy) -> list[ModelDescriptor]:
    return [
        ModelDescriptor(model_id=QUESTION_MODEL_ID, task="question_binary",
                        backend="builtin_linear", label_set=(QUESTION_LABEL,)),
        ModelDescriptor(model_id=TEXT_MODEL_ID, task="feature_multilabel",
                        backend="builtin_linear",
                        label_set=tuple(taxonomy.text_label_set)),
    ]


def load_bundled_dataset(taxonomy: Taxonomy | None = None) -> list[LabeledSentence]:
    text = resources.files("lectio.data").joinpath(
        "synthetic_sentences.csv").read_text(encoding="utf-8")
    return import_dataset(text, taxonomy or default_taxonomy())


def weights_path(models_dir: Path, model_id: str) -> Path:
    return models_dir / f"{model_id}.npz"


def ensure_default_models(store: Store, models_dir: Path,
                          taxonomy: Taxonomy | None = None):
    """Register and train the builtin models if absent; idempotent."""
    taxonomy = taxonomy or default_taxonomy()
    dataset = None
    for descriptor in default_descriptors(taxonomy):
        if store.get_model(descriptor.model_id) is None:
            store.put_model(descriptor)
        path = weights_path(models_dir, descriptor.model_id)
        if not path.exists():
            if dataset is None:
                dataset = load_bundled_dataset(taxonomy)
            model = train_baseline(dataset, descriptor)
            save_weights(model, str(path))


def load_builtin_model(descriptor: ModelDescriptor, models_dir: Path) -> BaselineModel:
    path = weights_path(models_dir, descriptor.model_id)
    if not path.exists():
        raise ValidationError(
            f"no trained weights for builtin model {descriptor.model_id!r}")
    return load_weights(descriptor, str(path))
