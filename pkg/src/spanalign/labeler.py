"""Span-link label classifier: a small feed-forward network over three
features (span-pair embedding similarity and the two span lengths).

The network is 3 -> 100 -> 100 -> 5 with rectifier activations and a
softmax output over the two-sided labels [TRAN, PARA, SUM, GEN, REPL].
Additions never reach the classifier: one-sided links are labeled ADDU
up front.

Everything here is deterministic: initialization and the per-example
update order come from the seed, examples are visited one at a time in a
seed-determined order reshuffled each epoch, and updates are applied
immediately in that order.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .model import AlignmentDocument, SpanLabel, SpanLink

log = logging.getLogger(__name__)

CLASS_ORDER: tuple[SpanLabel, ...] = (
    SpanLabel.TRAN,
    SpanLabel.PARA,
    SpanLabel.SUM,
    SpanLabel.GEN,
    SpanLabel.REPL,
)
HIDDEN = 100
N_FEATURES = 3
N_CLASSES = len(CLASS_ORDER)

MODEL_FORMAT = "span-label-mlp"
MODEL_VERSION = 1


class LabelerError(ValueError):
    pass


def scale_length(n_tokens: int) -> float:
    """Length feature scaling: log(1 + n)."""
    return math.log1p(n_tokens)


def extract_features(link: SpanLink, span_embedding_similarity: float) -> np.ndarray:
    """[similarity, scaled source length, scaled target length] for a two-sided link."""
    if link.is_one_sided:
        raise LabelerError(f"ONE_SIDED: link {link.id} has a single side; additions bypass the classifier")
    if not -1.0 <= span_embedding_similarity <= 1.0:
        raise LabelerError(f"similarity {span_embedding_similarity} outside [-1, 1]")
    return np.array(
        [span_embedding_similarity, scale_length(len(link.src)), scale_length(len(link.tgt))],
        dtype=np.float64,
    )


@dataclass(frozen=True)
class MLPParams:
    w1: np.ndarray  # (100, 3)
    b1: np.ndarray  # (100,)
    w2: np.ndarray  # (100, 100)
    b2: np.ndarray  # (100,)
    w3: np.ndarray  # (5, 100)
    b3: np.ndarray  # (5,)
    class_order: tuple[SpanLabel, ...] = CLASS_ORDER

    def __post_init__(self) -> None:
        shapes = {
            "w1": (HIDDEN, N_FEATURES),
            "b1": (HIDDEN,),
            "w2": (HIDDEN, HIDDEN),
            "b2": (HIDDEN,),
            "w3": (N_CLASSES, HIDDEN),
            "b3": (N_CLASSES,),
        }
        for name, shape in shapes.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise LabelerError(f"parameter {name} has shape {arr.shape}, expected {shape}")

    def check_finite(self) -> None:
        for name in ("w1", "b1", "w2", "b2", "w3", "b3"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise LabelerError(f"parameter {name} contains non-finite values")

    def copy(self) -> "MLPParams":
        return MLPParams(
            self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2.copy(), self.w3.copy(), self.b3.copy(), self.class_order
        )


def zero_params() -> MLPParams:
    return MLPParams(
        np.zeros((HIDDEN, N_FEATURES)),
        np.zeros(HIDDEN),
        np.zeros((HIDDEN, HIDDEN)),
        np.zeros(HIDDEN),
        np.zeros((N_CLASSES, HIDDEN)),
        np.zeros(N_CLASSES),
    )


def init_params(seed: int) -> MLPParams:
    """Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) initialization from the seed."""
    rng = np.random.default_rng(seed)

    def layer(fan_out: int, fan_in: int) -> tuple[np.ndarray, np.ndarray]:
        bound = 1.0 / math.sqrt(fan_in)
        return rng.uniform(-bound, bound, (fan_out, fan_in)), rng.uniform(-bound, bound, fan_out)

    w1, b1 = layer(HIDDEN, N_FEATURES)
    w2, b2 = layer(HIDDEN, HIDDEN)
    w3, b3 = layer(N_CLASSES, HIDDEN)
    return MLPParams(w1, b1, w2, b2, w3, b3)


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - np.max(z)
    e = np.exp(z)
    return e / e.sum()


def forward(params: MLPParams, x: np.ndarray) -> np.ndarray:
    """Class probability vector (sums to 1) for one feature vector."""
    params.check_finite()
    probs, _ = _forward_cached(params, np.asarray(x, dtype=np.float64))
    return probs


def _forward_cached(params: MLPParams, x: np.ndarray):
    z1 = params.w1 @ x + params.b1
    h1 = np.maximum(z1, 0.0)
    z2 = params.w2 @ h1 + params.b2
    h2 = np.maximum(z2, 0.0)
    logits = params.w3 @ h2 + params.b3
    return _softmax(logits), (x, z1, h1, z2, h2)


def loss_and_gradients(params: MLPParams, x: np.ndarray, target: int) -> tuple[float, dict[str, np.ndarray]]:
    """Cross-entropy loss for one example and its gradient in every parameter."""
    probs, (x, z1, h1, z2, h2) = _forward_cached(params, np.asarray(x, dtype=np.float64))
    loss = -math.log(max(probs[target], 1e-300))
    dlogits = probs.copy()
    dlogits[target] -= 1.0
    grads = {
        "w3": np.outer(dlogits, h2),
        "b3": dlogits,
    }
    dh2 = params.w3.T @ dlogits
    dz2 = dh2 * (z2 > 0)
    grads["w2"] = np.outer(dz2, h1)
    grads["b2"] = dz2
    dh1 = params.w2.T @ dz2
    dz1 = dh1 * (z1 > 0)
    grads["w1"] = np.outer(dz1, x)
    grads["b1"] = dz1
    return loss, grads


@dataclass(frozen=True, slots=True)
class TrainConfig:
    train_fraction: float = 0.8
    learning_rate: float = 1e-3
    max_epochs: int = 200
    patience: int = 10
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0 < self.train_fraction < 1:
            raise LabelerError(f"train_fraction must be in (0, 1), got {self.train_fraction}")


def mean_loss(params: MLPParams, features: np.ndarray, targets: np.ndarray) -> float:
    total = 0.0
    for x, y in zip(features, targets):
        probs, _ = _forward_cached(params, x)
        total += -math.log(max(probs[y], 1e-300))
    return total / len(targets)


def train(
    examples: Sequence[tuple[np.ndarray, SpanLabel]],
    config: TrainConfig = TrainConfig(),
) -> MLPParams:
    """Stochastic-gradient training with early stopping on held-out loss.

    The seed fixes the train/held-out split, the initialization and the
    per-epoch visit order; the best held-out checkpoint is returned.
    """
    if len(examples) < 10:
        raise LabelerError(f"need at least 10 examples, got {len(examples)}")
    labels = {label for _, label in examples}
    if len(labels) < 2:
        raise LabelerError("training data contains a single class")
    for label in labels:
        if label not in CLASS_ORDER:
            raise LabelerError(f"label {label} is not classifiable (additions bypass the classifier)")

    class_index = {label: i for i, label in enumerate(CLASS_ORDER)}
    features = np.array([np.asarray(x, dtype=np.float64) for x, _ in examples])
    targets = np.array([class_index[label] for _, label in examples])
    counts = np.bincount(targets, minlength=N_CLASSES)
    present = counts[counts > 0]
    if present.min() / len(examples) < 0.05:
        log.warning("class imbalance: rarest class covers %.1f%% of %d examples", 100 * present.min() / len(examples), len(examples))

    rng = np.random.default_rng(config.seed)
    perm = rng.permutation(len(examples))
    n_train = max(1, min(len(examples) - 1, int(round(config.train_fraction * len(examples)))))
    train_idx, held_idx = perm[:n_train], perm[n_train:]

    params = init_params(config.seed)
    best = params.copy()
    best_loss = mean_loss(params, features[held_idx], targets[held_idx])
    epochs_since_best = 0
    for _ in range(config.max_epochs):
        order = train_idx[rng.permutation(len(train_idx))]
        for idx in order:
            loss, grads = loss_and_gradients(params, features[idx], targets[idx])
            if not math.isfinite(loss):
                raise LabelerError("training diverged: non-finite loss")
            params = MLPParams(
                params.w1 - config.learning_rate * grads["w1"],
                params.b1 - config.learning_rate * grads["b1"],
                params.w2 - config.learning_rate * grads["w2"],
                params.b2 - config.learning_rate * grads["b2"],
                params.w3 - config.learning_rate * grads["w3"],
                params.b3 - config.learning_rate * grads["b3"],
            )
        held_loss = mean_loss(params, features[held_idx], targets[held_idx])
        if not math.isfinite(held_loss):
            raise LabelerError("training diverged: non-finite held-out loss")
        if held_loss < best_loss:
            best_loss = held_loss
            best = params.copy()
            epochs_since_best = 0
        else:
            epochs_since_best += 1
            if epochs_since_best >= config.patience:
                break
    return best


def predict_link_label(params: MLPParams, features: np.ndarray) -> SpanLabel:
    """Argmax class; ties resolve to the earliest class in the fixed order."""
    probs = forward(params, features)
    return params.class_order[int(np.argmax(probs))]


def predict_labels(
    doc: AlignmentDocument,
    params: MLPParams | None = None,
    span_similarities: Mapping[str, float] | None = None,
) -> AlignmentDocument:
    """Label every label-free link of a pipeline document.

    One-sided links become ADDU. Two-sided links become TRAN in default
    mode (``params is None``) or the classifier's argmax class given each
    link's span-pair embedding similarity.
    """
    new_links = []
    for link in doc.span_links:
        if link.label is not None:
            raise LabelerError(f"link {link.id} is already labeled")
        if link.is_one_sided:
            new_links.append(replace(link, label=SpanLabel.ADDU))
        elif params is None:
            new_links.append(replace(link, label=SpanLabel.TRAN))
        else:
            if span_similarities is None or link.id not in span_similarities:
                raise LabelerError(f"missing span similarity for link {link.id}")
            feats = extract_features(link, span_similarities[link.id])
            new_links.append(replace(link, label=predict_link_label(params, feats)))
    return doc.with_links(span_links=tuple(new_links))


# ---------------------------------------------------------------------------
# model file format: one JSON header line, then row-major little-endian
# float64 blocks in the order w1, b1, w2, b2, w3, b3.

def save_model(path, params: MLPParams, seed: int | None = None) -> None:
    header = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "class_order": [label.value for label in params.class_order],
        "features": ["similarity", "src_len", "tgt_len"],
        "length_scaling": "log1p",
        "activation": "relu",
        "hidden": [HIDDEN, HIDDEN],
        "seed": seed,
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        for name in ("w1", "b1", "w2", "b2", "w3", "b3"):
            fh.write(getattr(params, name).astype("<f8").tobytes(order="C"))


def load_model(path) -> MLPParams:
    with open(path, "rb") as fh:
        header_line = fh.readline()
        body = fh.read()
    try:
        header = json.loads(header_line)
    except json.JSONDecodeError as exc:
        raise LabelerError(f"{path}: bad model header") from exc
    if header.get("format") != MODEL_FORMAT or header.get("version") != MODEL_VERSION:
        raise LabelerError(f"{path}: not a version-{MODEL_VERSION} {MODEL_FORMAT} file")
    class_order = tuple(SpanLabel(value) for value in header["class_order"])
    shapes = [(HIDDEN, N_FEATURES), (HIDDEN,), (HIDDEN, HIDDEN), (HIDDEN,), (N_CLASSES, HIDDEN), (N_CLASSES,)]
    arrays = []
    offset = 0
    for shape in shapes:
        size = int(np.prod(shape)) * 8
        chunk = body[offset : offset + size]
        if len(chunk) != size:
            raise LabelerError(f"{path}: truncated parameter block")
        arrays.append(np.frombuffer(chunk, dtype="<f8").reshape(shape).copy())
        offset += size
    if offset != len(body):
        raise LabelerError(f"{path}: trailing bytes after parameter blocks")
    params = MLPParams(*arrays, class_order=class_order)
    params.check_finite()
    return params


# ---------------------------------------------------------------------------
# estimator-style wrapper

class MlpSpanLabeler(BaseEstimator, ClassifierMixin):
    """Scikit-learn style interface around the trainable label classifier.

    X is an (n, 3) feature matrix as produced by :func:`extract_features`;
    y holds label names from the five two-sided classes.
    """

    def __init__(self, learning_rate: float = 1e-3, max_epochs: int = 200, patience: int = 10, train_fraction: float = 0.8, seed: int = 0):
        self.learning_rate = learning_rate
        self.max_epochs = max_epochs
        self.patience = patience
        self.train_fraction = train_fraction
        self.seed = seed

    def fit(self, X, y):
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != N_FEATURES:
            raise ValueError(f"expected {N_FEATURES} features, got {X.shape[1]}")
        examples = [(x, SpanLabel(label)) for x, label in zip(X, y)]
        config = TrainConfig(
            train_fraction=self.train_fraction,
            learning_rate=self.learning_rate,
            max_epochs=self.max_epochs,
            patience=self.patience,
            seed=self.seed,
        )
        self.params_ = train(examples, config)
        self.classes_ = np.array([label.value for label in CLASS_ORDER])
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "params_")
        X = check_array(X, dtype=np.float64)
        return np.vstack([forward(self.params_, x) for x in X])

    def predict(self, X):
        proba = self.predict_proba(X)
        return self.classes_[np.argmax(proba, axis=1)]
