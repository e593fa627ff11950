"""Classifiers for histogram features: linear one-vs-rest and 1-NN.

The linear trainer minimizes L2-regularized hinge loss per class by
deterministic full-batch subgradient descent with the 1/(lambda*t) step
schedule (lambda = 1/(c*n)). It replaces the external SVM used by the
original experiments; absolute accuracies differ, orderings are what the
harness compares.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, ModelFormatError

__all__ = [
    "LabeledFeatures",
    "LinearModel",
    "train_linear_ovr",
    "hinge_objective",
    "predict",
    "predict_batch",
    "nearest_neighbor_predict",
    "write_classifier_section",
    "read_classifier_section",
]


@dataclass
class LabeledFeatures:
    features: np.ndarray  # (n, d) float64
    labels: np.ndarray  # (n,) int
    class_count: int

    @classmethod
    def from_arrays(cls, features, labels):
        X = np.asarray(features, dtype=np.float64)
        y = np.asarray(labels, dtype=np.int64)
        if X.ndim != 2 or len(X) == 0 or len(X) != len(y):
            raise InvalidParameterError("features must be a non-empty (n, d) matrix "
                                        "with one label per row")
        if not np.isfinite(X).all():
            raise InvalidParameterError("non-finite feature values")
        c = int(y.max()) + 1
        if y.min() < 0 or len(np.unique(y)) != c:
            raise InvalidParameterError("labels must be dense 0..C-1 with every "
                                        "class present")
        return cls(features=X, labels=y, class_count=c)


@dataclass
class LinearModel:
    weights: np.ndarray  # (C, d)
    biases: np.ndarray  # (C,)
    c: float
    epochs: int


def hinge_objective(w, b, X, y_signed, lam):
    """lam/2 ||w||^2 + mean hinge loss, for one binary subproblem."""
    margins = y_signed * (X @ w + b)
    return 0.5 * lam * float(w @ w) + float(np.maximum(0.0, 1.0 - margins).mean())


def train_linear_ovr(data, c=1.0, epochs=200, record_objective=False):
    """One-vs-rest linear max-margin training.

    Fully deterministic: no shuffling, zero initialization, full-batch
    subgradient steps. Returns (model, histories) when record_objective
    is set, else just the model.
    """
    if not isinstance(data, LabeledFeatures):
        data = LabeledFeatures.from_arrays(*data)
    if data.class_count < 2:
        raise InvalidParameterError("need at least two classes")
    if c <= 0 or epochs < 1:
        raise InvalidParameterError("need c > 0 and epochs >= 1")
    X, y = data.features, data.labels
    n, d = X.shape
    lam = 1.0 / (c * n)
    weights = np.zeros((data.class_count, d))
    biases = np.zeros(data.class_count)
    histories = []
    for cls in range(data.class_count):
        ys = np.where(y == cls, 1.0, -1.0)
        w = np.zeros(d)
        b = 0.0
        hist = []
        for t in range(1, epochs + 1):
            margins = ys * (X @ w + b)
            active = margins < 1.0
            grad_w = lam * w - (ys[active, None] * X[active]).sum(axis=0) / n
            grad_b = -ys[active].sum() / n
            eta = 1.0 / (lam * t)
            w = w - eta * grad_w
            b = b - eta * grad_b
            if record_objective:
                hist.append(hinge_objective(w, b, X, ys, lam))
        weights[cls] = w
        biases[cls] = b
        histories.append(hist)
    model = LinearModel(weights=weights, biases=biases, c=float(c), epochs=int(epochs))
    return (model, histories) if record_objective else model


def predict_batch(model, features):
    F = np.asarray(features, dtype=np.float64)
    if F.ndim == 1:
        F = F[None]
    if F.shape[1] != model.weights.shape[1]:
        raise InvalidParameterError(
            f"feature length {F.shape[1]} does not match model "
            f"dimension {model.weights.shape[1]}"
        )
    scores = F @ model.weights.T + model.biases
    return np.argmax(scores, axis=1)  # argmax takes the lowest index on ties


def predict(model, feature):
    return int(predict_batch(model, feature)[0])


def nearest_neighbor_predict(train, feature):
    """Label of the Euclidean-nearest training row; ties to the lowest index."""
    if not isinstance(train, LabeledFeatures):
        train = LabeledFeatures.from_arrays(*train)
    f = np.asarray(feature, dtype=np.float64)
    if f.shape != (train.features.shape[1],):
        raise InvalidParameterError("feature length does not match training data")
    d2 = ((train.features - f) ** 2).sum(axis=1)
    return int(train.labels[int(np.argmin(d2))])


# --- tagged model-file section -------------------------------------------

SECTION_TAG = b"LINCLS01"


def write_classifier_section(fh, model):
    C, d = model.weights.shape
    fh.write(SECTION_TAG)
    fh.write(struct.pack("<IIdI", C, d, model.c, model.epochs))
    fh.write(np.ascontiguousarray(model.weights, dtype="<f8").tobytes())
    fh.write(np.ascontiguousarray(model.biases, dtype="<f8").tobytes())


def read_classifier_section(fh):
    """Read an optional classifier section; None at clean end-of-file."""
    tag = fh.read(len(SECTION_TAG))
    if len(tag) == 0:
        return None
    if tag != SECTION_TAG:
        raise ModelFormatError(f"unknown trailing section tag {tag!r}")
    header = fh.read(20)
    if len(header) != 20:
        raise ModelFormatError("truncated classifier section header")
    C, d, c, epochs = struct.unpack("<IIdI", header)
    wraw = fh.read(C * d * 8)
    braw = fh.read(C * 8)
    if len(wraw) != C * d * 8 or len(braw) != C * 8:
        raise ModelFormatError("truncated classifier weights")
    return LinearModel(
        weights=np.frombuffer(wraw, dtype="<f8").reshape(C, d).copy(),
        biases=np.frombuffer(braw, dtype="<f8").copy(),
        c=float(c),
        epochs=int(epochs),
    )
