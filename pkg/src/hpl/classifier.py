"""MLP symbol classifier: training with Adam, inference, gradient checking,
a kNN baseline, confusion-matrix metrics and model (de)serialization.

All arithmetic is float64. Training is single-threaded and fully
determined by the RNG seed; a trained model is immutable and safe to share
between threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .features import ClassCentroids, DensityHistogramPair, uniform_centroids
from .symbols import NUM_CLASSES, SymbolClass

MODEL_VERSION = "hpl-mlp-1"
STD_FLOOR = 1e-8


class DimensionMismatch(DomainError):
    pass


class NonFiniteInput(DomainError):
    pass


class InsufficientData(DomainError):
    pass


class SingleClassData(DomainError):
    pass


class EmptyTrainingSet(DomainError):
    pass


class EmptyTestSet(DomainError):
    pass


class UnsupportedVersion(DomainError):
    pass


class CorruptModelFile(DomainError):
    pass


@dataclass
class MlpModel:
    """Fully-connected ReLU network with a softmax head, plus the feature
    standardization statistics and centroid table it was trained with."""

    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    feat_mean: np.ndarray
    feat_std: np.ndarray
    centroids: ClassCentroids
    version: str = MODEL_VERSION
    val_loss: float | None = None  # best validation loss seen in training; not serialized
    history: tuple[tuple[float, float], ...] = ()  # (train, val) loss per epoch; not serialized

    def __post_init__(self):
        if len(self.weights) != len(self.layer_sizes) - 1 or len(self.biases) != len(self.weights):
            raise ValueError("parameter count does not match layer sizes")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (self.layer_sizes[i], self.layer_sizes[i + 1]) or b.shape != (self.layer_sizes[i + 1],):
                raise ValueError(f"layer {i} has inconsistent shapes")
        if (self.feat_std < STD_FLOOR).any():
            raise ValueError(f"feature std entries must be >= {STD_FLOOR}")

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    batch_size: int = 32
    max_epochs: int = 100
    patience: int = 10
    val_fraction: float = 0.10
    hidden_size: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be > 0")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")


@dataclass(frozen=True)
class MetricsReport:
    confusion: np.ndarray  # (6, 6) counts, rows = true labels
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    macro_precision: float
    macro_recall: float
    macro_f1: float


# --- Forward pass -----------------------------------------------------------


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _forward_batch(model: MlpModel, x: np.ndarray) -> np.ndarray:
    z = (x - model.feat_mean) / model.feat_std
    for w, b in zip(model.weights[:-1], model.biases[:-1]):
        z = np.maximum(z @ w + b, 0.0)
    return _softmax(z @ model.weights[-1] + model.biases[-1])


def forward(model: MlpModel, fv: np.ndarray) -> np.ndarray:
    """Class probabilities for one feature vector."""
    fv = np.asarray(fv, dtype=np.float64)
    if fv.shape != (model.layer_sizes[0],):
        raise DimensionMismatch(f"expected {model.layer_sizes[0]} features, got {fv.shape}")
    if not np.all(np.isfinite(fv)):
        raise NonFiniteInput("feature vector contains NaN or infinity")
    return _forward_batch(model, fv[None, :])[0]


def predict(model: MlpModel, x: np.ndarray) -> np.ndarray:
    """Argmax labels for a (n, d) batch."""
    return _forward_batch(model, np.asarray(x, dtype=np.float64)).argmax(axis=1)


# --- Training ---------------------------------------------------------------


def _loss_and_grads(
    weights: list[np.ndarray],
    biases: list[np.ndarray],
    x: np.ndarray,
    y: np.ndarray,
) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """Mean cross-entropy over the batch and its gradients. `x` must
    already be standardized."""
    acts = [x]
    z = x
    for w, b in zip(weights[:-1], biases[:-1]):
        z = np.maximum(z @ w + b, 0.0)
        acts.append(z)
    logits = z @ weights[-1] + biases[-1]
    probs = _softmax(logits)
    n = len(x)
    nll = -np.log(np.maximum(probs[np.arange(n), y], 1e-300))
    loss = float(nll.mean())

    delta = probs.copy()
    delta[np.arange(n), y] -= 1.0
    delta /= n
    grads_w: list[np.ndarray] = [None] * len(weights)  # type: ignore[list-item]
    grads_b: list[np.ndarray] = [None] * len(biases)  # type: ignore[list-item]
    for layer in range(len(weights) - 1, -1, -1):
        grads_w[layer] = acts[layer].T @ delta
        grads_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ weights[layer].T) * (acts[layer] > 0)
    return loss, grads_w, grads_b


def _batch_loss(model: MlpModel, x: np.ndarray, y: np.ndarray) -> float:
    z = (x - model.feat_mean) / model.feat_std
    loss, _, _ = _loss_and_grads(model.weights, model.biases, z, y)
    return loss


def train(
    data: list[tuple[np.ndarray, SymbolClass]],
    cfg: TrainingConfig = TrainingConfig(),
    centroids: ClassCentroids | None = None,
) -> MlpModel:
    """Minibatch Adam on cross-entropy with He initialization, a held-out
    validation slice for early stopping, and the best-validation-epoch
    parameters returned. Deterministic given cfg.seed."""
    if len(data) < 12:
        raise InsufficientData(f"need at least 12 samples, got {len(data)}")
    x = np.asarray([fv for fv, _ in data], dtype=np.float64)
    y = np.asarray([int(label) for _, label in data], dtype=np.int64)
    if len(np.unique(y)) < 2:
        raise SingleClassData("training data contains a single class")

    mean = x.mean(axis=0)
    std = np.maximum(x.std(axis=0), STD_FLOOR)
    xs = (x - mean) / std

    rng = np.random.default_rng(cfg.seed)
    perm = rng.permutation(len(xs))
    n_val = max(1, int(round(cfg.val_fraction * len(xs))))
    val_idx, tr_idx = perm[:n_val], perm[n_val:]
    x_tr, y_tr = xs[tr_idx], y[tr_idx]
    x_val, y_val = xs[val_idx], y[val_idx]

    sizes = (x.shape[1], cfg.hidden_size, NUM_CLASSES)
    weights = [rng.normal(0.0, np.sqrt(2.0 / sizes[i]), (sizes[i], sizes[i + 1])) for i in range(len(sizes) - 1)]
    biases = [np.zeros(sizes[i + 1]) for i in range(len(sizes) - 1)]

    m_w = [np.zeros_like(w) for w in weights]
    v_w = [np.zeros_like(w) for w in weights]
    m_b = [np.zeros_like(b) for b in biases]
    v_b = [np.zeros_like(b) for b in biases]

    best_val = np.inf
    best_weights = [w.copy() for w in weights]
    best_biases = [b.copy() for b in biases]
    history: list[tuple[float, float]] = []
    stale = 0
    t = 0
    for _epoch in range(cfg.max_epochs):
        order = rng.permutation(len(x_tr))
        for lo in range(0, len(order), cfg.batch_size):
            idx = order[lo : lo + cfg.batch_size]
            _, gw, gb = _loss_and_grads(weights, biases, x_tr[idx], y_tr[idx])
            t += 1
            corr1 = 1.0 - cfg.beta1**t
            corr2 = 1.0 - cfg.beta2**t
            for params, grads, ms, vs in ((weights, gw, m_w, v_w), (biases, gb, m_b, v_b)):
                for i, g in enumerate(grads):
                    ms[i] = cfg.beta1 * ms[i] + (1 - cfg.beta1) * g
                    vs[i] = cfg.beta2 * vs[i] + (1 - cfg.beta2) * g * g
                    params[i] -= cfg.learning_rate * (ms[i] / corr1) / (np.sqrt(vs[i] / corr2) + cfg.adam_eps)
        train_loss, _, _ = _loss_and_grads(weights, biases, x_tr, y_tr)
        val_loss, _, _ = _loss_and_grads(weights, biases, x_val, y_val)
        history.append((train_loss, val_loss))
        if val_loss < best_val:
            best_val = val_loss
            best_weights = [w.copy() for w in weights]
            best_biases = [b.copy() for b in biases]
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                break

    return MlpModel(
        layer_sizes=sizes,
        weights=best_weights,
        biases=best_biases,
        feat_mean=mean,
        feat_std=std,
        centroids=centroids if centroids is not None else uniform_centroids(),
        val_loss=float(best_val),
        history=tuple(history),
    )


# --- Gradient check ---------------------------------------------------------


def grad_check(model: MlpModel, batch: list[tuple[np.ndarray, SymbolClass]], epsilon: float = 1e-5) -> float:
    """Max relative error between the analytic gradient and central finite
    differences, over every parameter. Meant for small models."""
    if not (0 < epsilon <= 1e-2):
        raise ValueError(f"epsilon must be in (0, 1e-2], got {epsilon}")
    if model.n_params > 500:
        raise ValueError(f"model has {model.n_params} parameters, limit is 500")
    x = np.asarray([fv for fv, _ in batch], dtype=np.float64)
    y = np.asarray([int(label) for _, label in batch], dtype=np.int64)
    xs = (x - model.feat_mean) / model.feat_std

    weights = [w.copy() for w in model.weights]
    biases = [b.copy() for b in model.biases]
    _, gw, gb = _loss_and_grads(weights, biases, xs, y)

    worst = 0.0
    for params, grads in ((weights, gw), (biases, gb)):
        for arr, grad in zip(params, grads):
            flat = arr.reshape(-1)
            gflat = grad.reshape(-1)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + epsilon
                lo_plus, _, _ = _loss_and_grads(weights, biases, xs, y)
                flat[i] = orig - epsilon
                lo_minus, _, _ = _loss_and_grads(weights, biases, xs, y)
                flat[i] = orig
                numeric = (lo_plus - lo_minus) / (2 * epsilon)
                analytic = gflat[i]
                err = abs(analytic - numeric) / max(1e-8, abs(analytic) + abs(numeric))
                worst = max(worst, err)
    return worst


# --- kNN oracle -------------------------------------------------------------


def knn_predict(train: list[tuple[np.ndarray, SymbolClass]], query: np.ndarray, k: int) -> SymbolClass:
    """Majority label among the k nearest standardized-Euclidean neighbors;
    ties broken by smaller mean distance, then by lower class code."""
    if not train:
        raise EmptyTrainingSet("no training samples")
    if not (1 <= k <= len(train)):
        raise ValueError(f"need 1 <= k <= {len(train)}, got {k}")
    x = np.asarray([fv for fv, _ in train], dtype=np.float64)
    y = np.asarray([int(label) for _, label in train], dtype=np.int64)
    mean = x.mean(axis=0)
    std = np.maximum(x.std(axis=0), STD_FLOOR)
    xs = (x - mean) / std
    q = (np.asarray(query, dtype=np.float64) - mean) / std

    dists = np.linalg.norm(xs - q, axis=1)
    nearest = np.argsort(dists, kind="stable")[:k]
    votes = np.bincount(y[nearest], minlength=NUM_CLASSES)
    top = votes.max()
    tied = [c for c in range(NUM_CLASSES) if votes[c] == top]
    if len(tied) == 1:
        return SymbolClass(tied[0])
    means = {c: dists[nearest][y[nearest] == c].mean() for c in tied}
    best = min(means.values())
    winners = sorted(c for c, m in means.items() if m == best)
    return SymbolClass(winners[0])


# --- Evaluation -------------------------------------------------------------


def metrics_from_confusion(confusion: np.ndarray) -> MetricsReport:
    """Per-class precision/recall/F1 and macro averages from a counts
    matrix with rows = true labels, columns = predictions."""
    m = np.asarray(confusion, dtype=np.float64)
    if m.shape != (NUM_CLASSES, NUM_CLASSES):
        raise ValueError(f"confusion matrix must be {NUM_CLASSES}x{NUM_CLASSES}")
    diag = np.diag(m)
    col = m.sum(axis=0)
    row = m.sum(axis=1)
    precision = np.divide(diag, col, out=np.zeros(NUM_CLASSES), where=col > 0)
    recall = np.divide(diag, row, out=np.zeros(NUM_CLASSES), where=row > 0)
    pr = precision + recall
    f1 = np.divide(2 * precision * recall, pr, out=np.zeros(NUM_CLASSES), where=pr > 0)
    return MetricsReport(
        confusion=np.asarray(confusion),
        precision=precision,
        recall=recall,
        f1=f1,
        macro_precision=float(precision.mean()),
        macro_recall=float(recall.mean()),
        macro_f1=float(f1.mean()),
    )


def evaluate(model: MlpModel, test: list[tuple[np.ndarray, SymbolClass]]) -> MetricsReport:
    if not test:
        raise EmptyTestSet("no test samples")
    x = np.asarray([fv for fv, _ in test], dtype=np.float64)
    y = np.asarray([int(label) for _, label in test], dtype=np.int64)
    preds = predict(model, x)
    confusion = np.zeros((NUM_CLASSES, NUM_CLASSES), dtype=np.int64)
    np.add.at(confusion, (y, preds), 1)
    return metrics_from_confusion(confusion)


def format_metrics_table(report: MetricsReport) -> str:
    """Aligned confusion matrix with P/R/F1 columns, one row per true class."""
    names = [s.canonical_name for s in SymbolClass]
    width = max(len(n) for n in names) + 2
    cell = max(6, max(len(str(int(v))) for v in report.confusion.ravel()) + 2)
    header = " " * width + "".join(n[:cell - 1].rjust(cell) for n in names) + "      P      R     F1"
    lines = [header]
    for c in range(NUM_CLASSES):
        counts = "".join(str(int(v)).rjust(cell) for v in report.confusion[c])
        lines.append(
            f"{names[c]:<{width}}{counts}"
            f"  {report.precision[c]:.3f}  {report.recall[c]:.3f}  {report.f1[c]:.3f}"
        )
    lines.append(
        f"{'macro':<{width}}{'':{cell * NUM_CLASSES}}"
        f"  {report.macro_precision:.3f}  {report.macro_recall:.3f}  {report.macro_f1:.3f}"
    )
    return "\n".join(lines)


# --- Serialization ----------------------------------------------------------


def save_model(model: MlpModel) -> bytes:
    """UTF-8 JSON; floats use shortest round-trip decimal representation, so
    load(save(m)) is bit-exact."""
    doc = {
        "version": model.version,
        "layer_sizes": list(model.layer_sizes),
        "weights": [w.tolist() for w in model.weights],
        "biases": [b.tolist() for b in model.biases],
        "feat_mean": model.feat_mean.tolist(),
        "feat_std": model.feat_std.tolist(),
        "centroids": {
            "x_hists": [p.x_hist.tolist() for p in model.centroids.pairs],
            "y_hists": [p.y_hist.tolist() for p in model.centroids.pairs],
            "counts": list(model.centroids.counts),
        },
    }
    return json.dumps(doc).encode("utf-8")


def load_model(data: bytes) -> MlpModel:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise CorruptModelFile(f"unparseable model file: {exc}") from None
    if not isinstance(doc, dict):
        raise CorruptModelFile("model file is not a JSON object")
    version = doc.get("version")
    if version != MODEL_VERSION:
        raise UnsupportedVersion(f"unsupported model version {version!r}")
    try:
        sizes = tuple(int(s) for s in doc["layer_sizes"])
        weights = [np.asarray(w, dtype=np.float64) for w in doc["weights"]]
        biases = [np.asarray(b, dtype=np.float64) for b in doc["biases"]]
        mean = np.asarray(doc["feat_mean"], dtype=np.float64)
        std = np.asarray(doc["feat_std"], dtype=np.float64)
        cent = doc["centroids"]
        pairs = tuple(
            DensityHistogramPair(
                x_hist=np.asarray(cx, dtype=np.float64),
                y_hist=np.asarray(cy, dtype=np.float64),
            )
            for cx, cy in zip(cent["x_hists"], cent["y_hists"])
        )
        centroids = ClassCentroids(pairs=pairs, counts=tuple(int(c) for c in cent["counts"]))
        return MlpModel(
            layer_sizes=sizes,
            weights=weights,
            biases=biases,
            feat_mean=mean,
            feat_std=std,
            centroids=centroids,
            version=version,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptModelFile(f"inconsistent model file: {exc}") from None
