"""
Node classification harness: repeated random label splits, multinomial
logistic regression on embeddings, Micro-F1
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp, softmax

from .errors import ParseError, PreconditionError

logger = logging.getLogger(__name__)

DEFAULT_RATIOS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
DEFAULT_TRIALS = 40
DEFAULT_LAMBDA = 1.0
DEFAULT_ITERS = 500
MAX_RESAMPLES = 100
MAX_HALVINGS = 30
STD_FLOOR = 1e-12


@dataclass(frozen=True)
class LabeledSet:
    """Labeled nodes by key; label ids index label_names"""
    node_keys: Tuple[str, ...]
    labels: np.ndarray
    label_names: Tuple[str, ...]

    def __post_init__(self):
        if len(set(self.node_keys)) != len(self.node_keys):
            raise PreconditionError("A node appears more than once in the labeled set")
        if len(self.node_keys) != len(self.labels):
            raise PreconditionError("Labeled set keys and labels differ in length")
        if len(np.unique(self.labels)) < 2:
            raise PreconditionError("Classification needs at least 2 distinct labels")

    def __len__(self) -> int:
        return len(self.node_keys)

    @property
    def num_labels(self) -> int:
        return len(self.label_names)


def load_labels(path) -> LabeledSet:
    """Read `node_key<TAB>label_string` lines"""
    path = Path(path)
    keys: List[str] = []
    labels: List[int] = []
    label_ids: Dict[str, int] = {}
    seen = set()
    with open(path, 'r', encoding='utf-8') as handle:
        for line_number, raw in enumerate(handle, start=1):
            line = raw.rstrip('\r\n')
            if not line.strip() or line.startswith('#'):
                continue
            fields = line.split('\t')
            if len(fields) != 2:
                raise ParseError(path, line_number, f"expected 'node_key<TAB>label', got {len(fields)} field(s)")
            key, label = fields[0].strip(), fields[1].strip()
            if key in seen:
                raise ParseError(path, line_number, f"node {key!r} is labeled twice")
            seen.add(key)
            keys.append(key)
            labels.append(label_ids.setdefault(label, len(label_ids)))
    return LabeledSet(node_keys=tuple(keys), labels=np.array(labels, dtype=np.int64),
                      label_names=tuple(label_ids))


def split(rng: np.random.Generator, labeled: LabeledSet, ratio: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Random train/test partition of positions into the labeled set.

    The train side gets round(ratio * n) items and must contain every
    label; degenerate draws are resampled up to MAX_RESAMPLES times.
    """
    if not 0.0 < ratio < 1.0:
        raise PreconditionError(f"Training ratio must lie in (0, 1), got {ratio}")
    n = len(labeled)
    train_size = int(np.floor(ratio * n + 0.5))
    if train_size < 1 or train_size > n - 1:
        raise PreconditionError(f"Ratio {ratio} on {n} labeled nodes leaves one side empty")

    all_labels = np.unique(labeled.labels)
    for _ in range(MAX_RESAMPLES):
        order = rng.permutation(n)
        train, test = order[:train_size], order[train_size:]
        if len(np.unique(labeled.labels[train])) == len(all_labels):
            return np.sort(train), np.sort(test)
    raise PreconditionError(f"Could not draw a split with every label in the training side "
                            f"after {MAX_RESAMPLES} attempts (ratio {ratio}, n {n})")


@dataclass
class LogRegModel:
    weights: np.ndarray  # (num_labels, d)
    bias: np.ndarray
    lam: float
    history: List[float] = field(default_factory=list)

    def decision(self, features: np.ndarray) -> np.ndarray:
        return features @ self.weights.T + self.bias

    def predict(self, features: np.ndarray) -> np.ndarray:
        return np.argmax(self.decision(features), axis=1)


def logreg_objective(weights: np.ndarray, bias: np.ndarray, features: np.ndarray, labels: np.ndarray,
                     lam: float) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    Mean cross-entropy plus lam / (2n) * ||W||^2 (bias unpenalized), and
    its gradients w.r.t. W and b. lam = 1 matches an inverse regularization
    strength of 1 on the summed loss.
    """
    n = features.shape[0]
    logits = features @ weights.T + bias
    log_norm = logsumexp(logits, axis=1)
    loss = float(np.mean(log_norm - logits[np.arange(n), labels]) + lam / (2 * n) * np.sum(weights ** 2))
    residual = softmax(logits, axis=1)
    residual[np.arange(n), labels] -= 1.0
    residual /= n
    return loss, residual.T @ features + (lam / n) * weights, residual.sum(axis=0)


def fit_logreg(features: np.ndarray, labels: np.ndarray, lam: float = DEFAULT_LAMBDA,
               iters: int = DEFAULT_ITERS, num_labels: Optional[int] = None) -> LogRegModel:
    """
    Full-batch gradient descent with backtracking step halving.

    Each accepted iteration does not increase the objective; the accepted
    objective values are kept in model.history.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if not np.isfinite(features).all():
        raise PreconditionError("Features contain non-finite values")
    num_labels = int(labels.max()) + 1 if num_labels is None else num_labels

    weights = np.zeros((num_labels, features.shape[1]))
    bias = np.zeros(num_labels)
    loss, grad_w, grad_b = logreg_objective(weights, bias, features, labels, lam)
    history = [loss]
    step = 1.0
    for _ in range(iters):
        for _ in range(MAX_HALVINGS):
            new_weights, new_bias = weights - step * grad_w, bias - step * grad_b
            new_loss, new_grad_w, new_grad_b = logreg_objective(new_weights, new_bias, features, labels, lam)
            if new_loss <= loss:
                break
            step *= 0.5
        else:
            break
        improvement = loss - new_loss
        weights, bias, grad_w, grad_b = new_weights, new_bias, new_grad_w, new_grad_b
        previous, loss = loss, new_loss
        history.append(loss)
        if improvement <= 1e-9 * max(abs(previous), 1e-12):
            break
        step *= 2.0
    return LogRegModel(weights=weights, bias=bias, lam=lam, history=history)


def micro_f1(predictions: Sequence[int], gold: Sequence[int]) -> float:
    """
    Micro-averaged F1 = 2ΣTP / (2ΣTP + ΣFP + ΣFN) over labels. For
    single-label multiclass data it coincides with accuracy.
    """
    predictions = np.asarray(predictions, dtype=np.int64)
    gold = np.asarray(gold, dtype=np.int64)
    if predictions.shape != gold.shape:
        raise PreconditionError(f"Prediction and gold lengths differ: {len(predictions)} vs {len(gold)}")
    if len(gold) == 0:
        raise PreconditionError("micro_f1 needs at least one item")

    num_labels = int(max(predictions.max(), gold.max())) + 1
    confusion = np.zeros((num_labels, num_labels), dtype=np.int64)
    np.add.at(confusion, (gold, predictions), 1)
    tp = int(np.trace(confusion))
    fp = int(confusion.sum(axis=0).sum()) - tp
    fn = int(confusion.sum(axis=1).sum()) - tp
    score = 2 * tp / (2 * tp + fp + fn)
    assert score == tp / len(gold), "micro-F1 must equal accuracy for single-label data"
    return score


def standardize(train: np.ndarray, test: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Scale both sides with the train split's per-dimension mean and std"""
    mean = train.mean(axis=0)
    std = np.maximum(train.std(axis=0), STD_FLOOR)
    return (train - mean) / std, (test - mean) / std


@dataclass(frozen=True)
class EvalRow:
    ratio: float
    mean_micro_f1: float
    std: float
    trials: int
    scores: Tuple[float, ...] = ()


@dataclass
class EvalReport:
    rows: List[EvalRow]

    CSV_HEADER = 'ratio,mean_micro_f1,std,trials'

    def to_csv(self) -> str:
        lines = [self.CSV_HEADER]
        lines.extend(f"{row.ratio:g},{row.mean_micro_f1:.6f},{row.std:.6f},{row.trials}" for row in self.rows)
        return '\n'.join(lines) + '\n'

    def write_csv(self, path) -> None:
        with open(Path(path), 'w', encoding='utf-8', newline='\n') as handle:
            handle.write(self.to_csv())

    def row_for(self, ratio: float) -> EvalRow:
        for row in self.rows:
            if abs(row.ratio - ratio) < 1e-12:
                return row
        raise KeyError(ratio)


def feature_matrix(embeddings: Mapping[str, np.ndarray], labeled: LabeledSet) -> np.ndarray:
    """Stack the embedding of each labeled node, in labeled-set order"""
    rows = []
    for key in labeled.node_keys:
        vector = embeddings.get(key)
        if vector is None:
            raise PreconditionError(f"No embedding for labeled node {key!r}")
        rows.append(np.asarray(vector, dtype=np.float64))
    return np.vstack(rows)


def _run_trial(features: np.ndarray, labeled: LabeledSet, ratio: float, seed_key: Sequence[int],
               lam: float, iters: int) -> float:
    rng = np.random.default_rng(list(seed_key))
    train, test = split(rng, labeled, ratio)
    train_x, test_x = standardize(features[train], features[test])
    model = fit_logreg(train_x, labeled.labels[train], lam=lam, iters=iters, num_labels=labeled.num_labels)
    return micro_f1(model.predict(test_x), labeled.labels[test])


def evaluate(embeddings: Mapping[str, np.ndarray], labeled: LabeledSet,
             ratios: Sequence[float] = DEFAULT_RATIOS, trials: int = DEFAULT_TRIALS, seed: int = 0,
             lam: float = DEFAULT_LAMBDA, iters: int = DEFAULT_ITERS, workers: int = 1) -> EvalReport:
    """
    Run `trials` independent split/fit/score rounds per training ratio.

    Trial t of ratio index i draws from the stream seeded by
    (seed, i, t), so results do not depend on `workers`.
    """
    if trials < 1:
        raise PreconditionError(f"trials must be >= 1, got {trials}")
    features = feature_matrix(embeddings, labeled)
    rows = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for index, ratio in enumerate(ratios):
            futures = [pool.submit(_run_trial, features, labeled, ratio, (seed, index, t), lam, iters)
                       for t in range(trials)]
            scores = tuple(future.result() for future in futures)
            row = EvalRow(ratio=float(ratio), mean_micro_f1=float(np.mean(scores)),
                          std=float(np.std(scores)), trials=trials, scores=scores)
            logger.info(f"ratio {ratio:g}: Micro-F1 {row.mean_micro_f1:.4f} ± {row.std:.4f} over {trials} trials")
            rows.append(row)
    return EvalReport(rows=rows)
