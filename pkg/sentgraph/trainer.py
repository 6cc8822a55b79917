"""
Scores, the node-node and node-content negative-sampling losses, and
the joint SGD loop that alternates between them
"""
import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit, log_expit

from .encoders import EncodeGrad, clip_gradients, encode, encode_backward
from .errors import ConfigError, DivergenceError, PreconditionError
from .graph_core import AugmentedNetwork
from .params import ENCODER_KINDS, ModelParams
from .sampler import (NegTables, build_neg_tables, sample_negatives_nc, sample_negatives_nn,
                      sample_positive)

logger = logging.getLogger(__name__)

DEFAULT_ETA0 = {'wavg': 0.025, 'gru': 0.01, 'bigru': 0.01}
ETA_FLOOR = 1e-4
LOSS_WINDOW = 1000


@dataclass
class TrainConfig:
    alpha: float = 0.5
    d: int = 200
    encoder_kind: str = 'wavg'
    neg_nn: int = 15
    neg_nc: int = 25
    eta0: Optional[float] = None
    epochs: int = 100
    max_steps: Optional[int] = None
    directed_score: bool = True
    seed: int = 0
    workers: int = 1
    freeze_words: bool = False
    grad_clip: Optional[float] = None
    uniform_negatives: bool = False
    loss_window: int = LOSS_WINDOW
    debug_checks: bool = False

    def validate(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.d < 2 or self.d % 2:
            raise ConfigError(f"Embedding dimension must be even and >= 2, got {self.d}")
        if self.encoder_kind not in ENCODER_KINDS:
            raise ConfigError(f"Unknown encoder {self.encoder_kind!r}")
        if self.neg_nn < 1 or self.neg_nc < 1:
            raise ConfigError("Negative sample sizes must be >= 1")
        if self.eta0 is not None and self.eta0 <= 0:
            raise ConfigError(f"eta0 must be positive, got {self.eta0}")
        if self.epochs < 1 and self.max_steps is None:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.max_steps is not None and self.max_steps < 1:
            raise ConfigError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.grad_clip is not None and self.grad_clip <= 0:
            raise ConfigError(f"grad_clip must be positive, got {self.grad_clip}")

    def effective_eta0(self) -> float:
        return self.eta0 if self.eta0 is not None else DEFAULT_ETA0[self.encoder_kind]

    def total_steps(self, network: AugmentedNetwork) -> int:
        if self.max_steps is not None:
            return self.max_steps
        return self.epochs * (len(network.edges_nn) + len(network.edges_nc))


@dataclass(frozen=True)
class StepReport:
    step: int
    branch: str
    loss: float
    eta: float


@dataclass(frozen=True)
class LossWindow:
    step: int
    branch: str
    window_mean_loss: float
    eta: float


@dataclass
class TrainResult:
    params: ModelParams
    loss_trace: List[LossWindow]
    max_steps: int
    nn_steps: int = 0
    nc_steps: int = 0
    nn_scored: int = 0


def learning_rate(step: int, max_steps: int, eta0: float) -> float:
    """Linear decay from eta0 with a floor of eta0 * 1e-4"""
    return max(eta0 * (1.0 - step / max_steps), eta0 * ETA_FLOOR)


def _nn_vectors(params: ModelParams, directed: bool):
    if directed:
        return params.out_half, params.in_half
    return params.node_table, params.node_table


def raw_score_nn(params: ModelParams, u: int, v: int, directed: bool = True) -> float:
    sources, targets = _nn_vectors(params, directed)
    return float(targets[v] @ sources[u])


def score_nn(params: ModelParams, u: int, v: int, directed: bool = True) -> float:
    """p(v, u): σ(e_v^in · e_u^out) when directed, σ(e_u · e_v) otherwise"""
    return float(expit(raw_score_nn(params, u, v, directed)))


def score_nc(params: ModelParams, u: int, sentence_embedding: np.ndarray) -> float:
    """σ((e_u^out ⊕ e_u^in) · f_e(c))"""
    sentence_embedding = np.asarray(sentence_embedding)
    if sentence_embedding.shape != (params.dim,):
        raise PreconditionError(f"Sentence embedding has shape {sentence_embedding.shape}, "
                                f"expected ({params.dim},)")
    return float(expit(params.node_vector(u) @ sentence_embedding))


def _sampled_loss(scores: np.ndarray) -> Tuple[float, np.ndarray]:
    """Loss -log σ(s_0) - Σ log σ(-s_i) and its derivative w.r.t. each score"""
    loss = -(log_expit(scores[0]) + log_expit(-scores[1:]).sum())
    labels = np.zeros_like(scores)
    labels[0] = 1.0
    return float(loss), expit(scores) - labels


@dataclass
class NnGrad:
    source: int
    source_grad: np.ndarray
    targets: List[int]
    target_grads: np.ndarray
    directed: bool


@dataclass
class NcGrad:
    node: int
    node_grad: np.ndarray  # ordered out-half then in-half
    sentence_grads: List[EncodeGrad] = field(default_factory=list)


def nn_loss_and_grads(params: ModelParams, u: int, v: int, negatives: Sequence[int],
                      directed: bool = True) -> Tuple[float, NnGrad]:
    """Node-node loss for edge (u, v) and its gradients, without updating anything"""
    sources, targets = _nn_vectors(params, directed)
    target_ids = [v] + list(negatives)
    source = sources[u].copy()
    target_matrix = targets[target_ids].copy()
    loss, coef = _sampled_loss(target_matrix @ source)
    grads = NnGrad(source=u, source_grad=coef @ target_matrix, targets=target_ids,
                   target_grads=np.outer(coef, source), directed=directed)
    return loss, grads


def nc_loss_and_grads(params: ModelParams, u: int, c: int, negatives: Sequence[int],
                      network: AugmentedNetwork) -> Tuple[float, NcGrad]:
    """Node-content loss for link (u, c) and its gradients, without updating anything"""
    content_ids = [c] + list(negatives)
    node = params.node_vector(u)
    encoded = [encode(params, network.content_sentences[i]) for i in content_ids]
    embeddings = np.vstack([output for output, _ in encoded])
    loss, coef = _sampled_loss(embeddings @ node)
    sentence_grads = [encode_backward(trace, coef_i * node) for coef_i, (_, trace) in zip(coef, encoded)]
    return loss, NcGrad(node=u, node_grad=coef @ embeddings, sentence_grads=sentence_grads)


def apply_nn_grads(params: ModelParams, grads: NnGrad, eta: float) -> None:
    sources, targets = _nn_vectors(params, grads.directed)
    targets[grads.targets] -= eta * grads.target_grads
    sources[grads.source] -= eta * grads.source_grad


def apply_nc_grads(params: ModelParams, grads: NcGrad, eta: float, grad_clip: Optional[float] = None) -> None:
    if grad_clip is not None:
        clip_gradients(grads.sentence_grads, grad_clip)
    half = params.half
    params.out_half[grads.node] -= eta * grads.node_grad[:half]
    params.in_half[grads.node] -= eta * grads.node_grad[half:]

    weights = params.encoder_weights()
    for sentence_grad in grads.sentence_grads:
        for direction, tensors in sentence_grad.weights.items():
            target = weights[direction]
            for name, grad in tensors.items():
                getattr(target, name)[...] -= eta * grad
        if not params.freeze_words:
            np.subtract.at(params.word_table, list(sentence_grad.tokens), eta * sentence_grad.word_grads)


def step_nn(params: ModelParams, u: int, v: int, negatives: Sequence[int], eta: float,
            directed: bool = True, step: int = 0) -> StepReport:
    """One SGD step on the node-node loss of edge (u, v)"""
    loss, grads = nn_loss_and_grads(params, u, v, negatives, directed)
    apply_nn_grads(params, grads, eta)
    return StepReport(step=step, branch='nn', loss=loss, eta=eta)


def step_nc(params: ModelParams, u: int, c: int, negatives: Sequence[int], eta: float,
            network: AugmentedNetwork, grad_clip: Optional[float] = None, step: int = 0) -> StepReport:
    """One SGD step on the node-content loss of link (u, c), through the encoder"""
    loss, grads = nc_loss_and_grads(params, u, c, negatives, network)
    apply_nc_grads(params, grads, eta, grad_clip)
    return StepReport(step=step, branch='nc', loss=loss, eta=eta)


class LossCollector:
    """Serializes windowed-loss appends from any number of workers"""

    def __init__(self):
        self._lock = threading.Lock()
        self._windows: List[LossWindow] = []

    def append(self, window: LossWindow) -> None:
        with self._lock:
            self._windows.append(window)

    def windows(self) -> List[LossWindow]:
        with self._lock:
            return sorted(self._windows, key=lambda w: w.step)


@dataclass
class _WorkerStats:
    nn_steps: int = 0
    nc_steps: int = 0
    nn_scored: int = 0


def check_trainable(network: AugmentedNetwork, params: ModelParams, config: TrainConfig) -> None:
    """Startup preconditions of the joint loop"""
    config.validate()
    if config.alpha < 1.0 and len(network.edges_nc) == 0:
        raise PreconditionError(f"alpha={config.alpha} needs node-content edges but the network has none")
    if config.alpha > 0.0 and len(network.edges_nn) == 0:
        raise PreconditionError(f"alpha={config.alpha} needs node-node edges but the network has none")
    if params.node_table.shape[0] != network.node_count:
        raise PreconditionError(f"Node table has {params.node_table.shape[0]} rows, "
                                f"network has {network.node_count} nodes")
    if params.dim != config.d:
        raise ConfigError(f"Parameters have dimension {params.dim}, config expects {config.d}")
    if params.encoder_kind != config.encoder_kind:
        raise ConfigError(f"Parameters use encoder {params.encoder_kind!r}, config expects {config.encoder_kind!r}")
    if network.content_sentences:
        largest = max(max(sentence) for sentence in network.content_sentences)
        if largest >= params.word_table.shape[0]:
            raise PreconditionError(f"Word id {largest} is outside the word table")


def _run_worker(worker_id: int, network: AugmentedNetwork, params: ModelParams, config: TrainConfig,
                tables: NegTables, max_steps: int, collector: LossCollector) -> _WorkerStats:
    rng = np.random.default_rng(config.seed + worker_id)
    eta0 = config.effective_eta0()
    stats = _WorkerStats()
    window_losses: List[float] = []
    window_nn = 0

    def flush(last_step: int, eta: float) -> None:
        nonlocal window_losses, window_nn
        if not window_losses:
            return
        window_nc = len(window_losses) - window_nn
        branch = 'nn' if window_nn > window_nc else 'nc' if window_nc > window_nn else 'mixed'
        mean = float(np.mean(window_losses))
        collector.append(LossWindow(step=last_step + 1, branch=branch, window_mean_loss=mean, eta=eta))
        logger.debug(f"step {last_step + 1}/{max_steps}: window loss {mean:.5f}, eta {eta:.6f}")
        if config.debug_checks and not params.all_finite():
            raise DivergenceError(f"Non-finite parameter after step {last_step}; lower --eta0 or set --grad-clip")
        window_losses, window_nn = [], 0

    step = worker_id
    eta = eta0
    while step < max_steps:
        eta = learning_rate(step, max_steps, eta0)
        if rng.random() < config.alpha:
            u, v = sample_positive(rng, network, 'nn')
            negatives = sample_negatives_nn(rng, u, config.neg_nn, network, tables.nodes)
            report = step_nn(params, u, v, negatives, eta, directed=config.directed_score, step=step)
            stats.nn_steps += 1
            stats.nn_scored += 1 + len(negatives)
            window_nn += 1
        else:
            u, c = sample_positive(rng, network, 'nc')
            negatives = sample_negatives_nc(rng, u, config.neg_nc, network, tables.contents)
            report = step_nc(params, u, c, negatives, eta, network, grad_clip=config.grad_clip, step=step)
            stats.nc_steps += 1
        window_losses.append(report.loss)
        if len(window_losses) == config.loss_window:
            flush(step, eta)
        step += config.workers
    flush(min(step, max_steps) - 1, eta)
    return stats


def train(network: AugmentedNetwork, params: ModelParams, config: TrainConfig) -> TrainResult:
    """
    Joint training: each step draws x ~ U[0, 1) and takes a node-node step
    when x < alpha, a node-content step otherwise.

    Parameters are updated in place. With workers > 1 the workers share
    the tables without locks and are not reproducible; workers = 1 is.
    """
    check_trainable(network, params, config)
    params.freeze_words = config.freeze_words
    tables = build_neg_tables(network, uniform=config.uniform_negatives)
    max_steps = config.total_steps(network)
    collector = LossCollector()

    logger.info(f"Training {config.encoder_kind} embeddings: d={config.d}, alpha={config.alpha}, "
                f"{max_steps} steps, eta0={config.effective_eta0()}, workers={config.workers}")

    if config.workers == 1:
        all_stats = [_run_worker(0, network, params, config, tables, max_steps, collector)]
    else:
        all_stats = [_WorkerStats() for _ in range(config.workers)]
        errors: List[BaseException] = []

        def target(worker_id: int) -> None:
            try:
                all_stats[worker_id] = _run_worker(worker_id, network, params, config, tables,
                                                   max_steps, collector)
            except BaseException as e:
                errors.append(e)

        threads = [threading.Thread(target=target, args=(w,), name=f"trainer-{w}")
                   for w in range(config.workers)]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()
        if errors:
            raise errors[0]

    result = TrainResult(params=params, loss_trace=collector.windows(), max_steps=max_steps,
                         nn_steps=sum(s.nn_steps for s in all_stats),
                         nc_steps=sum(s.nc_steps for s in all_stats),
                         nn_scored=sum(s.nn_scored for s in all_stats))
    final = result.loss_trace[-1].window_mean_loss if result.loss_trace else float('nan')
    logger.info(f"Training finished: {result.nn_steps} nn steps, {result.nc_steps} nc steps, "
                f"final window loss {final:.5f}")
    return result


def write_loss_trace(path, windows: Sequence[LossWindow]) -> None:
    """Write `step,branch,window_mean_loss,eta` rows"""
    with open(Path(path), 'w', encoding='utf-8', newline='\n') as handle:
        handle.write('step,branch,window_mean_loss,eta\n')
        for window in windows:
            handle.write(f"{window.step},{window.branch},{window.window_mean_loss:.6f},{window.eta:.8f}\n")
