"""
Sensitivity sweeps over the balance weight and the number of epochs
"""
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .evaluation import DEFAULT_ITERS, DEFAULT_LAMBDA, LabeledSet, evaluate
from .graph_core import AugmentedNetwork
from .params import init_params
from .trainer import TrainConfig, train

logger = logging.getLogger(__name__)

DEFAULT_ALPHAS = tuple(round(0.1 * i, 1) for i in range(11))
DEFAULT_EPOCH_GRID = (1, 5, 10, 25, 50, 100)


@dataclass(frozen=True)
class SweepRow:
    value: float
    mean_micro_f1: float
    std: float
    trials: int


def sweep_csv(name: str, rows: Sequence[SweepRow]) -> str:
    lines = [f"{name},mean_micro_f1,std,trials"]
    lines.extend(f"{row.value:g},{row.mean_micro_f1:.6f},{row.std:.6f},{row.trials}" for row in rows)
    return '\n'.join(lines) + '\n'


def write_sweep_csv(path, name: str, rows: Sequence[SweepRow]) -> None:
    with open(Path(path), 'w', encoding='utf-8', newline='\n') as handle:
        handle.write(sweep_csv(name, rows))


def train_embeddings(network: AugmentedNetwork, vocab_size: int, config: TrainConfig,
                     word_table: Optional[np.ndarray] = None) -> Dict[str, np.ndarray]:
    """Fresh parameters from config.seed, trained, as key -> (out ⊕ in) vector"""
    params = init_params(network.node_count, vocab_size, config.d, config.encoder_kind, config.seed,
                         word_dim=word_table.shape[1] if word_table is not None else None,
                         node_keys=network.node_keys)
    if word_table is not None:
        params.word_table = word_table.copy()
    train(network, params, config)
    return dict(zip(params.node_keys, params.full_embeddings()))


def _sweep(values, configure, network, vocab_size, labeled, base_config, ratio, trials, seed, lam, iters,
           word_table, label) -> List[SweepRow]:
    rows = []
    for value in values:
        config = configure(base_config, value)
        embeddings = train_embeddings(network, vocab_size, config, word_table)
        result = evaluate(embeddings, labeled, ratios=[ratio], trials=trials, seed=seed, lam=lam,
                          iters=iters).rows[0]
        logger.info(f"{label}={value:g}: Micro-F1 {result.mean_micro_f1:.4f}")
        rows.append(SweepRow(value=value, mean_micro_f1=result.mean_micro_f1, std=result.std,
                             trials=result.trials))
    return rows


def alpha_sweep(network: AugmentedNetwork, vocab_size: int, labeled: LabeledSet, base_config: TrainConfig,
                alphas: Sequence[float] = DEFAULT_ALPHAS, ratio: float = 0.5, trials: int = 40,
                seed: int = 0, lam: float = DEFAULT_LAMBDA, iters: int = DEFAULT_ITERS,
                word_table: Optional[np.ndarray] = None) -> List[SweepRow]:
    """Train and evaluate once per balance weight"""
    return _sweep(alphas, lambda config, alpha: replace(config, alpha=float(alpha)), network, vocab_size,
                  labeled, base_config, ratio, trials, seed, lam, iters, word_table, 'alpha')


def epoch_sweep(network: AugmentedNetwork, vocab_size: int, labeled: LabeledSet, base_config: TrainConfig,
                epoch_grid: Sequence[int] = DEFAULT_EPOCH_GRID, ratio: float = 0.5, trials: int = 40,
                seed: int = 0, lam: float = DEFAULT_LAMBDA, iters: int = DEFAULT_ITERS,
                word_table: Optional[np.ndarray] = None) -> List[SweepRow]:
    """Train and evaluate once per epoch count"""
    return _sweep(epoch_grid, lambda config, epochs: replace(config, epochs=int(epochs), max_steps=None),
                  network, vocab_size, labeled, base_config, ratio, trials, seed, lam, iters, word_table,
                  'epochs')
