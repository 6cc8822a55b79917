"""
Skip-gram with negative sampling over the content sentences, used to
pretrain the word table
"""
import logging
import threading
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.special import expit

from .errors import ConfigError, PreconditionError
from .graph_core import PAD_ID, Sentence
from .sampler import NegTable
from .trainer import learning_rate

logger = logging.getLogger(__name__)

SUBSAMPLE_THRESHOLD = 1e-3


@dataclass
class PretrainConfig:
    window: int = 5
    neg: int = 15
    epochs: int = 5
    eta0: float = 0.025
    d_w: int = 200
    workers: int = 1
    subsample: bool = False

    def validate(self) -> None:
        if self.window < 1:
            raise ConfigError(f"window must be >= 1, got {self.window}")
        if self.neg < 1:
            raise ConfigError(f"neg must be >= 1, got {self.neg}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.eta0 <= 0:
            raise ConfigError(f"eta0 must be positive, got {self.eta0}")
        if self.d_w < 1:
            raise ConfigError(f"d_w must be >= 1, got {self.d_w}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")


@dataclass
class SkipGramModel:
    word_table: np.ndarray
    context_table: np.ndarray

    def score(self, center: int, context: int) -> float:
        return float(expit(self.word_table[center] @ self.context_table[context]))


def _keep_probabilities(counts: np.ndarray) -> np.ndarray:
    """word2vec subsampling: keep probability (sqrt(f / (t * total)) + 1) * t * total / f"""
    threshold = SUBSAMPLE_THRESHOLD * counts.sum()
    with np.errstate(divide='ignore', invalid='ignore'):
        keep = (np.sqrt(counts / threshold) + 1.0) * threshold / counts
    keep[~np.isfinite(keep)] = 1.0
    return np.minimum(keep, 1.0)


def _train_sentences(worker_id: int, model: SkipGramModel, sentences: Sequence[Sentence],
                     table: NegTable, keep: Optional[np.ndarray], config: PretrainConfig,
                     seed: int, total_centers: int) -> None:
    rng = np.random.default_rng(seed + worker_id)
    words, contexts = model.word_table, model.context_table
    processed = 0
    for _ in range(config.epochs):
        for index in range(worker_id, len(sentences), config.workers):
            tokens = sentences[index]
            if keep is not None:
                draws = rng.random(len(tokens))
                tokens = [t for t, r in zip(tokens, draws) if r < keep[t]]
            for position, center in enumerate(tokens):
                eta = learning_rate(processed * config.workers, total_centers, config.eta0)
                processed += 1
                low = max(0, position - config.window)
                high = min(len(tokens), position + config.window + 1)
                for context_position in range(low, high):
                    if context_position == position:
                        continue
                    context = tokens[context_position]
                    negatives = [int(n) for n in table.draw(rng, config.neg) if n != context]
                    target_ids = [context] + negatives
                    labels = np.zeros(len(target_ids))
                    labels[0] = 1.0
                    target_matrix = contexts[target_ids]
                    gradient = eta * (labels - expit(target_matrix @ words[center]))
                    center_update = gradient @ target_matrix
                    np.add.at(contexts, target_ids, np.outer(gradient, words[center]))
                    words[center] += center_update


def train_skipgram(sentences: Sequence[Sentence], vocab_size: int, config: PretrainConfig,
                   seed: int = 0, counts: Optional[Sequence[int]] = None) -> SkipGramModel:
    """
    Train skip-gram word and context vectors. Contexts never cross
    sentence boundaries. Deterministic for workers = 1.

    Args:
        sentences: Word-id sequences
        vocab_size: Number of rows of the word table
        config: Pretraining settings
        seed: Random seed
        counts: Corpus frequency per word id; computed from sentences when omitted

    Raises:
        PreconditionError: If the corpus is empty
    """
    config.validate()
    sentences = [tuple(s) for s in sentences if len(s) > 0]
    if not sentences:
        raise PreconditionError("Cannot pretrain word vectors on an empty corpus")

    observed = np.bincount(np.concatenate([np.asarray(s) for s in sentences]), minlength=vocab_size)
    weights = np.asarray(counts, dtype=np.float64) if counts is not None else observed.astype(np.float64)
    weights = weights.copy()
    weights[PAD_ID] = 0.0
    weights[observed == 0] = 0.0
    table = NegTable(weights)
    keep = _keep_probabilities(observed.astype(np.float64)) if config.subsample else None

    rng = np.random.default_rng(seed)
    d = config.d_w
    model = SkipGramModel(word_table=rng.uniform(-0.5 / d, 0.5 / d, size=(vocab_size, d)),
                          context_table=np.zeros((vocab_size, d)))
    total_centers = max(1, config.epochs * int(observed.sum()))

    logger.info(f"Pretraining {vocab_size} word vectors (d={d}) on {len(sentences)} sentences, "
                f"{config.epochs} epochs, window {config.window}")
    args = (model, sentences, table, keep, config, seed, total_centers)
    if config.workers == 1:
        _train_sentences(0, *args)
    else:
        threads = [threading.Thread(target=_train_sentences, args=(w, *args), name=f"pretrain-{w}")
                   for w in range(config.workers)]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()
    return model


def pretrain_words(sentences: Sequence[Sentence], config: PretrainConfig, seed: int = 0,
                   vocab_size: Optional[int] = None, counts: Optional[Sequence[int]] = None) -> np.ndarray:
    """Pretrained word table (the skip-gram input vectors)"""
    corpus: List[Sentence] = list(sentences)
    if vocab_size is None:
        vocab_size = 1 + max((max(s) for s in corpus if s), default=PAD_ID)
    return train_skipgram(corpus, vocab_size, config, seed=seed, counts=counts).word_table
