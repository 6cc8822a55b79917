#!/usr/bin/env python3
"""
Skip-gram word pretraining tests
"""
import numpy as np
import pytest

from sentgraph.errors import ConfigError, PreconditionError
from sentgraph.word_pretrain import PretrainConfig, _keep_probabilities, pretrain_words, train_skipgram


def _two_topic_corpus(repeats=60):
    rng = np.random.default_rng(0)
    sentences = []
    for _ in range(repeats):
        sentences.append(tuple(int(w) for w in rng.permutation([2, 3, 4])))
        sentences.append(tuple(int(w) for w in rng.permutation([5, 6, 7])))
    return sentences


class TestTrainSkipgram:
    """Test cases for train_skipgram"""

    def test_cooccurring_words_score_higher(self):
        config = PretrainConfig(window=2, neg=3, epochs=10, eta0=0.05, d_w=10)
        model = train_skipgram(_two_topic_corpus(), 8, config, seed=1)
        assert model.score(2, 3) > model.score(2, 6)
        assert model.score(5, 7) > model.score(5, 4)

    def test_same_seed_same_table(self):
        config = PretrainConfig(window=2, neg=2, epochs=2, d_w=4)
        first = pretrain_words(_two_topic_corpus(10), config, seed=3)
        second = pretrain_words(_two_topic_corpus(10), config, seed=3)
        assert np.array_equal(first, second)
        assert first.shape == (8, 4)

    def test_padding_never_a_target(self):
        config = PretrainConfig(window=2, neg=5, epochs=2, d_w=4)
        model = train_skipgram(_two_topic_corpus(10), 10, config)
        assert np.all(model.context_table[0] == 0)
        # ids 8 and 9 are absent from the corpus
        assert np.all(model.context_table[8:] == 0)

    def test_contexts_stay_inside_sentences(self):
        config = PretrainConfig(window=5, neg=1, epochs=3, d_w=4)
        model = train_skipgram([(2,), (3,)], 4, config)
        # Single-word sentences have no context pairs, so nothing moves
        assert np.all(model.context_table == 0)

    def test_empty_corpus(self):
        with pytest.raises(PreconditionError):
            train_skipgram([(), ()], 4, PretrainConfig(d_w=4))

    def test_subsampling_runs(self):
        config = PretrainConfig(window=2, neg=2, epochs=1, d_w=4, subsample=True)
        table = pretrain_words(_two_topic_corpus(5), config)
        assert np.isfinite(table).all()

    def test_parallel_workers(self):
        config = PretrainConfig(window=2, neg=2, epochs=2, d_w=4, workers=2)
        assert np.isfinite(pretrain_words(_two_topic_corpus(10), config)).all()


class TestPretrainConfig:
    """Test cases for PretrainConfig validation and subsampling"""

    @pytest.mark.parametrize('field,value', [('window', 0), ('neg', 0), ('epochs', 0), ('eta0', 0.0),
                                             ('d_w', 0), ('workers', 0)])
    def test_invalid_values(self, field, value):
        with pytest.raises(ConfigError):
            PretrainConfig(**{field: value}).validate()

    def test_keep_probabilities(self):
        keep = _keep_probabilities(np.array([0.0, 1.0, 10_000.0]))
        assert keep[0] == 1.0
        assert keep[1] == 1.0
        assert 0.0 < keep[2] < 1.0
