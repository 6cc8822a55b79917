#!/usr/bin/env python3
"""
Synthetic labeled network generator tests
"""
import numpy as np
import pytest

from sentgraph.errors import ConfigError
from sentgraph.evaluation import load_labels
from sentgraph.graph_core import load_network
from sentgraph.synth import SynthConfig, community_sizes, generate, sbm_edges


class TestSbmEdges:
    """Test cases for the block model edges"""

    def test_expected_edge_count(self):
        """200 nodes, 2 blocks: E|E| = 990 within + 100 across"""
        print("\n🕸️  Directed SBM edge count")
        edges, communities = sbm_edges(SynthConfig(seed=3))
        sigma = np.sqrt(19800 * 0.05 * 0.95 + 20000 * 0.005 * 0.995)
        print(f"✅ {len(edges)} edges, expected 1090 ± {3 * sigma:.0f}")
        assert abs(len(edges) - 1090) <= 3 * sigma
        assert all(u != v for u, v in edges)
        assert communities.count(0) == communities.count(1) == 100

    def test_equal_probabilities_give_no_block_preference(self):
        edges, communities = sbm_edges(SynthConfig(p_in=0.05, p_out=0.05, seed=4))
        within = sum(communities[u] == communities[v] for u, v in edges) / len(edges)
        expected = 19800 / 39800
        assert abs(within - expected) <= 3 * np.sqrt(expected * (1 - expected) / len(edges))

    def test_community_sizes(self):
        assert community_sizes(10, 3) == [4, 3, 3]


class TestGenerate:
    """Test cases for generate"""

    def test_files_reingest(self, tmp_path):
        config = SynthConfig(nodes=40, p_in=0.2, p_out=0.02, seed=1)
        files = generate(config, tmp_path)
        network, vocab = load_network(files.edges, files.contents)
        labeled = load_labels(files.labels)
        assert network.node_count == 40
        assert len(network.edges_nn) == files.edge_count
        assert len(labeled) == 40
        assert set(labeled.label_names) == {'community0', 'community1'}
        assert len(vocab) > 2
        assert files.document_count == 80

    def test_byte_identical_for_same_config(self, tmp_path):
        config = SynthConfig(nodes=30, seed=9)
        first = generate(config, tmp_path, prefix='a')
        second = generate(config, tmp_path, prefix='b')
        for name in ('edges', 'contents', 'labels'):
            assert getattr(first, name).read_bytes() == getattr(second, name).read_bytes()

    def test_zero_signal_uses_shared_words_only(self, tmp_path):
        files = generate(SynthConfig(nodes=20, content_signal=0.0, seed=2), tmp_path)
        for line in files.contents.read_text(encoding='utf-8').splitlines():
            _, text = line.split('\t')
            words = text.replace('.', ' ').split()
            assert words and all(word.startswith('s') for word in words)

    def test_full_signal_uses_community_words_only(self, tmp_path):
        files = generate(SynthConfig(nodes=20, content_signal=1.0, seed=2), tmp_path)
        labels = dict(line.split('\t') for line in files.labels.read_text(encoding='utf-8').splitlines())
        for line in files.contents.read_text(encoding='utf-8').splitlines():
            key, text = line.split('\t')
            community = labels[key].replace('community', '')
            assert all(word.startswith(f"c{community}w") for word in text.replace('.', ' ').split())

    def test_sentence_lengths_within_range(self, tmp_path):
        config = SynthConfig(nodes=10, sentence_len_range=(2, 3), sentences_per_doc=3)
        files = generate(config, tmp_path)
        for line in files.contents.read_text(encoding='utf-8').splitlines():
            sentences = [s.split() for s in line.split('\t')[1].split('.') if s.strip()]
            assert len(sentences) == 3
            assert all(2 <= len(s) <= 3 for s in sentences)

    @pytest.mark.parametrize('overrides', [dict(p_in=0.01, p_out=0.1), dict(content_signal=1.5),
                                           dict(nodes=1), dict(sentence_len_range=(5, 2))])
    def test_invalid_config(self, tmp_path, overrides):
        with pytest.raises(ConfigError):
            generate(SynthConfig(**overrides), tmp_path)

    def test_missing_output_directory(self, tmp_path):
        with pytest.raises(ConfigError):
            generate(SynthConfig(nodes=10), tmp_path / 'absent')

    def test_edgeless_network_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match='--p-in'):
            generate(SynthConfig(nodes=20, p_in=0.0, p_out=0.0, seed=1), tmp_path)
        assert not (tmp_path / 'synth.edges').exists()
