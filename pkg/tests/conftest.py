"""
Shared fixtures for the sentgraph test suite
"""
import os
import sys

import numpy as np
import pytest

# Add the project root to the Python path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

os.environ.setdefault('ENV', 'test')

from sentgraph.graph_core import build_augmented  # noqa: E402
from sentgraph.params import init_params  # noqa: E402


def write_lines(path, lines):
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        for line in lines:
            handle.write(line + '\n')
    return path


@pytest.fixture
def small_network():
    """6 nodes, a directed ring plus chords, 2-3 sentences per node over 12 words"""
    edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3), (2, 5)]
    rng = np.random.default_rng(11)
    contents = []
    for node in range(6):
        for _ in range(2 + node % 2):
            length = int(rng.integers(1, 6))
            contents.append((node, tuple(int(w) for w in rng.integers(2, 14, size=length))))
    return build_augmented(edges, contents)


@pytest.fixture
def make_params():
    def factory(network, encoder_kind='wavg', d=6, seed=3, vocab_size=14):
        return init_params(network.node_count, vocab_size, d, encoder_kind, seed)
    return factory


def pytest_addoption(parser):
    parser.addoption('--slow', action='store_true', default=False,
                     help='also run the slow end-to-end training tests')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--slow'):
        return
    skip_slow = pytest.mark.skip(reason='needs --slow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)
