"""
Synthetic labeled networks: directed stochastic block model edges plus
documents mixing community and shared vocabulary
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple

import networkx as nx
import numpy as np

from .errors import ConfigError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SynthConfig:
    nodes: int = 200
    communities: int = 2
    p_in: float = 0.05
    p_out: float = 0.005
    docs_per_node: int = 2
    sentences_per_doc: int = 2
    sentence_len_range: Tuple[int, int] = (4, 10)
    vocab_per_community: int = 50
    vocab_shared: int = 200
    content_signal: float = 0.5
    seed: int = 0

    def validate(self) -> None:
        if self.nodes < 2:
            raise ConfigError(f"nodes must be >= 2, got {self.nodes}")
        if not 1 <= self.communities <= self.nodes:
            raise ConfigError(f"communities must lie in [1, nodes], got {self.communities}")
        if not 0.0 <= self.p_out <= self.p_in <= 1.0:
            raise ConfigError(f"Need 0 <= p_out <= p_in <= 1, got p_in={self.p_in}, p_out={self.p_out}")
        if not 0.0 <= self.content_signal <= 1.0:
            raise ConfigError(f"content_signal must lie in [0, 1], got {self.content_signal}")
        low, high = self.sentence_len_range
        if not 1 <= low <= high:
            raise ConfigError(f"Invalid sentence length range {self.sentence_len_range}")
        if self.docs_per_node < 1 or self.sentences_per_doc < 1:
            raise ConfigError("docs_per_node and sentences_per_doc must be >= 1")
        if self.vocab_per_community < 1 or self.vocab_shared < 1:
            raise ConfigError("Vocabulary sizes must be >= 1")


@dataclass(frozen=True)
class SynthFiles:
    edges: Path
    contents: Path
    labels: Path
    edge_count: int
    document_count: int
    node_count: int


def community_sizes(nodes: int, communities: int) -> List[int]:
    sizes = [nodes // communities] * communities
    for i in range(nodes % communities):
        sizes[i] += 1
    return sizes


def node_key(node: int) -> str:
    return f"n{node}"


def sbm_edges(config: SynthConfig) -> Tuple[List[Tuple[int, int]], List[int]]:
    """Directed SBM edges in sorted order, plus the community of each node"""
    sizes = community_sizes(config.nodes, config.communities)
    probabilities = np.full((config.communities, config.communities), config.p_out)
    np.fill_diagonal(probabilities, config.p_in)
    graph = nx.stochastic_block_model(sizes, probabilities.tolist(), seed=config.seed,
                                      directed=True, selfloops=False)
    communities = [0] * config.nodes
    for node, block in graph.nodes(data='block'):
        communities[node] = block
    return sorted(graph.edges()), communities


def _document(rng: np.random.Generator, community: int, config: SynthConfig) -> str:
    low, high = config.sentence_len_range
    sentences = []
    for _ in range(config.sentences_per_doc):
        length = int(rng.integers(low, high + 1))
        words = []
        for use_community in rng.random(length) < config.content_signal:
            if use_community:
                words.append(f"c{community}w{int(rng.integers(config.vocab_per_community))}")
            else:
                words.append(f"s{int(rng.integers(config.vocab_shared))}")
        sentences.append(' '.join(words) + '.')
    return ' '.join(sentences)


def generate(config: SynthConfig, out_dir, prefix: str = 'synth') -> SynthFiles:
    """
    Write `<prefix>.edges`, `<prefix>.contents` and `<prefix>.labels` in
    the ingestion formats. Same config gives byte-identical files.
    """
    config.validate()
    out_dir = Path(out_dir)
    if not out_dir.is_dir():
        raise ConfigError(f"Output directory does not exist: {out_dir}")

    edges, communities = sbm_edges(config)
    if not edges:
        raise ConfigError(f"The block model drew no edges for nodes={config.nodes}, p_in={config.p_in}, "
                          f"p_out={config.p_out}; raise --p-in or --p-out")
    rng = np.random.default_rng(config.seed)

    files = SynthFiles(edges=out_dir / f"{prefix}.edges", contents=out_dir / f"{prefix}.contents",
                       labels=out_dir / f"{prefix}.labels", edge_count=len(edges),
                       document_count=config.nodes * config.docs_per_node, node_count=config.nodes)

    with open(files.edges, 'w', encoding='utf-8', newline='\n') as handle:
        handle.write(f"# directed SBM: nodes={config.nodes} communities={config.communities} "
                     f"p_in={config.p_in} p_out={config.p_out} seed={config.seed}\n")
        for u, v in edges:
            handle.write(f"{node_key(u)}\t{node_key(v)}\n")

    with open(files.contents, 'w', encoding='utf-8', newline='\n') as handle:
        for node in range(config.nodes):
            for _ in range(config.docs_per_node):
                handle.write(f"{node_key(node)}\t{_document(rng, communities[node], config)}\n")

    with open(files.labels, 'w', encoding='utf-8', newline='\n') as handle:
        for node in range(config.nodes):
            handle.write(f"{node_key(node)}\tcommunity{communities[node]}\n")

    logger.info(f"Generated {config.nodes} nodes, {len(edges)} edges, "
                f"{files.document_count} documents under {out_dir}")
    return files
