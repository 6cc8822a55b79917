"""
Ingestion of edge lists and node contents into the augmented network
"""
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ParseError

logger = logging.getLogger(__name__)

NodeId = int
ContentId = int
Sentence = Tuple[int, ...]
Edge = Tuple[NodeId, NodeId]

PAD_WORD = '<pad>'
UNK_WORD = '<unk>'
PAD_ID = 0
UNK_ID = 1

SENTENCE_TERMINALS = '.!?。！？'
_SENTENCE_SPLIT = re.compile('[' + re.escape(SENTENCE_TERMINALS) + ']+')


class NodeIndex:
    """Interns string node keys to dense integer ids in first-seen order"""

    def __init__(self, keys: Iterable[str] = ()):
        self._ids: Dict[str, NodeId] = {}
        self._keys: List[str] = []
        for key in keys:
            self.intern(key)

    def intern(self, key: str) -> NodeId:
        node_id = self._ids.get(key)
        if node_id is None:
            node_id = len(self._keys)
            self._ids[key] = node_id
            self._keys.append(key)
        return node_id

    def get(self, key: str) -> Optional[NodeId]:
        return self._ids.get(key)

    def __contains__(self, key: str) -> bool:
        return key in self._ids

    def __len__(self) -> int:
        return len(self._keys)

    @property
    def keys(self) -> Tuple[str, ...]:
        return tuple(self._keys)


@dataclass
class Vocabulary:
    """
    Word to word-id bijection with frequency counts.

    Id 0 is the padding sentinel and id 1 the UNK word. Neither is ever
    produced by tokenization; their counts are reported as at least 1.
    """
    words: List[str] = field(default_factory=lambda: [PAD_WORD, UNK_WORD])
    counts: List[int] = field(default_factory=lambda: [1, 1])

    def __post_init__(self):
        self._ids = {word: i for i, word in enumerate(self.words)}

    def add(self, word: str, count: int = 1) -> int:
        word_id = self._ids.get(word)
        if word_id is None:
            word_id = len(self.words)
            self._ids[word] = word_id
            self.words.append(word)
            self.counts.append(count)
        else:
            self.counts[word_id] += count
        return word_id

    def id_of(self, word: str) -> int:
        return self._ids.get(word, UNK_ID)

    def __contains__(self, word: str) -> bool:
        return word in self._ids

    def __len__(self) -> int:
        return len(self.words)


def split_sentences(text: str) -> List[List[str]]:
    """Split a document on terminal punctuation and whitespace-tokenize each piece"""
    sentences = []
    for piece in _SENTENCE_SPLIT.split(text.lower()):
        tokens = piece.split()
        if tokens:
            sentences.append(tokens)
    return sentences


def _data_lines(path: Path) -> Iterator[Tuple[int, str]]:
    with open(path, 'r', encoding='utf-8') as handle:
        for line_number, raw in enumerate(handle, start=1):
            line = raw.rstrip('\r\n')
            if not line.strip() or line.lstrip().startswith('#'):
                continue
            yield line_number, line


def load_edges(path, directed: bool = True, nodes: Optional[NodeIndex] = None) -> List[Edge]:
    """
    Load a `src<TAB>dst` edge list.

    Args:
        path: Edge file path
        directed: When False each line yields both directions
        nodes: Index receiving the interned node keys

    Returns:
        Directed edges in file order, without self-loops or duplicates

    Raises:
        ParseError: On a line without exactly two fields, or an empty file
    """
    path = Path(path)
    if nodes is None:
        nodes = NodeIndex()

    edges: List[Edge] = []
    seen = set()
    data_lines = 0
    self_loops = 0
    for line_number, line in _data_lines(path):
        data_lines += 1
        fields = line.split('\t')
        if len(fields) != 2 or not fields[0].strip() or not fields[1].strip():
            raise ParseError(path, line_number, f"expected 'src<TAB>dst', got {len(fields)} field(s)")
        u = nodes.intern(fields[0].strip())
        v = nodes.intern(fields[1].strip())
        if u == v:
            self_loops += 1
            continue
        pairs = [(u, v)] if directed else [(u, v), (v, u)]
        for pair in pairs:
            if pair not in seen:
                seen.add(pair)
                edges.append(pair)

    if data_lines == 0:
        raise ParseError(path, None, "edge file is empty")

    logger.info(f"Loaded {len(edges)} directed edges over {len(nodes)} nodes from {path}")
    if self_loops:
        logger.debug(f"Dropped {self_loops} self-loops from {path}")
    return edges


def load_contents(path, vocab_min_count: int = 1,
                  nodes: Optional[NodeIndex] = None) -> Tuple[Vocabulary, List[Tuple[NodeId, Sentence]]]:
    """
    Load `node_key<TAB>document` lines and turn documents into sentences.

    Words seen fewer than vocab_min_count times map to UNK. Node keys that
    were not in the edge file are interned as isolated nodes.

    Args:
        path: Content file path
        vocab_min_count: Minimum corpus frequency for a word to keep its own id
        nodes: Index shared with load_edges

    Returns:
        (vocabulary, list of (node id, sentence))
    """
    path = Path(path)
    if nodes is None:
        nodes = NodeIndex()

    known_before = len(nodes)
    raw: List[Tuple[NodeId, List[str]]] = []
    frequencies: Counter = Counter()
    skipped = 0
    for _, line in _data_lines(path):
        key, _, text = line.partition('\t')
        key = key.strip()
        if not key:
            skipped += 1
            continue
        node_id = nodes.intern(key)
        sentences = split_sentences(text)
        if not sentences:
            skipped += 1
            continue
        for tokens in sentences:
            frequencies.update(tokens)
            raw.append((node_id, tokens))

    vocab = Vocabulary()
    rare_words = 0
    for word, count in frequencies.items():
        if count >= vocab_min_count:
            vocab.add(word, count)
        else:
            rare_words += 1
            vocab.counts[UNK_ID] += count
    if vocab.counts[UNK_ID] > 1:
        vocab.counts[UNK_ID] -= 1

    contents = [(node_id, tuple(vocab.id_of(word) for word in tokens)) for node_id, tokens in raw]

    if rare_words:
        logger.info(f"Mapped {rare_words} words seen fewer than {vocab_min_count} times to {UNK_WORD}")
    if skipped:
        logger.warning(f"Skipped {skipped} content lines with empty text in {path}")
    isolated = len(nodes) - known_before
    if isolated and known_before:
        logger.info(f"{isolated} content nodes have no edges and are kept as isolated nodes")
    logger.info(f"Loaded {len(contents)} sentences, vocabulary of {len(vocab)} words from {path}")
    return vocab, contents


@dataclass(frozen=True)
class AugmentedNetwork:
    """
    Vertices, sentence-content nodes and the two edge sets between them.

    Immutable after construction: edge arrays are read-only and adjacency
    sets are frozen, so any number of trainer workers may read it.
    """
    node_count: int
    content_sentences: Tuple[Sentence, ...]
    edges_nn: np.ndarray
    edges_nc: np.ndarray
    adjacency_nn: Tuple[FrozenSet[NodeId], ...]
    adjacency_nc: Tuple[FrozenSet[ContentId], ...]
    node_keys: Tuple[str, ...] = ()

    @property
    def content_count(self) -> int:
        return len(self.content_sentences)

    def in_degrees(self) -> np.ndarray:
        return np.bincount(self.edges_nn[:, 1], minlength=self.node_count) if len(self.edges_nn) else \
            np.zeros(self.node_count, dtype=np.int64)

    def content_attachments(self) -> np.ndarray:
        return np.bincount(self.edges_nc[:, 1], minlength=self.content_count) if len(self.edges_nc) else \
            np.zeros(self.content_count, dtype=np.int64)


def _frozen_edges(pairs: Sequence[Tuple[int, int]]) -> np.ndarray:
    array = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    array.setflags(write=False)
    return array


def build_augmented(edges: Sequence[Edge],
                    contents: Sequence[Tuple[NodeId, Sentence]],
                    node_keys: Optional[Sequence[str]] = None) -> AugmentedNetwork:
    """
    Build the augmented network from loaded edges and sentences.

    Sentences with equal token sequences share one content id, so nodes
    attached to the same sentence are linked through that content node.
    """
    node_count = len(node_keys) if node_keys is not None else 0
    for u, v in edges:
        node_count = max(node_count, u + 1, v + 1)
    for u, _ in contents:
        node_count = max(node_count, u + 1)
    if node_keys is None:
        node_keys = [str(i) for i in range(node_count)]

    adjacency_nn: List[set] = [set() for _ in range(node_count)]
    edges_nn: List[Edge] = []
    for u, v in edges:
        if u != v and v not in adjacency_nn[u]:
            adjacency_nn[u].add(v)
            edges_nn.append((u, v))

    content_ids: Dict[Sentence, ContentId] = {}
    sentences: List[Sentence] = []
    adjacency_nc: List[set] = [set() for _ in range(node_count)]
    edges_nc: List[Tuple[NodeId, ContentId]] = []
    for u, sentence in contents:
        if not sentence:
            continue
        content_id = content_ids.get(sentence)
        if content_id is None:
            content_id = len(sentences)
            content_ids[sentence] = content_id
            sentences.append(sentence)
        if content_id not in adjacency_nc[u]:
            adjacency_nc[u].add(content_id)
            edges_nc.append((u, content_id))

    network = AugmentedNetwork(
        node_count=node_count,
        content_sentences=tuple(sentences),
        edges_nn=_frozen_edges(edges_nn),
        edges_nc=_frozen_edges(edges_nc),
        adjacency_nn=tuple(frozenset(s) for s in adjacency_nn),
        adjacency_nc=tuple(frozenset(s) for s in adjacency_nc),
        node_keys=tuple(node_keys),
    )
    logger.info(f"Augmented network: {network.node_count} nodes, {network.content_count} contents, "
                f"{len(network.edges_nn)} node-node and {len(network.edges_nc)} node-content edges")
    return network


def load_network(edge_path, content_path=None, directed: bool = True,
                 vocab_min_count: int = 1) -> Tuple[AugmentedNetwork, Vocabulary]:
    """Run both loaders against one node index and build the augmented network"""
    nodes = NodeIndex()
    edges = load_edges(edge_path, directed=directed, nodes=nodes)
    if content_path is not None:
        vocab, contents = load_contents(content_path, vocab_min_count=vocab_min_count, nodes=nodes)
    else:
        vocab, contents = Vocabulary(), []
    return build_augmented(edges, contents, node_keys=nodes.keys), vocab


@dataclass(frozen=True)
class NetworkStats:
    nodes: int
    contents: int
    edges_nn: int
    edges_nc: int
    vocab: int
    mean_sentence_len: float
    nodes_without_content: int

    CSV_HEADER = 'nodes,contents,edges_nn,edges_nc,vocab,mean_sentence_len,nodes_without_content'

    def csv_row(self) -> str:
        return (f"{self.nodes},{self.contents},{self.edges_nn},{self.edges_nc},{self.vocab},"
                f"{self.mean_sentence_len:.3f},{self.nodes_without_content}")


def network_stats(network: AugmentedNetwork, vocab: Optional[Vocabulary] = None) -> NetworkStats:
    """Summary counts of an augmented network"""
    lengths = [len(s) for s in network.content_sentences]
    return NetworkStats(
        nodes=network.node_count,
        contents=network.content_count,
        edges_nn=len(network.edges_nn),
        edges_nc=len(network.edges_nc),
        vocab=len(vocab) if vocab is not None else 0,
        mean_sentence_len=float(np.mean(lengths)) if lengths else 0.0,
        nodes_without_content=sum(1 for adj in network.adjacency_nc if not adj),
    )
