"""
Learnable parameters: node table with in/out halves, word table and
GRU encoder weights, plus initialization and the embedding text format
"""
import logging
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, ParseError
from .graph_core import Vocabulary

logger = logging.getLogger(__name__)

ENCODER_KINDS = ('wavg', 'gru', 'bigru')
EXPORT_KINDS = ('full', 'in', 'out')
DEFAULT_DIM = 200


@dataclass
class GruWeights:
    """Weights of one GRU direction; W_* act on inputs, U_* on the hidden state"""
    w_z: np.ndarray
    u_z: np.ndarray
    b_z: np.ndarray
    w_r: np.ndarray
    u_r: np.ndarray
    b_r: np.ndarray
    w_h: np.ndarray
    u_h: np.ndarray
    b_h: np.ndarray

    @classmethod
    def initialize(cls, rng: np.random.Generator, input_dim: int, hidden_dim: int) -> 'GruWeights':
        """Fan-balanced uniform matrices, zero biases"""
        def matrix(fan_out: int, fan_in: int) -> np.ndarray:
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            return rng.uniform(-bound, bound, size=(fan_out, fan_in))

        return cls(
            w_z=matrix(hidden_dim, input_dim), u_z=matrix(hidden_dim, hidden_dim), b_z=np.zeros(hidden_dim),
            w_r=matrix(hidden_dim, input_dim), u_r=matrix(hidden_dim, hidden_dim), b_r=np.zeros(hidden_dim),
            w_h=matrix(hidden_dim, input_dim), u_h=matrix(hidden_dim, hidden_dim), b_h=np.zeros(hidden_dim),
        )

    @classmethod
    def zeros(cls, input_dim: int, hidden_dim: int) -> 'GruWeights':
        return cls(**{name: np.zeros(shape) for name, shape in _gru_shapes(input_dim, hidden_dim).items()})

    @property
    def hidden_dim(self) -> int:
        return self.b_z.shape[0]

    @property
    def input_dim(self) -> int:
        return self.w_z.shape[1]

    def tensors(self) -> Dict[str, np.ndarray]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def copy(self) -> 'GruWeights':
        return GruWeights(**{name: array.copy() for name, array in self.tensors().items()})


def _gru_shapes(input_dim: int, hidden_dim: int) -> Dict[str, Tuple[int, ...]]:
    return {
        'w_z': (hidden_dim, input_dim), 'u_z': (hidden_dim, hidden_dim), 'b_z': (hidden_dim,),
        'w_r': (hidden_dim, input_dim), 'u_r': (hidden_dim, hidden_dim), 'b_r': (hidden_dim,),
        'w_h': (hidden_dim, input_dim), 'u_h': (hidden_dim, hidden_dim), 'b_h': (hidden_dim,),
    }


@dataclass
class ModelParams:
    """
    Every learnable tensor of a run.

    node_table rows are e_u; the first d/2 columns are e_u^in and the
    last d/2 columns e_u^out. The half accessors return views, so writes
    through them update the table.
    """
    node_table: np.ndarray
    word_table: np.ndarray
    encoder_kind: str
    gru_fwd: Optional[GruWeights] = None
    gru_bwd: Optional[GruWeights] = None
    freeze_words: bool = False
    node_keys: Tuple[str, ...] = ()

    @property
    def dim(self) -> int:
        return self.node_table.shape[1]

    @property
    def half(self) -> int:
        return self.dim // 2

    @property
    def in_half(self) -> np.ndarray:
        return self.node_table[:, :self.half]

    @property
    def out_half(self) -> np.ndarray:
        return self.node_table[:, self.half:]

    def node_vector(self, u: int) -> np.ndarray:
        """e_u^out ⊕ e_u^in, the vector scored against sentence embeddings"""
        return np.concatenate((self.out_half[u], self.in_half[u]))

    def full_embeddings(self) -> np.ndarray:
        return np.concatenate((self.out_half, self.in_half), axis=1)

    def encoder_weights(self) -> Dict[str, GruWeights]:
        weights = {}
        if self.gru_fwd is not None:
            weights['fwd'] = self.gru_fwd
        if self.gru_bwd is not None:
            weights['bwd'] = self.gru_bwd
        return weights

    def copy(self) -> 'ModelParams':
        return ModelParams(
            node_table=self.node_table.copy(),
            word_table=self.word_table.copy(),
            encoder_kind=self.encoder_kind,
            gru_fwd=self.gru_fwd.copy() if self.gru_fwd is not None else None,
            gru_bwd=self.gru_bwd.copy() if self.gru_bwd is not None else None,
            freeze_words=self.freeze_words,
            node_keys=self.node_keys,
        )

    def all_finite(self) -> bool:
        arrays = [self.node_table, self.word_table]
        for weights in self.encoder_weights().values():
            arrays.extend(weights.tensors().values())
        return all(np.isfinite(array).all() for array in arrays)


def init_params(node_count: int, vocab_size: int, d: int = DEFAULT_DIM, encoder_kind: str = 'wavg',
                seed: int = 0, word_dim: Optional[int] = None, freeze_words: bool = False,
                node_keys: Optional[Sequence[str]] = None) -> ModelParams:
    """
    Initialize all parameters as a pure function of the arguments.

    Node and word vectors are uniform on [-0.5/d, 0.5/d]. The GRU hidden
    size is d for 'gru' and d/2 per direction for 'bigru', so the pooled
    sentence vector always has dimension d.

    Raises:
        ConfigError: On odd or non-positive d, an unknown encoder, or a word
            dimension that differs from d under 'wavg'
    """
    if d < 2 or d % 2:
        raise ConfigError(f"Embedding dimension must be even and >= 2, got {d}")
    if encoder_kind not in ENCODER_KINDS:
        raise ConfigError(f"Unknown encoder {encoder_kind!r}; expected one of {', '.join(ENCODER_KINDS)}")
    word_dim = d if word_dim is None else word_dim
    if encoder_kind == 'wavg' and word_dim != d:
        raise ConfigError(f"Word dimension {word_dim} must equal node dimension {d} for wavg")

    rng = np.random.default_rng(seed)
    node_table = rng.uniform(-0.5 / d, 0.5 / d, size=(node_count, d))
    word_table = rng.uniform(-0.5 / d, 0.5 / d, size=(vocab_size, word_dim))

    gru_fwd = gru_bwd = None
    if encoder_kind == 'gru':
        gru_fwd = GruWeights.initialize(rng, word_dim, d)
    elif encoder_kind == 'bigru':
        gru_fwd = GruWeights.initialize(rng, word_dim, d // 2)
        gru_bwd = GruWeights.initialize(rng, word_dim, d // 2)

    if node_keys is None:
        node_keys = [str(i) for i in range(node_count)]
    return ModelParams(node_table=node_table, word_table=word_table, encoder_kind=encoder_kind,
                       gru_fwd=gru_fwd, gru_bwd=gru_bwd, freeze_words=freeze_words,
                       node_keys=tuple(node_keys))


def _iter_vector_file(path: Path) -> Iterator[Tuple[int, str, np.ndarray]]:
    """Yield (line number, key, vector) rows; the header is validated and skipped"""
    with open(path, 'r', encoding='utf-8') as handle:
        header = handle.readline().split()
        if len(header) != 2:
            raise ParseError(path, 1, "expected header 'count dim'")
        try:
            count, dim = int(header[0]), int(header[1])
        except ValueError:
            raise ParseError(path, 1, f"non-integer header {' '.join(header)!r}") from None

        rows = 0
        for line_number, line in enumerate(handle, start=2):
            parts = line.rstrip('\r\n').split(' ')
            if not parts or parts == ['']:
                continue
            if len(parts) != dim + 1:
                raise ParseError(path, line_number, f"expected {dim} values, got {len(parts) - 1}")
            try:
                vector = np.array([float(value) for value in parts[1:]])
            except ValueError as e:
                raise ParseError(path, line_number, f"malformed float ({e})") from None
            rows += 1
            yield line_number, parts[0], vector

        if rows != count:
            raise ParseError(path, None, f"header announces {count} rows, found {rows}")


def read_vector_header(path) -> Tuple[int, int]:
    with open(path, 'r', encoding='utf-8') as handle:
        header = handle.readline().split()
    if len(header) != 2:
        raise ParseError(path, 1, "expected header 'count dim'")
    try:
        return int(header[0]), int(header[1])
    except ValueError:
        raise ParseError(path, 1, f"non-integer header {' '.join(header)!r}") from None


def read_embeddings(path) -> Tuple[List[str], np.ndarray]:
    """Read an embedding file back into (keys, matrix)"""
    path = Path(path)
    _, dim = read_vector_header(path)
    keys, rows = [], []
    for _, key, vector in _iter_vector_file(path):
        keys.append(key)
        rows.append(vector)
    matrix = np.vstack(rows) if rows else np.zeros((0, dim))
    return keys, matrix


@dataclass(frozen=True)
class WordVectorReport:
    loaded: int
    skipped: int


def load_word_vectors(path, vocab: Vocabulary, word_table: np.ndarray) -> Tuple[np.ndarray, WordVectorReport]:
    """
    Load pretrained word vectors for the words of vocab.

    Words missing from the file keep their row of word_table; file words
    outside the vocabulary are skipped and counted.

    Returns:
        (new word table, load report)

    Raises:
        ConfigError: If the file dimension differs from the table's
        ParseError: On malformed rows
    """
    path = Path(path)
    _, dim = read_vector_header(path)
    if dim != word_table.shape[1]:
        raise ConfigError(f"Word vector file {path} has dimension {dim}, expected {word_table.shape[1]}")

    table = word_table.copy()
    loaded = skipped = 0
    for _, word, vector in _iter_vector_file(path):
        if word in vocab:
            table[vocab.id_of(word)] = vector
            loaded += 1
        else:
            skipped += 1

    report = WordVectorReport(loaded=loaded, skipped=skipped)
    logger.info(f"Loaded {loaded} pretrained word vectors from {path} ({skipped} not in vocabulary)")
    return table, report


def write_vectors(path, keys: Sequence[str], matrix: np.ndarray) -> None:
    """Write `count dim` then `key v1 ... v_dim` rows with 6 decimals"""
    path = Path(path)
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        handle.write(f"{matrix.shape[0]} {matrix.shape[1]}\n")
        for key, row in zip(keys, matrix):
            handle.write(key + ' ' + ' '.join(f"{value:.6f}" for value in row) + '\n')


def select_embeddings(params: ModelParams, which: str = 'full') -> np.ndarray:
    if which == 'full':
        return params.full_embeddings()
    if which == 'in':
        return params.in_half
    if which == 'out':
        return params.out_half
    raise ConfigError(f"Unknown export kind {which!r}; expected one of {', '.join(EXPORT_KINDS)}")


def export_embeddings(params: ModelParams, path, which: str = 'full') -> None:
    """
    Export node embeddings keyed by node key.

    'full' writes e_out ⊕ e_in (d values); 'in' and 'out' write d/2.
    """
    matrix = select_embeddings(params, which)
    write_vectors(path, params.node_keys, matrix)
    logger.info(f"Exported {matrix.shape[0]} '{which}' embeddings of dimension {matrix.shape[1]} to {path}")
