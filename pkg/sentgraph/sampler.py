"""
Positive edge sampling and negative sampling for node-node and
node-content links
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .errors import PreconditionError
from .graph_core import AugmentedNetwork

logger = logging.getLogger(__name__)

NEG_POWER = 0.75
REJECTION_FACTOR = 100
LINK_KINDS = ('nn', 'nc')


class NegTable:
    """Cumulative sampling table over ids weighted by weight ** power"""

    def __init__(self, weights, power: float = NEG_POWER):
        weights = np.asarray(weights, dtype=np.float64)
        if weights.ndim != 1 or len(weights) == 0:
            raise PreconditionError("Negative table needs a non-empty weight vector")
        if (weights < 0).any() or not np.isfinite(weights).all():
            raise PreconditionError("Negative table weights must be finite and non-negative")
        powered = np.power(weights, power)
        total = powered.sum()
        if total <= 0:
            raise PreconditionError("Negative table needs at least one positive weight")
        self.probabilities = powered / total
        self.cdf = np.cumsum(self.probabilities)
        self.cdf[-1] = 1.0

    def __len__(self) -> int:
        return len(self.cdf)

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.searchsorted(self.cdf, rng.random(size), side='right')


@dataclass(frozen=True)
class NegTables:
    nodes: Optional[NegTable]
    contents: Optional[NegTable]


def build_neg_tables(network: AugmentedNetwork, uniform: bool = False) -> NegTables:
    """
    Node table weighted by in-degree, content table by attachment count.
    A table is None when its edge set is empty.
    """
    node_table = content_table = None
    if len(network.edges_nn):
        weights = np.ones(network.node_count) if uniform else network.in_degrees()
        node_table = NegTable(weights)
    if len(network.edges_nc):
        weights = np.ones(network.content_count) if uniform else network.content_attachments()
        content_table = NegTable(weights)
    return NegTables(nodes=node_table, contents=content_table)


def _edges_of(network: AugmentedNetwork, link_kind: str) -> np.ndarray:
    if link_kind == 'nn':
        return network.edges_nn
    if link_kind == 'nc':
        return network.edges_nc
    raise PreconditionError(f"Unknown link kind {link_kind!r}")


def sample_positive(rng: np.random.Generator, network: AugmentedNetwork, link_kind: str) -> Tuple[int, int]:
    """Uniformly pick one edge of E_nn ('nn') or E_nc ('nc')"""
    edges = _edges_of(network, link_kind)
    if len(edges) == 0:
        raise PreconditionError(f"Cannot sample a positive '{link_kind}' edge from an empty edge set")
    u, target = edges[rng.integers(len(edges))]
    return int(u), int(target)


def _sample_rejecting(rng: np.random.Generator, k: int, table: NegTable, forbidden) -> List[int]:
    chosen: List[int] = []
    taken = set()
    attempts = 0
    limit = REJECTION_FACTOR * k
    while len(chosen) < k and attempts < limit:
        batch = table.draw(rng, min(k - len(chosen), limit - attempts))
        for candidate in batch:
            attempts += 1
            candidate = int(candidate)
            if candidate in taken or forbidden(candidate):
                continue
            taken.add(candidate)
            chosen.append(candidate)
            if len(chosen) == k:
                break
    if len(chosen) < k:
        logger.debug(f"Rejection cap reached: {len(chosen)} of {k} negatives after {attempts} draws")
    return chosen


def sample_negatives_nn(rng: np.random.Generator, u: int, k: int, network: AugmentedNetwork,
                        table: NegTable) -> List[int]:
    """
    Up to k distinct nodes v' with (u, v') not in E_nn and v' != u.

    After REJECTION_FACTOR * k draws the set found so far is returned,
    possibly short or empty, never containing an invalid id.
    """
    if k < 1:
        raise PreconditionError(f"Negative sample size must be >= 1, got {k}")
    neighbours = network.adjacency_nn[u]
    return _sample_rejecting(rng, k, table, lambda v: v == u or v in neighbours)


def sample_negatives_nc(rng: np.random.Generator, u: int, k: int, network: AugmentedNetwork,
                        table: NegTable) -> List[int]:
    """Up to k distinct contents c' with (u, c') not in E_nc; same cap as the nn case"""
    if k < 1:
        raise PreconditionError(f"Negative sample size must be >= 1, got {k}")
    attached = network.adjacency_nc[u]
    return _sample_rejecting(rng, k, table, lambda c: c in attached)
