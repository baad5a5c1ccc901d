from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from cluster_pack.commons import ValidationError


@dataclass(frozen=True, eq=False)
class ClusterGraph:
    adjacency: np.ndarray
    shape: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        a = np.asarray(self.adjacency, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError(f'Adjacency must be square, got shape {a.shape}.')
        if not np.array_equal(a, a.T):
            raise ValidationError('Adjacency must be symmetric.')
        if np.any(np.diag(a) != 0):
            raise ValidationError('Adjacency must have a zero diagonal.')
        if not np.all((a == 0) | (a == 1)):
            raise ValidationError('Adjacency entries must be 0 or 1.')
        if self.shape is not None and self.shape[0] * self.shape[1] != a.shape[0]:
            raise ValidationError(f'Grid shape {self.shape} does not match {a.shape[0]} nodes.')
        object.__setattr__(self, 'adjacency', a)

    @property
    def n_nodes(self):
        return self.adjacency.shape[0]

    @property
    def degrees(self):
        return self.adjacency.sum(axis=1).astype(int)

    @property
    def odd_side_ok(self):
        """True when a grid has a side with an odd number of nodes."""
        if self.shape is None:
            return False
        rows, cols = self.shape
        return rows % 2 == 1 or cols % 2 == 1


def grid_graph(rows, cols):
    """rows x cols grid with nearest-neighbour edges, nodes in row-major order."""
    if rows < 1 or cols < 1:
        raise ValidationError(f'Grid sides must be positive, got {rows}x{cols}.')
    n = rows * cols
    a = np.zeros((n, n))
    for r in range(rows):
        for c in range(cols):
            k = r * cols + c
            if c + 1 < cols:
                a[k, k + 1] = a[k + 1, k] = 1
            if r + 1 < rows:
                a[k, k + cols] = a[k + cols, k] = 1
    return ClusterGraph(a, (rows, cols))


def from_adjacency(adjacency):
    return ClusterGraph(np.asarray(adjacency, dtype=float))


def edge_list(graph):
    """Edges as 'k k'' lines, 1-based, k < k'."""
    rows, cols = np.nonzero(np.triu(graph.adjacency))
    return '\n'.join(f'{k + 1} {kk + 1}' for k, kk in zip(rows, cols))
