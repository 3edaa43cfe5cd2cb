"""Per-node SIS probability recursion on explicit graphs.

The canonical update for node ``i`` is::

    p_i' = 1 - (1 - a p_i) * prod_{j ~ i} (1 - b p_j)

with ``a = 1 - delta`` (survival of an infection through one step) and
``b = beta`` (per-edge infection probability). The products are taken by
sequential multiplication in neighbor order.

An alternative ``rule="implicit"`` is provided, in which the cure term is
applied to the *current* probability and then solved out::

    p_i' = (1 - (1 - p_i) zeta_i) / (1 + delta zeta_i)

It is only used to study the spoke-spread contraction factor that form
produces; everything else in the package is built on the explicit rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .errors import DimensionError, ParameterError, StateRangeError, TopologyError

RULES = ("explicit", "implicit")


@dataclass(frozen=True)
class Params:
    """Model parameters ``a = 1 - delta`` and ``b = beta``, both strictly in (0, 1)."""

    a: float
    b: float

    def __post_init__(self):
        for name in ("a", "b"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float, np.floating, np.integer)):
                raise ParameterError(f"{name} must be a real number, got {v!r}")
            v = float(v)
            if not (0.0 < v < 1.0):
                raise ParameterError(f"{name} must lie strictly inside (0, 1), got {v!r}")
            object.__setattr__(self, name, v)

    @property
    def delta(self) -> float:
        """Cure probability ``1 - a``."""
        return 1.0 - self.a

    @property
    def beta(self) -> float:
        return self.b


@dataclass(frozen=True, eq=False)
class GraphTopology:
    """Undirected simple graph stored as per-node neighbor lists.

    ``levels`` is optional metadata (the depth of each node in a
    multilevel star, hub = 0); it is ``None`` for arbitrary graphs.
    """

    node_count: int
    neighbors: tuple[tuple[int, ...], ...]
    levels: tuple[int, ...] | None = None
    _csr: tuple[np.ndarray, np.ndarray] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.node_count, (int, np.integer)) or self.node_count < 1:
            raise TopologyError(f"node_count must be a positive integer, got {self.node_count!r}")
        nbrs = tuple(tuple(int(j) for j in row) for row in self.neighbors)
        if len(nbrs) != self.node_count:
            raise TopologyError("need exactly one neighbor list per node")
        for i, row in enumerate(nbrs):
            if len(set(row)) != len(row):
                raise TopologyError(f"duplicate edge at node {i}")
            for j in row:
                if not 0 <= j < self.node_count:
                    raise TopologyError(f"node {i} lists out-of-range neighbor {j}")
                if j == i:
                    raise TopologyError(f"self-loop at node {i}")
                if i not in nbrs[j]:
                    raise TopologyError(f"asymmetric adjacency between {i} and {j}")
        if self.levels is not None and len(self.levels) != self.node_count:
            raise TopologyError("levels must have one entry per node")
        object.__setattr__(self, "neighbors", nbrs)
        indptr = np.zeros(self.node_count + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(r) for r in nbrs])
        indices = np.fromiter((j for r in nbrs for j in r), dtype=np.int64, count=int(indptr[-1]))
        object.__setattr__(self, "_csr", (indptr, indices))

    @property
    def edge_count(self) -> int:
        return int(self._csr[0][-1]) // 2

    def degree(self, i: int) -> int:
        return len(self.neighbors[i])

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Adjacency in CSR form ``(indptr, indices)``."""
        return self._csr

    def is_star(self) -> bool:
        """True for a hub (node 0) joined to every other node and nothing else."""
        if self.node_count < 2:
            return False
        if set(self.neighbors[0]) != set(range(1, self.node_count)):
            return False
        return all(self.neighbors[i] == (0,) for i in range(1, self.node_count))


def build_star(n: int) -> GraphTopology:
    """Star with hub 0 and spokes ``1..n``."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise ParameterError(f"spoke count must be a positive integer, got {n!r}")
    n = int(n)
    nbrs = [tuple(range(1, n + 1))] + [(0,)] * n
    return GraphTopology(n + 1, tuple(nbrs), levels=(0,) + (1,) * n)


def build_multilevel_star(counts: Sequence[int]) -> GraphTopology:
    """Rooted tree where every level-k node has ``counts[k]`` children.

    Nodes are numbered breadth-first, so each level occupies a contiguous
    index range.
    """
    counts = list(counts)
    if not counts:
        raise ParameterError("counts must be non-empty")
    for c in counts:
        if isinstance(c, bool) or not isinstance(c, (int, np.integer)) or c < 1:
            raise ParameterError(f"every level count must be a positive integer, got {c!r}")
    adj: list[list[int]] = [[]]
    levels = [0]
    frontier = [0]
    for depth, c in enumerate(counts, start=1):
        nxt = []
        for parent in frontier:
            for _ in range(int(c)):
                child = len(adj)
                adj.append([parent])
                adj[parent].append(child)
                levels.append(depth)
                nxt.append(child)
        frontier = nxt
    return GraphTopology(len(adj), tuple(tuple(r) for r in adj), levels=tuple(levels))


def check_probabilities(p, length: int | None = None) -> np.ndarray:
    """Validate a probability vector; out-of-range entries are rejected, never clamped."""
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1:
        raise DimensionError(f"state must be one-dimensional, got shape {arr.shape}")
    if length is not None and arr.shape[0] != length:
        raise DimensionError(f"state has length {arr.shape[0]}, topology has {length} nodes")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise StateRangeError("every probability must be finite and lie in [0, 1]")
    return arr


def step_full(topology: GraphTopology, params: Params, state, rule: str = "explicit") -> np.ndarray:
    """One synchronous update of every node's infection probability."""
    if rule not in RULES:
        raise ValueError(f"rule must be one of {RULES}, got {rule!r}")
    p = check_probabilities(state, topology.node_count)
    indptr, indices = topology.csr()
    return kernels.active.full_step(indptr, indices, params.a, params.b, p, rule == "implicit")


def iterate_full(topology: GraphTopology, params: Params, state, steps: int,
                 rule: str = "explicit") -> np.ndarray:
    """Return the ``(steps + 1, node_count)`` array of iterates, initial state first."""
    p = check_probabilities(state, topology.node_count)
    out = np.empty((steps + 1, p.shape[0]))
    out[0] = p
    indptr, indices = topology.csr()
    step = kernels.active.full_step
    implicit = rule == "implicit"
    for t in range(steps):
        out[t + 1] = step(indptr, indices, params.a, params.b, out[t], implicit)
    return out


def spoke_spread(topology: GraphTopology, state) -> float:
    """Largest pairwise gap between spoke probabilities of a star."""
    if not topology.is_star():
        raise TopologyError("spoke_spread needs a 2-level star (hub 0 plus leaves)")
    p = check_probabilities(state, topology.node_count)
    spokes = p[1:]
    return float(spokes.max() - spokes.min())


def level_spreads(topology: GraphTopology, state) -> np.ndarray:
    """Within-level spread (max - min) for every level of a multilevel star."""
    if topology.levels is None:
        raise TopologyError("topology carries no level information")
    p = check_probabilities(state, topology.node_count)
    lv = np.asarray(topology.levels)
    return np.array([p[lv == k].max() - p[lv == k].min() for k in range(lv.max() + 1)])


def spread_factor(params: Params, hub: float, rule: str = "explicit") -> float:
    """Exact one-step contraction of the spoke spread given the hub value.

    For the explicit rule each spoke moves as ``1 - (1 - a p)(1 - b hub)``,
    so gaps scale by ``a (1 - b hub)``. For the implicit rule the factor is
    ``zeta / (1 + delta zeta)`` with ``zeta = 1 - b hub``.
    """
    zeta = 1.0 - params.b * hub
    if rule == "explicit":
        return params.a * zeta
    if rule == "implicit":
        return zeta / (1.0 + params.delta * zeta)
    raise ValueError(f"rule must be one of {RULES}, got {rule!r}")


def project_star(state) -> tuple[float, float]:
    """(hub, spoke) pair of a homogeneous star state; spokes must be identical."""
    p = np.asarray(state, dtype=float)
    if not np.all(p[1:] == p[1]):
        raise ValueError("spokes are not homogeneous")
    return float(p[0]), float(p[1])


def largest_adjacency_eigenvalue(topology: GraphTopology) -> float:
    """Spectral radius of the adjacency matrix (``sqrt(n)`` for an n-star)."""
    if topology.is_star():
        return math.sqrt(topology.node_count - 1)
    from scipy.sparse import csr_matrix
    from scipy.sparse.linalg import eigsh

    indptr, indices = topology.csr()
    A = csr_matrix((np.ones(indices.shape[0]), indices, indptr),
                   shape=(topology.node_count, topology.node_count))
    if topology.node_count <= 3:
        return float(np.max(np.abs(np.linalg.eigvalsh(A.toarray()))))
    return float(eigsh(A, k=1, which="LA", return_eigenvectors=False)[0])
