"""Browsing substrate: scale-free graph generation and edge-list I/O.

Graphs are stored as a compact immutable index (offset array + neighbor
array). Construction is single-threaded; the finished structure is
read-only and safe to share across any number of concurrent walkers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import ConfigurationError, DataError, ParseError


@dataclass(frozen=True)
class GraphMeta:
    """How a graph came to be; None fields do not apply to the source."""

    source: str                  # "generated" or a file path
    gamma_target: float | None = None
    m: int | None = None
    seed: int | None = None
    symmetrized: bool | None = None


class WebGraph:
    """Directed graph over dense node ids [0, n) with no dangling nodes.

    Generated graphs carry symmetric links (in-degree == out-degree per
    node); graphs loaded from an edge list without symmetrization are only
    guaranteed strongly connected.
    """

    __slots__ = ("n", "offsets", "neighbors", "meta", "_py_off", "_py_nbr")

    def __init__(self, n: int, offsets: np.ndarray, neighbors: np.ndarray, meta: GraphMeta):
        self.n = int(n)
        self.offsets = offsets
        self.neighbors = neighbors
        self.meta = meta
        self._py_off = None
        self._py_nbr = None

    @property
    def n_edges(self) -> int:
        """Number of directed adjacency entries."""
        return int(self.neighbors.size)

    def out_neighbors(self, u: int) -> np.ndarray:
        """Adjacency list of u, ascending, stable for the graph's lifetime."""
        if not 0 <= u < self.n:
            raise IndexError(f"node {u} out of range [0, {self.n})")
        return self.neighbors[self.offsets[u]:self.offsets[u + 1]]

    def out_degree(self, u: int) -> int:
        if not 0 <= u < self.n:
            raise IndexError(f"node {u} out of range [0, {self.n})")
        return int(self.offsets[u + 1] - self.offsets[u])

    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    def in_degrees(self) -> np.ndarray:
        return np.bincount(self.neighbors, minlength=self.n)

    def is_symmetric(self) -> bool:
        """Exhaustive check that v in adj(u) iff u in adj(v)."""
        src = np.repeat(np.arange(self.n, dtype=self.neighbors.dtype), self.degrees())
        fwd = {(int(a), int(b)) for a, b in zip(src, self.neighbors)}
        return all((b, a) in fwd for a, b in fwd)

    def py_adjacency(self):
        """Plain-list (offsets, neighbors) view for tight scalar loops."""
        if self._py_off is None:
            self._py_off = self.offsets.tolist()
            self._py_nbr = self.neighbors.tolist()
        return self._py_off, self._py_nbr

    def __getstate__(self):
        # the plain-list cache is rebuilt on demand; never ship it
        return (self.n, self.offsets, self.neighbors, self.meta)

    def __setstate__(self, state):
        self.n, self.offsets, self.neighbors, self.meta = state
        self._py_off = None
        self._py_nbr = None


def _csr_from_edges(n: int, src: np.ndarray, dst: np.ndarray):
    """Sort directed edges by (src, dst) and build the offset index."""
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=offsets[1:])
    return offsets, dst.astype(np.int64)


def generate_scale_free(n: int, m: int, gamma: float, seed: int) -> WebGraph:
    """Grow a symmetric scale-free graph by rank-based attachment.

    Nodes arrive one at a time; node i attaches min(m, i) undirected links
    to existing nodes, choosing the node of age rank R (oldest = rank 1)
    with probability proportional to R^-a where a = 1/(gamma - 1). The
    degree distribution tail then follows P(k) ~ k^-gamma. Duplicate
    targets within one arrival are re-drawn, so adjacency lists carry no
    duplicates and no self-loops, and every node has out-degree >= 1.

    Args:
        n: number of nodes, >= m + 1.
        m: undirected links added per arriving node, >= 1.
        gamma: target degree exponent, > 2.
        seed: RNG seed; the same (n, m, gamma, seed) rebuilds the graph
            bit-identically.
    """
    if m < 1:
        raise ConfigurationError(f"m must be >= 1, got {m}")
    if n <= m:
        raise ConfigurationError(f"need n >= m + 1, got n={n}, m={m}")
    if gamma <= 2:
        raise ConfigurationError(f"gamma must exceed 2, got {gamma}")
    a = 1.0 / (gamma - 1.0)
    # prefix[j] = sum of R^-a for ranks R = 1..j+1; when i nodes exist the
    # total attachment weight is prefix[i-1], and rank R maps to node R-1.
    prefix = np.cumsum(np.arange(1, n, dtype=np.float64) ** (-a))
    rng = np.random.default_rng(seed)
    src = np.empty(2 * _edge_budget(n, m), dtype=np.int64)
    dst = np.empty_like(src)
    pos = 0
    for i in range(1, n):
        k = min(m, i)
        total = prefix[i - 1]
        chosen = set()
        while len(chosen) < k:
            r = int(np.searchsorted(prefix[:i], rng.random() * total, side="right"))
            chosen.add(min(r, i - 1))  # clamp the u == total rounding corner
        for t in sorted(chosen):
            src[pos], dst[pos] = i, t
            src[pos + 1], dst[pos + 1] = t, i
            pos += 2
    offsets, neighbors = _csr_from_edges(n, src[:pos], dst[:pos])
    meta = GraphMeta(source="generated", gamma_target=gamma, m=m, seed=seed)
    return WebGraph(n, offsets, neighbors, meta)


def _edge_budget(n: int, m: int) -> int:
    """Undirected edge count of the growth process: sum of min(m, i)."""
    if n - 1 <= m:
        return (n - 1) * n // 2
    return m * (m - 1) // 2 + m * (n - 1 - (m - 1))


def load_edge_list(path, symmetrize: bool = False) -> WebGraph:
    """Load a directed edge list and keep its largest strongly connected component.

    The file holds one edge per line as two base-10 unsigned integers
    separated by a single space; '#'-prefixed lines are comments. With
    symmetrize set, the reverse of every edge is inserted before the SCC
    extraction. Surviving node ids are re-densified to [0, N) preserving
    their original order, which makes write_edge_list(load_edge_list(p))
    a byte-identical round trip for files that are already one dense SCC
    in canonical order.

    Raises:
        ParseError: malformed line (reported with its line number).
        DataError: no edges, or the largest SCC has fewer than 2 nodes
            (a single node cannot satisfy the no-dangling invariant).
    """
    src, dst = [], []
    with open(path, "rt", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(" ")
            if len(parts) != 2:
                raise ParseError(f"expected 'src dst', got {line!r}", line_no)
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(f"non-integer node id in {line!r}", line_no) from None
            if u < 0 or v < 0:
                raise ParseError(f"negative node id in {line!r}", line_no)
            src.append(u)
            dst.append(v)
    if not src:
        raise DataError(f"no edges in {path}")
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    if symmetrize:
        src, dst = np.concatenate([src, dst]), np.concatenate([dst, src])
    keep = src != dst  # self-loops violate the graph invariants
    src, dst = src[keep], dst[keep]
    if src.size == 0:
        raise DataError(f"no usable edges in {path} after dropping self-loops")

    ids = np.union1d(src, dst)
    u = np.searchsorted(ids, src)
    v = np.searchsorted(ids, dst)
    pair = np.unique(u * ids.size + v)  # dedupe directed pairs
    u, v = pair // ids.size, pair % ids.size

    adj = csr_matrix((np.ones(u.size, dtype=np.int8), (u, v)),
                     shape=(ids.size, ids.size))
    n_comp, labels = connected_components(adj, directed=True, connection="strong")
    biggest = int(np.bincount(labels).argmax())
    members = np.flatnonzero(labels == biggest)
    if members.size < 2:
        raise DataError(
            f"largest strongly connected component of {path} has "
            f"{members.size} node(s); need >= 2 for a dangling-free graph")

    remap = np.full(ids.size, -1, dtype=np.int64)
    remap[members] = np.arange(members.size)
    inside = (remap[u] >= 0) & (remap[v] >= 0)
    offsets, neighbors = _csr_from_edges(members.size, remap[u[inside]], remap[v[inside]])
    meta = GraphMeta(source=str(path), symmetrized=symmetrize)
    return WebGraph(members.size, offsets, neighbors, meta)


def write_edge_list(graph: WebGraph, path) -> None:
    """Write directed edges sorted by (source, target), one per line, LF."""
    with open(path, "wt", encoding="utf-8", newline="\n") as fh:
        offsets, neighbors = graph.offsets, graph.neighbors
        for u in range(graph.n):
            for v in neighbors[offsets[u]:offsets[u + 1]]:
                fh.write(f"{u} {v}\n")
