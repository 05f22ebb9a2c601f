"""Undirected simple graphs, degree counting, and random graph generators.

Vertices are dense 0-based integers. Edge-list text files hold one edge per
line as ``u v`` (whitespace separated); lines starting with ``#`` are
comments. Files written by this module carry a ``# n_v <count>`` comment so
that trailing isolated vertices survive a round trip; foreign files without
it get their labels remapped to a dense 0-based index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "Graph",
    "DegreeCountVector",
    "degree_counts",
    "generate_er",
    "generate_er_gnp",
    "generate_two_block",
    "two_block_probabilities",
    "save_edge_list",
    "load_edge_list",
]


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


class Graph:
    """Undirected simple graph on vertices ``0..n_v-1``.

    Edges are stored canonically as an ``(n_e, 2)`` integer array with
    ``u < v`` per row, sorted lexicographically. Self-loops and duplicate
    edges are rejected.
    """

    __slots__ = ("n_v", "edges", "_degrees", "_indptr", "_neighbors")

    def __init__(self, n_v: int, edges) -> None:
        if n_v < 0:
            raise ValueError("vertex count must be nonnegative")
        e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                       dtype=np.int64)
        if e.size == 0:
            e = e.reshape(0, 2)
        if e.ndim != 2 or e.shape[1] != 2:
            raise ValueError("edges must be pairs of vertices")
        if e.size and (e.min() < 0 or e.max() >= n_v):
            raise ValueError("edge endpoint out of range")
        if np.any(e[:, 0] == e[:, 1]):
            raise ValueError("self-loops are not allowed")
        lo = np.minimum(e[:, 0], e[:, 1])
        hi = np.maximum(e[:, 0], e[:, 1])
        e = np.column_stack([lo, hi])
        order = np.lexsort((e[:, 1], e[:, 0]))
        e = e[order]
        if e.shape[0] > 1 and np.any(np.all(e[1:] == e[:-1], axis=1)):
            raise ValueError("duplicate edges are not allowed")
        self.n_v = int(n_v)
        self.edges = e
        self._degrees = None
        self._indptr = None
        self._neighbors = None

    @property
    def n_e(self) -> int:
        return self.edges.shape[0]

    def degrees(self) -> np.ndarray:
        if self._degrees is None:
            d = np.bincount(self.edges.ravel(), minlength=self.n_v)
            self._degrees = d.astype(np.int64)
        return self._degrees

    def max_degree(self) -> int:
        d = self.degrees()
        return int(d.max()) if d.size else 0

    def _build_adjacency(self) -> None:
        deg = self.degrees()
        indptr = np.zeros(self.n_v + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        nbr = np.empty(2 * self.n_e, dtype=np.int64)
        fill = indptr[:-1].copy()
        for u, v in self.edges:
            nbr[fill[u]] = v
            fill[u] += 1
            nbr[fill[v]] = u
            fill[v] += 1
        self._indptr = indptr
        self._neighbors = nbr

    def neighbors(self, u: int) -> np.ndarray:
        if self._indptr is None:
            self._build_adjacency()
        return self._neighbors[self._indptr[u]:self._indptr[u + 1]]

    def adjacency_sets(self) -> list[set[int]]:
        adj = [set() for _ in range(self.n_v)]
        for u, v in self.edges:
            adj[u].add(int(v))
            adj[v].add(int(u))
        return adj

    def adjacency_matrix(self, dtype=np.float64) -> np.ndarray:
        a = np.zeros((self.n_v, self.n_v), dtype=dtype)
        if self.n_e:
            a[self.edges[:, 0], self.edges[:, 1]] = 1
            a[self.edges[:, 1], self.edges[:, 0]] = 1
        return a

    def is_connected(self) -> bool:
        if self.n_v <= 1:
            return True
        if self._indptr is None:
            self._build_adjacency()
        seen = np.zeros(self.n_v, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            u = stack.pop()
            for v in self.neighbors(u):
                if not seen[v]:
                    seen[v] = True
                    stack.append(int(v))
        return bool(seen.all())

    def is_bipartite(self) -> bool:
        if self._indptr is None:
            self._build_adjacency()
        color = np.full(self.n_v, -1, dtype=np.int8)
        for start in range(self.n_v):
            if color[start] >= 0:
                continue
            color[start] = 0
            stack = [start]
            while stack:
                u = stack.pop()
                for v in self.neighbors(u):
                    if color[v] < 0:
                        color[v] = 1 - color[u]
                        stack.append(int(v))
                    elif color[v] == color[u]:
                        return False
        return True

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n_v == other.n_v and np.array_equal(self.edges, other.edges)

    def __hash__(self):
        return hash((self.n_v, self.edges.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n_v={self.n_v}, n_e={self.n_e})"


@dataclass
class DegreeCountVector:
    """Counts of vertices by degree, indexed ``0..max_degree_bound``.

    Entries are integers for raw counts from a graph and reals for
    estimates; all entries are nonnegative.
    """

    counts: np.ndarray
    max_degree_bound: int = field(default=-1)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.float64)
        if self.counts.ndim != 1 or self.counts.size == 0:
            raise ValueError("counts must be a nonempty 1-d vector")
        if self.max_degree_bound < 0:
            self.max_degree_bound = self.counts.size - 1
        if self.counts.size != self.max_degree_bound + 1:
            raise ValueError("counts length must be max_degree_bound + 1")
        if np.any(self.counts < 0):
            raise ValueError("degree counts must be nonnegative")

    @property
    def m(self) -> int:
        return self.max_degree_bound

    def total(self) -> float:
        return float(self.counts.sum())

    def frequencies(self) -> np.ndarray:
        tot = self.counts.sum()
        if tot <= 0:
            raise ValueError("cannot normalize an all-zero count vector")
        return self.counts / tot

    def padded(self, m: int) -> "DegreeCountVector":
        """Return a copy rebased to bound ``m`` (m >= support of counts)."""
        if m < self.max_degree_bound:
            tail = self.counts[m + 1:]
            if np.any(tail != 0):
                raise ValueError("cannot truncate nonzero counts")
            return DegreeCountVector(self.counts[:m + 1].copy(), m)
        out = np.zeros(m + 1)
        out[:self.counts.size] = self.counts
        return DegreeCountVector(out, m)


def degree_counts(g: Graph, m: int) -> DegreeCountVector:
    """Count vertices of each degree 0..m; every degree must be <= m."""
    d = g.degrees()
    if d.size and d.max() > m:
        raise ValueError(f"graph has degree {d.max()} exceeding bound {m}")
    counts = np.bincount(d, minlength=m + 1)[:m + 1]
    return DegreeCountVector(counts.astype(np.float64), m)


def _pair_index_to_edge(idx: np.ndarray, n: int) -> np.ndarray:
    """Decode lexicographic pair indices into (u, v) with u < v."""
    idx = np.asarray(idx, dtype=np.int64)
    # row u starts at offset u*n - u*(u+1)/2 - u; invert by quadratic formula
    b = 2 * n - 1
    u = np.floor((b - np.sqrt(b * b - 8.0 * idx)) / 2.0).astype(np.int64)
    # guard against float rounding at row boundaries
    for _ in range(2):
        off = u * (2 * n - u - 1) // 2
        u = np.where(idx < off, u - 1, u)
        off = (u + 1) * (2 * n - u - 2) // 2
        u = np.where(idx >= off, u + 1, u)
    off = u * (2 * n - u - 1) // 2
    v = idx - off + u + 1
    return np.column_stack([u, v])


def generate_er(n_v: int, n_e: int, seed=None) -> Graph:
    """Uniform random simple graph with exactly ``n_e`` edges."""
    max_e = n_v * (n_v - 1) // 2
    if not 0 <= n_e <= max_e:
        raise ValueError(f"n_e must be in [0, {max_e}] for n_v={n_v}")
    rng = _as_rng(seed)
    if n_e == 0:
        return Graph(n_v, [])
    idx = rng.choice(max_e, size=n_e, replace=False)
    return Graph(n_v, _pair_index_to_edge(idx, n_v))


def generate_er_gnp(n_v: int, p: float, seed=None) -> Graph:
    """Bernoulli random graph: each vertex pair is an edge with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    rng = _as_rng(seed)
    max_e = n_v * (n_v - 1) // 2
    keep = np.flatnonzero(rng.random(max_e) < p)
    return Graph(n_v, _pair_index_to_edge(keep, n_v))


def two_block_probabilities(n_v: int, target_n_e: float,
                            ratio: tuple[float, float, float]) -> tuple[float, float, float]:
    """Edge probabilities (p11, p22, p12) proportional to ``ratio`` and scaled
    so the expected edge count equals ``target_n_e``."""
    if n_v % 2 != 0:
        raise ValueError("n_v must be even (two equal blocks)")
    r11, r22, r12 = ratio
    if min(r11, r22, r12) <= 0:
        raise ValueError("ratio entries must be positive")
    half = n_v // 2
    c_within = half * (half - 1) // 2
    c_between = half * half
    scale = target_n_e / (r11 * c_within + r22 * c_within + r12 * c_between)
    p11, p22, p12 = r11 * scale, r22 * scale, r12 * scale
    if max(p11, p22, p12) > 1.0:
        raise ValueError("target edge count implies a probability above 1")
    return p11, p22, p12


def generate_two_block(n_v: int, target_n_e: float,
                       ratio: tuple[float, float, float] = (6.0, 2.0, 1.0),
                       seed=None) -> Graph:
    """Two-block Bernoulli graph with within/within/between edge probabilities
    in the given ratio, calibrated to the target expected edge count.

    Block 1 is vertices [0, n_v/2), block 2 the rest.
    """
    p11, p22, p12 = two_block_probabilities(n_v, target_n_e, ratio)
    rng = _as_rng(seed)
    half = n_v // 2
    parts = []
    # within block 1
    c = half * (half - 1) // 2
    keep = np.flatnonzero(rng.random(c) < p11)
    parts.append(_pair_index_to_edge(keep, half))
    # within block 2, shifted
    keep = np.flatnonzero(rng.random(c) < p22)
    parts.append(_pair_index_to_edge(keep, half) + half)
    # between blocks: index pairs (u, half + w)
    keep = np.flatnonzero(rng.random(half * half) < p12)
    u = keep // half
    w = keep % half
    parts.append(np.column_stack([u, w + half]))
    edges = np.vstack([part for part in parts if part.size])
    return Graph(n_v, edges)


def save_edge_list(g: Graph, path) -> None:
    path = Path(path)
    with path.open("w") as fh:
        fh.write(f"# n_v {g.n_v}\n")
        for u, v in g.edges:
            fh.write(f"{u} {v}\n")


def load_edge_list(path, map_path=None) -> Graph:
    """Load an edge-list file, remapping labels to dense 0-based indices.

    Files carrying a ``# n_v <count>`` comment (as written by
    :func:`save_edge_list`) keep their labels verbatim, so isolated
    vertices survive. Otherwise labels are remapped in sorted order; the
    old->new map is written to ``map_path`` when given.
    """
    path = Path(path)
    declared_n = None
    us, vs = [], []
    with path.open() as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                tok = line[1:].split()
                if len(tok) == 2 and tok[0] == "n_v" and tok[1].isdigit():
                    declared_n = int(tok[1])
                continue
            parts = line.split()
            if len(parts) < 2:
                raise ValueError(f"malformed edge line: {line!r}")
            us.append(int(parts[0]))
            vs.append(int(parts[1]))
    raw = np.array([us, vs], dtype=np.int64).T if us else np.zeros((0, 2), np.int64)
    if declared_n is not None:
        return Graph(declared_n, raw)
    labels = np.unique(raw) if raw.size else np.zeros(0, np.int64)
    remap = {int(old): new for new, old in enumerate(labels)}
    if map_path is not None:
        with Path(map_path).open("w") as fh:
            fh.write("# original dense\n")
            for old, new in remap.items():
                fh.write(f"{old} {new}\n")
    if raw.size:
        flat = np.array([remap[int(x)] for x in raw.ravel()], dtype=np.int64)
        raw = flat.reshape(-1, 2)
    return Graph(len(labels), raw)
