"""Graph container, edge-list I/O, descriptive statistics and edge hiding.

Graphs are undirected, unweighted and simple. Nodes are the integers
``0..n-1``; the original labels from an input file are kept in
``Graph.labels`` so outputs can be written back in the caller's id space.
"""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, TextIO

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .errors import ParseError, ValidationError

DEFAULT_DISTANCE_SAMPLE = 10_000


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple undirected graph stored as CSR neighbor lists.

    ``indices[indptr[u]:indptr[u + 1]]`` is the sorted neighbor list of ``u``.
    Build instances with :meth:`from_edges` rather than the raw constructor.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    labels: np.ndarray = field(repr=False)

    @classmethod
    def from_edges(cls, n: int, edges, labels=None) -> "Graph":
        """Build a graph on ``n`` nodes from an iterable or ``(m, 2)`` array of pairs.

        Duplicates (in either orientation) collapse to one edge. Self-loops and
        out-of-range ids raise :class:`ValidationError`.
        """
        n = int(n)
        if n < 1:
            raise ValidationError("graph must have at least one node")
        arr = np.asarray(edges, dtype=np.int64)
        if arr.size == 0:
            arr = arr.reshape(0, 2)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValidationError("edges must be a sequence of node pairs")
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ValidationError(f"edge endpoint outside 0..{n - 1}")
        loops = np.flatnonzero(arr[:, 0] == arr[:, 1])
        if loops.size:
            raise ValidationError(f"self-loop on node {arr[loops[0], 0]}")
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        keys = np.unique(lo * n + hi)
        lo, hi = keys // n, keys % n
        rows = np.concatenate([lo, hi])
        cols = np.concatenate([hi, lo])
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
        if labels is None:
            labels = np.arange(n, dtype=np.int64)
        labels = np.asarray(labels, dtype=np.int64)
        if labels.shape != (n,):
            raise ValidationError("labels must have one entry per node")
        for a in (indptr, cols, labels):
            a.setflags(write=False)
        return cls(n, indptr, cols, labels)

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.diff(self.indptr)
        deg.setflags(write=False)
        return deg

    @property
    def m(self) -> int:
        return int(self.indices.size // 2)

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    @cached_property
    def edges(self) -> np.ndarray:
        """``(m, 2)`` array of edges with ``u < v``, sorted lexicographically."""
        rows = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        mask = rows < self.indices
        out = np.column_stack([rows[mask], self.indices[mask]])
        out.setflags(write=False)
        return out

    @cached_property
    def _edge_keys(self) -> np.ndarray:
        # sorted because edges are lexicographically sorted
        return self.edges[:, 0] * self.n + self.edges[:, 1]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < nb.size and nb[i] == v)

    def has_edges(self, us, vs) -> np.ndarray:
        """Vectorized :meth:`has_edge` over paired arrays of endpoints."""
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        keys = np.minimum(us, vs) * self.n + np.maximum(us, vs)
        ek = self._edge_keys
        if ek.size == 0:
            return np.zeros(keys.shape, dtype=bool)
        pos = np.minimum(np.searchsorted(ek, keys), ek.size - 1)
        return ek[pos] == keys

    def adjacency_matrix(self) -> sp.csr_matrix:
        data = np.ones(self.indices.size, dtype=np.float64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def is_complete(self) -> bool:
        return self.m == self.n * (self.n - 1) // 2

    def check_invariants(self) -> None:
        """Full adjacency scan for simplicity and symmetry; raises on violation."""
        for u in range(self.n):
            nb = self.neighbors(u)
            if np.any(nb == u):
                raise ValidationError(f"self-loop on node {u}")
            if nb.size > 1 and np.any(np.diff(nb) <= 0):
                raise ValidationError(f"neighbor list of {u} not strictly sorted")
            for v in nb:
                if not self.has_edge(int(v), u):
                    raise ValidationError(f"asymmetric adjacency {u}->{v}")
        if 2 * self.m != int(self.degrees.sum()):
            raise ValidationError("edge count does not match degree sum")

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def number_of_components(g: Graph) -> int:
    ncomp, _ = csgraph.connected_components(g.adjacency_matrix(), directed=False)
    return int(ncomp)


def is_connected(g: Graph) -> bool:
    return number_of_components(g) == 1


# ---------------------------------------------------------------------------
# edge-list files


def _iter_lines(source) -> Iterable[str]:
    if isinstance(source, str):
        return io.StringIO(source)
    return source


def load_edge_list(source: str | TextIO | Iterable[str], node_order=None) -> Graph:
    """Parse an edge list into a :class:`Graph`.

    ``source`` is the text itself or any iterable of lines. Lines starting
    with ``#`` or ``%`` are comments. Node ids are compacted to ``0..n-1`` in
    order of first appearance, unless ``node_order`` (a sequence of labels)
    fixes the id assignment explicitly.
    """
    index: dict[int, int] = {}
    if node_order is not None:
        for lab in node_order:
            index.setdefault(int(lab), len(index))
    pairs: list[tuple[int, int]] = []
    for lineno, raw in enumerate(_iter_lines(source), start=1):
        line = raw.strip()
        if not line or line[0] in "#%":
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected two node ids, got {len(parts)} fields", lineno)
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"non-integer node id in {line!r}", lineno) from None
        if a < 0 or b < 0:
            raise ParseError("node ids must be non-negative", lineno)
        if a == b:
            raise ValidationError(f"line {lineno}: self-loop on node {a}")
        for lab in (a, b):
            if lab not in index:
                if node_order is not None:
                    raise ParseError(f"node {lab} missing from node order", lineno)
                index[lab] = len(index)
        pairs.append((index[a], index[b]))
    if not pairs:
        raise ValidationError("edge list is empty")
    labels = np.fromiter(index.keys(), dtype=np.int64, count=len(index))
    return Graph.from_edges(len(index), pairs, labels=labels)


def read_edge_list(path: str | os.PathLike, node_order=None) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return load_edge_list(fh, node_order=node_order)


def format_edge_list(g: Graph, edges=None, use_labels: bool = True) -> str:
    edges = g.edges if edges is None else np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if use_labels:
        edges = g.labels[edges]
    return "".join(f"{a} {b}\n" for a, b in edges.tolist())


def write_edge_list(g: Graph, path: str | os.PathLike, edges=None, use_labels: bool = True) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_edge_list(g, edges, use_labels))


# ---------------------------------------------------------------------------
# statistics


@dataclass(frozen=True)
class GraphStats:
    n: int
    m: int
    avg_degree: float
    edge_sparsity: float
    avg_distance: float
    clustering: float
    heterogeneity: float
    avg_distance_exact: bool = True

    def as_row(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "avg_degree": self.avg_degree,
            "edge_sparsity": self.edge_sparsity,
            "avg_distance": self.avg_distance,
            "clustering": self.clustering,
            "heterogeneity": self.heterogeneity,
            "avg_distance_exact": int(self.avg_distance_exact),
        }


def triangles_per_node(g: Graph) -> np.ndarray:
    a = g.adjacency_matrix()
    return np.asarray((a @ a).multiply(a).sum(axis=1)).ravel() / 2.0


def local_clustering(g: Graph) -> np.ndarray:
    k = g.degrees.astype(np.float64)
    tri = triangles_per_node(g)
    out = np.zeros(g.n)
    ok = k >= 2
    out[ok] = 2.0 * tri[ok] / (k[ok] * (k[ok] - 1.0))
    return out


def average_distance(g: Graph, sources=None, chunk: int = 256) -> float:
    """Mean hop distance over ordered reachable pairs ``(s, t)``, ``s != t``.

    With ``sources`` given, only BFS trees rooted there are used.
    """
    a = g.adjacency_matrix()
    src = np.arange(g.n) if sources is None else np.asarray(sources)
    total = 0.0
    count = 0
    for start in range(0, src.size, chunk):
        block = src[start:start + chunk]
        dist = csgraph.shortest_path(a, method="D", directed=False, unweighted=True, indices=block)
        finite = np.isfinite(dist) & (dist > 0)
        total += float(dist[finite].sum())
        count += int(finite.sum())
    return total / count if count else 0.0


def graph_stats(g: Graph, distance_sample: int | None = DEFAULT_DISTANCE_SAMPLE, seed: int = 0) -> GraphStats:
    """Table-style summary statistics of ``g``.

    Average distance is exact (all-source BFS) when ``n <= distance_sample``,
    otherwise it is estimated from ``distance_sample`` random BFS sources and
    ``avg_distance_exact`` is False. ``distance_sample=None`` forces exact.
    """
    if g.n < 1 or g.m < 1:
        raise ValidationError("graph statistics need at least one edge")
    n, m = g.n, g.m
    k = g.degrees.astype(np.float64)
    mean_k = 2.0 * m / n
    es = 2.0 * m / (n * (n - 1))
    het = float(np.mean(k * k)) / mean_k**2
    exact = distance_sample is None or n <= distance_sample
    if exact:
        d = average_distance(g)
    else:
        rng = np.random.default_rng(seed)
        d = average_distance(g, sources=rng.choice(n, size=distance_sample, replace=False))
    return GraphStats(
        n=n,
        m=m,
        avg_degree=mean_k,
        edge_sparsity=es,
        avg_distance=d,
        clustering=float(local_clustering(g).mean()),
        heterogeneity=het,
        avg_distance_exact=exact,
    )


# ---------------------------------------------------------------------------
# train/test split


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True, eq=False)
class TrainTestSplit:
    """Training graph plus the hidden (test-positive) edges.

    ``train`` shares node ids and labels with ``original``.
    """

    train: Graph
    hidden_edges: np.ndarray
    fraction: float
    seed: int
    requested: int
    original: Graph = field(repr=False)

    @property
    def shortfall(self) -> int:
        return self.requested - len(self.hidden_edges)

    def metadata(self) -> dict:
        return {
            "seed": self.seed,
            "fraction": self.fraction,
            "requested": self.requested,
            "hidden": len(self.hidden_edges),
            "shortfall": self.shortfall,
            "n": self.original.n,
            "m_original": self.original.m,
            "m_train": self.train.m,
        }


def split_train_test(g: Graph, fraction: float, seed: int) -> TrainTestSplit:
    """Hide ``round(fraction * m)`` edges without leaving any node isolated.

    Edges are visited in a seeded uniform shuffle; an edge is skipped when
    removing it would drop either endpoint to degree 0 in the training graph.
    If the shuffle runs out first, the split succeeds with a ``shortfall``.
    """
    if not 0.0 < fraction < 1.0:
        raise ValidationError("fraction must lie strictly between 0 and 1")
    if np.any(g.degrees == 0):
        raise ValidationError("graph has isolated nodes")
    requested = round_half_up(fraction * g.m)
    rng = np.random.default_rng(seed)
    order = rng.permutation(g.m)
    deg = g.degrees.copy()
    hide = np.zeros(g.m, dtype=bool)
    edges = g.edges
    taken = 0
    for e in order:
        if taken == requested:
            break
        u, v = edges[e]
        if deg[u] > 1 and deg[v] > 1:
            deg[u] -= 1
            deg[v] -= 1
            hide[e] = True
            taken += 1
    # sorted (u < v, lexicographic) so a file roundtrip preserves the order
    hidden = edges[hide].copy()
    train = Graph.from_edges(g.n, edges[~hide], labels=g.labels)
    return TrainTestSplit(train, hidden, float(fraction), int(seed), requested, g)


def sample_nonexistent_edges(g: Graph, size: int, rng: np.random.Generator, batch: int | None = None):
    """Draw ``size`` ordered pairs ``u != v`` uniformly among non-edges of ``g``.

    Rejection sampling over ordered pairs; returns two int64 arrays.
    """
    if g.is_complete():
        raise ValidationError("graph is complete: no nonexistent edge to sample")
    n = g.n
    us = np.empty(size, dtype=np.int64)
    vs = np.empty(size, dtype=np.int64)
    filled = 0
    density = (2.0 * g.m + n) / (n * n)
    while filled < size:
        want = size - filled
        draw = batch or max(16, int(want / max(1e-3, 1.0 - density) * 1.1) + 16)
        a = rng.integers(0, n, size=draw)
        b = rng.integers(0, n, size=draw)
        ok = (a != b) & ~g.has_edges(a, b)
        a, b = a[ok][:want], b[ok][:want]
        us[filled:filled + a.size] = a
        vs[filled:filled + b.size] = b
        filled += a.size
    return us, vs


def sample_nonexistent_edge(g: Graph, rng: np.random.Generator) -> tuple[int, int]:
    """Single uniform non-edge ``(u, v)``; pass the original (train + hidden) graph."""
    if g.is_complete():
        raise ValidationError("graph is complete: no nonexistent edge to sample")
    while True:
        u, v = rng.integers(0, g.n, size=2)
        if u != v and not g.has_edge(int(u), int(v)):
            return int(u), int(v)


def write_split(split: TrainTestSplit, prefix: str | os.PathLike) -> dict[str, str]:
    """Write ``prefix.train.edges``, ``prefix.test.edges``, ``prefix.nodes`` and ``prefix.split.meta``."""
    prefix = os.fspath(prefix)
    paths = {
        "train": prefix + ".train.edges",
        "test": prefix + ".test.edges",
        "nodes": prefix + ".nodes",
        "meta": prefix + ".split.meta",
    }
    g = split.original
    write_edge_list(split.train, paths["train"])
    write_edge_list(g, paths["test"], edges=split.hidden_edges)
    with open(paths["nodes"], "w", encoding="utf-8") as fh:
        fh.write("".join(f"{lab}\n" for lab in g.labels.tolist()))
    with open(paths["meta"], "w", encoding="utf-8") as fh:
        fh.write("".join(f"{k}={v}\n" for k, v in split.metadata().items()))
    return paths


def read_split(prefix: str | os.PathLike) -> TrainTestSplit:
    """Inverse of :func:`write_split`; node ids match the original graph's."""
    prefix = os.fspath(prefix)
    with open(prefix + ".split.meta", encoding="utf-8") as fh:
        meta = dict(line.rstrip("\n").split("=", 1) for line in fh if "=" in line)
    with open(prefix + ".nodes", encoding="utf-8") as fh:
        order = [int(x) for x in fh.read().split()]
    train = read_edge_list(prefix + ".train.edges", node_order=order)
    if train.n != len(order):
        raise ValidationError("train file does not cover the node list")
    test = read_edge_list(prefix + ".test.edges", node_order=order)
    hidden = test.edges.copy()
    original = Graph.from_edges(train.n, np.vstack([train.edges, hidden]), labels=train.labels)
    return TrainTestSplit(
        train=train,
        hidden_edges=hidden,
        fraction=float(meta["fraction"]),
        seed=int(meta["seed"]),
        requested=int(meta["requested"]),
        original=original,
    )
