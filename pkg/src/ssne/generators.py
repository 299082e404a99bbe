"""Barabasi-Albert and Watts-Strogatz synthetic networks.

Both generators are driven by ``numpy.random.default_rng(seed)`` and emit
the same edge list for the same parameters and seed.
"""

from __future__ import annotations

import logging

import numpy as np

from .errors import ValidationError
from .graph_core import Graph, is_connected

log = logging.getLogger(__name__)

DEFAULT_P_REWIRE = 0.1


def generate_ba(n: int, m_attach: int, seed: int = 0) -> Graph:
    """Preferential attachment grown from a clique on ``m_attach + 1`` nodes.

    Each new node links to ``m_attach`` distinct existing nodes chosen with
    probability proportional to their current degree; repeated targets are
    redrawn. The result has ``m_attach*(m_attach+1)/2 + (n-m_attach-1)*m_attach``
    edges.
    """
    if m_attach < 1 or n <= m_attach:
        raise ValidationError("BA needs n > m_attach >= 1")
    rng = np.random.default_rng(seed)
    core = m_attach + 1
    edges = [(u, v) for u in range(core) for v in range(u + 1, core)]
    # every edge endpoint appears once per incident edge: sampling uniformly
    # from this pool is sampling proportional to degree
    pool = np.empty(2 * (len(edges) + (n - core) * m_attach), dtype=np.int64)
    size = 0
    for u, v in edges:
        pool[size], pool[size + 1] = u, v
        size += 2
    for new in range(core, n):
        targets: list[int] = []
        while len(targets) < m_attach:
            t = int(pool[rng.integers(0, size)])
            if t not in targets:
                targets.append(t)
        for t in targets:
            edges.append((t, new))
            pool[size], pool[size + 1] = t, new
            size += 2
    return Graph.from_edges(n, edges)


def ring_lattice_edges(n: int, k_ring: int) -> list[tuple[int, int]]:
    return [(u, (u + j) % n) for j in range(1, k_ring // 2 + 1) for u in range(n)]


def generate_ws(n: int, k_ring: int, p_rewire: float = DEFAULT_P_REWIRE, seed: int = 0) -> Graph:
    """Watts-Strogatz small world: ring lattice with random rewiring.

    Each node is joined to ``k_ring / 2`` successors on the ring. Lattice
    edges ``(u, u + j)`` are visited by offset ``j`` then node ``u``; with
    probability ``p_rewire`` the far end is moved to a node chosen uniformly
    among those that are neither ``u`` nor already adjacent to ``u``. The
    edge count stays ``n * k_ring / 2``.
    """
    if k_ring < 2 or k_ring % 2:
        raise ValidationError("k_ring must be a positive even integer")
    if n <= k_ring:
        raise ValidationError("WS needs n > k_ring")
    if not 0.0 <= p_rewire <= 1.0:
        raise ValidationError("p_rewire must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    adj: list[set[int]] = [set() for _ in range(n)]
    lattice = ring_lattice_edges(n, k_ring)
    for u, v in lattice:
        adj[u].add(v)
        adj[v].add(u)
    for u, v in lattice:
        if rng.random() >= p_rewire:
            continue
        if len(adj[u]) >= n - 1:
            continue
        while True:
            w = int(rng.integers(0, n))
            if w != u and w not in adj[u]:
                break
        adj[u].discard(v)
        adj[v].discard(u)
        adj[u].add(w)
        adj[w].add(u)
    edges = [(u, v) for u in range(n) for v in adj[u] if u < v]
    g = Graph.from_edges(n, edges)
    if not is_connected(g):
        log.info("WS(n=%d, k=%d, p=%g, seed=%d) is disconnected", n, k_ring, p_rewire, seed)
    return g
