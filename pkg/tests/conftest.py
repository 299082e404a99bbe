import numpy as np
import pytest

from ssne.graph_core import Graph

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_report():
    """Collect one PASS/FAIL line per acceptance criterion for the terminal summary."""

    def report(criterion: str, ok: bool | None, detail: str) -> None:
        status = "SKIP" if ok is None else "PASS" if ok else "FAIL"
        line = f"[{status}] {criterion}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def star_graph(leaves: int) -> Graph:
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def random_graph(n: int, p: float, rng: np.random.Generator, min_degree: int = 0) -> Graph:
    """Erdos-Renyi draw; with ``min_degree=1`` every isolated node gets one random edge."""
    iu, iv = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    edges = list(zip(iu[keep].tolist(), iv[keep].tolist()))
    if min_degree:
        deg = np.zeros(n, dtype=int)
        for u, v in edges:
            deg[u] += 1
            deg[v] += 1
        for u in range(n):
            if deg[u] == 0:
                v = int(rng.choice([x for x in range(n) if x != u]))
                edges.append((u, v))
                deg[u] += 1
                deg[v] += 1
    if not edges:
        edges = [(0, 1)]
    return Graph.from_edges(n, edges)
