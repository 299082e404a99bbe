import math

import numpy as np
import pytest

from ssne.errors import ValidationError
from ssne.generators import generate_ba, generate_ws
from ssne.graph_core import format_edge_list, graph_stats, is_connected


def ba_edge_count(n, m):
    return m * (m + 1) // 2 + (n - m - 1) * m


def test_ba_tiny_is_a_connected_path():
    g = generate_ba(3, 1, seed=0)
    assert g.m == 2 and is_connected(g)


@pytest.mark.parametrize("n, m", [(50, 1), (200, 2), (300, 3), (5000, 1)])
def test_ba_edge_count_and_mean_degree(n, m):
    g = generate_ba(n, m, seed=1)
    g.check_invariants()
    assert g.m == ba_edge_count(n, m)
    assert abs(2 * g.m / n - 2 * m) <= 2 / n * m * (m + 1)
    assert is_connected(g)


def test_ba_n5000_m1_mean_degree_two():
    g = generate_ba(5000, 1, seed=0)
    assert 2 * g.m / g.n == pytest.approx(2.0, abs=1e-3)


def test_ba_invalid_sizes():
    for n, m in [(3, 3), (5, 0), (2, 5)]:
        with pytest.raises(ValidationError):
            generate_ba(n, m)


def test_ba_deterministic():
    assert format_edge_list(generate_ba(400, 2, seed=9)) == format_edge_list(generate_ba(400, 2, seed=9))
    assert format_edge_list(generate_ba(400, 2, seed=9)) != format_edge_list(generate_ba(400, 2, seed=10))


def powerlaw_mle(degrees, kmin):
    """Discrete power-law exponent, continuous approximation with the usual half-unit shift."""
    k = degrees[degrees >= kmin].astype(float)
    return 1.0 + k.size / np.sum(np.log(k / (kmin - 0.5)))


def test_ba_tail_exponent_near_three():
    exps = [powerlaw_mle(generate_ba(2000, 2, seed=s).degrees, kmin=6) for s in range(20)]
    assert 2.5 <= float(np.mean(exps)) <= 3.5


def ring_lattice_avg_distance(n, k):
    half = k // 2
    return sum(math.ceil(min(j, n - j) / half) for j in range(1, n)) / (n - 1)


@pytest.mark.parametrize("n, k", [(30, 4), (101, 6), (60, 2)])
def test_ws_without_rewiring_is_the_ring_lattice(n, k):
    g = generate_ws(n, k, 0.0, seed=0)
    s = graph_stats(g)
    assert 2 * g.m / n == k
    assert s.clustering == pytest.approx(3 * (k - 2) / (4 * (k - 1)))
    assert s.avg_distance == pytest.approx(ring_lattice_avg_distance(n, k))


def test_ws_ring_k4_clustering_half():
    assert graph_stats(generate_ws(500, 4, 0.0)).clustering == pytest.approx(0.5)


def test_ws_full_rewiring_destroys_clustering():
    g = generate_ws(1000, 4, 1.0, seed=2)
    assert graph_stats(g).clustering < 0.05


@pytest.mark.parametrize("k, p", [(2, 0.1), (4, 0.3), (6, 0.25), (10, 0.9)])
def test_ws_mean_degree_exact(k, p):
    g = generate_ws(800, k, p, seed=4)
    g.check_invariants()
    assert g.m == 800 * k // 2
    assert g.degrees.min() >= k // 2


def test_ws_n5000_k2_edge_count():
    assert generate_ws(5000, 2, seed=1).m == 5000


def test_ws_invalid():
    with pytest.raises(ValidationError):
        generate_ws(100, 3)
    with pytest.raises(ValidationError):
        generate_ws(4, 4)
    with pytest.raises(ValidationError):
        generate_ws(100, 4, 1.5)


def test_ws_deterministic():
    assert format_edge_list(generate_ws(300, 4, 0.3, 5)) == format_edge_list(generate_ws(300, 4, 0.3, 5))
