import itertools
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ssne.embedding import FeatureMatrix, embed
from ssne.errors import NumericalError, ValidationError
from ssne.graph_core import Graph
from ssne.scoring import (LOCAL_SCORERS, SCORER_NAMES, aa_score, cn_score, jaccard_score, katz_score,
                          lhn1_score, lhn2_score, make_scorer, ra_score, rwr_matrix, rwr_score,
                          salton_score, simrank_score, spectral_radius, ssne_score)

from conftest import cycle_graph, path_graph, random_graph, star_graph

LOCAL_FUNCS = {"cn": cn_score, "salton": salton_score, "jaccard": jaccard_score,
               "aa": aa_score, "ra": ra_score, "lhn1": lhn1_score}


def single_edge():
    return Graph.from_edges(2, [(0, 1)])


# -- SSNE ------------------------------------------------------------------


def test_ssne_identical_rows():
    assert ssne_score(np.array([[1.0, 2.0], [1.0, 2.0]]), 0, 1) == 1.0


def test_ssne_three_four_five():
    assert ssne_score(np.array([[0.0, 0.0], [3.0, 4.0]]), 0, 1) == pytest.approx(1 / 6)


def test_ssne_out_of_range():
    with pytest.raises(ValidationError):
        ssne_score(np.zeros((2, 2)), 0, 2)


@pytest.mark.parametrize("h", [1, 2, 3, 4, 5])
def test_ssne_path_endpoints_never_farther_than_neighbors(h):
    s = make_scorer("ssne", path_graph(3), order=h, dim=2)
    if h % 2:
        assert s.score(0, 2) > s.score(0, 1)
    else:
        # even orders give identical SNHAM rows on P3, so every pair ties
        assert s.score(0, 2) == pytest.approx(s.score(0, 1), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_ssne_score_range_and_monotone(seed):
    rng = np.random.default_rng(seed)
    r = rng.standard_normal((6, 3))
    dists = np.linalg.norm(r[0] - r[1:], axis=1)
    scores = np.array([ssne_score(r, 0, v) for v in range(1, 6)])
    assert np.all((scores > 0) & (scores <= 1))
    order = np.argsort(dists)
    assert np.all(np.diff(scores[order]) <= 0)


def test_ssne_batch_matches_single():
    g = random_graph(40, 0.1, np.random.default_rng(0), 1)
    f = embed(g, order=4, dim=5)
    scorer = make_scorer("ssne", g, features=f)
    us, vs = np.triu_indices(g.n, 1)
    batch = scorer.score_pairs(us, vs)
    single = [ssne_score(f, u, v) for u, v in zip(us, vs)]
    assert np.allclose(batch, single, rtol=0, atol=1e-14)


# -- local indexes ---------------------------------------------------------


def test_cycle_opposite_corners():
    g = cycle_graph(4)
    assert cn_score(g, 0, 2) == 2
    assert jaccard_score(g, 0, 2) == 1
    assert ra_score(g, 0, 2) == pytest.approx(1.0)


def test_path_endpoints():
    g = path_graph(3)
    assert cn_score(g, 0, 2) == 1
    assert aa_score(g, 0, 2) == pytest.approx(1 / math.log(2))
    assert lhn1_score(g, 0, 2) == 1


def test_disjoint_pair_scores_zero():
    g = Graph.from_edges(4, [(0, 1), (2, 3)])
    for name, fn in LOCAL_FUNCS.items():
        assert fn(g, 0, 2) == 0, name


def test_local_out_of_range():
    with pytest.raises(ValidationError):
        cn_score(path_graph(3), 0, 5)


def brute_local(g, name, u, v):
    nb = [set(g.neighbors(x).tolist()) for x in range(g.n)]
    common = nb[u] & nb[v]
    ku, kv = len(nb[u]), len(nb[v])
    if name == "cn":
        return len(common)
    if name == "salton":
        return len(common) / math.sqrt(ku * kv) if ku * kv else 0.0
    if name == "jaccard":
        union = nb[u] | nb[v]
        return len(common) / len(union) if union else 0.0
    if name == "aa":
        return sum(1 / math.log(len(nb[z])) for z in common)
    if name == "ra":
        return sum(1 / len(nb[z]) for z in common)
    return len(common) / (ku * kv) if ku * kv else 0.0


@pytest.mark.parametrize("name", LOCAL_SCORERS)
def test_local_matches_set_oracle_all_pairs(name):
    rng = np.random.default_rng(LOCAL_SCORERS.index(name))
    for _ in range(4):
        g = random_graph(int(rng.integers(5, 51)), float(rng.uniform(0.05, 0.4)), rng)
        scorer = make_scorer(name, g)
        us, vs = np.triu_indices(g.n, 1)
        batch = scorer.score_pairs(us, vs)
        for u, v, b in zip(us.tolist(), vs.tolist(), batch):
            want = brute_local(g, name, u, v)
            assert LOCAL_FUNCS[name](g, u, v) == pytest.approx(want, abs=1e-12)
            assert b == pytest.approx(want, abs=1e-12)


def test_local_match_networkx():
    g = random_graph(45, 0.12, np.random.default_rng(21), 1)
    h = nx.Graph(g.edges.tolist())
    pairs = list(itertools.combinations(range(g.n), 2))
    for u, v, j in nx.jaccard_coefficient(h, pairs):
        assert jaccard_score(g, u, v) == pytest.approx(j, abs=1e-12)
    for u, v, r in nx.resource_allocation_index(h, pairs):
        assert ra_score(g, u, v) == pytest.approx(r, abs=1e-12)
    for u, v, a in nx.adamic_adar_index(h, pairs):
        assert aa_score(g, u, v) == pytest.approx(a, abs=1e-12)


# -- global indexes --------------------------------------------------------


def test_katz_single_edge():
    assert katz_score(single_edge(), 0.5)[0, 1] == pytest.approx(2 / 3, abs=1e-12)


def test_katz_small_beta_limit():
    g = random_graph(20, 0.2, np.random.default_rng(1), 1)
    beta = 1e-7
    assert np.allclose(katz_score(g, beta) / beta, g.adjacency_matrix().toarray(), atol=1e-5)


def test_katz_divergence_reports_radius():
    with pytest.raises(NumericalError, match="lambda_max"):
        katz_score(cycle_graph(6), 0.5)  # lambda_max = 2


def test_spectral_radius_known_graphs():
    assert spectral_radius(cycle_graph(100)) == pytest.approx(2.0, abs=1e-9)
    assert spectral_radius(star_graph(9)) == pytest.approx(3.0, abs=1e-9)  # sqrt(9)


@pytest.mark.parametrize("seed", range(5))
def test_global_match_explicit_inverse(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(int(rng.integers(4, 31)), 0.25, rng, 1)
    a = g.adjacency_matrix().toarray()
    n = g.n
    lam = np.linalg.eigvalsh(a)[-1]
    beta = 0.5 / lam
    katz = np.linalg.inv(np.eye(n) - beta * a) - np.eye(n)
    assert np.allclose(katz_score(g, beta), katz, rtol=0, atol=1e-8)
    k = a.sum(1)
    s1 = a / k[:, None]
    pi = 0.2 * np.linalg.inv(np.eye(n) - 0.8 * s1.T)
    assert np.allclose(rwr_score(g, 0.8), pi + pi.T, rtol=0, atol=1e-8)
    lhn = np.diag(1 / k) @ np.linalg.inv(np.eye(n) - 0.9 / lam * a) @ np.diag(1 / k)
    assert np.allclose(lhn2_score(g, 0.9), lhn, rtol=0, atol=1e-8)


def test_rwr_single_edge():
    pi = rwr_matrix(single_edge(), 0.8)
    assert pi[1, 0] == pytest.approx(4 / 9, abs=1e-12)
    assert rwr_score(single_edge(), 0.8)[0, 1] == pytest.approx(8 / 9, abs=1e-12)


def test_rwr_no_walk_limit():
    s = rwr_score(random_graph(15, 0.3, np.random.default_rng(2), 1), 1e-9)
    off = s[~np.eye(15, dtype=bool)]
    assert np.max(np.abs(off)) < 1e-8


def test_rwr_stationary_vectors_sum_to_one():
    pi = rwr_matrix(random_graph(30, 0.15, np.random.default_rng(3), 1), 0.8)
    assert np.allclose(pi.sum(axis=0), 1.0, rtol=0, atol=1e-9)


def test_rwr_rejects_bad_c():
    with pytest.raises(ValidationError):
        rwr_score(single_edge(), 1.0)


def test_lhn2_single_edge():
    assert lhn2_score(single_edge(), 0.5)[0, 1] == pytest.approx(2 / 3, abs=1e-12)


def test_lhn2_small_phi_limit():
    g = random_graph(20, 0.2, np.random.default_rng(4), 1)
    phi = 1e-7
    lam = spectral_radius(g)
    s = lhn2_score(g, phi)
    k = g.degrees.astype(float)
    assert np.allclose(np.diag(s), 1.0 / k ** 2, rtol=1e-6)
    off = ~np.eye(g.n, dtype=bool)
    first_order = g.adjacency_matrix().toarray() / np.outer(k, k)
    assert np.allclose((s / (phi / lam))[off], first_order[off], rtol=0, atol=1e-5)


def test_simrank_diagonal_and_single_edge():
    s = simrank_score(single_edge(), 0.8, 3)
    assert np.array_equal(np.diag(s), [1.0, 1.0])
    assert s[0, 1] == 0.0


def test_simrank_path_endpoints():
    assert simrank_score(path_graph(3), 0.8, 10)[0, 2] == pytest.approx(0.8, abs=1e-6)


def brute_simrank(g, lam, iterations):
    nb = [g.neighbors(x).tolist() for x in range(g.n)]
    s = np.eye(g.n)
    for _ in range(iterations):
        new = np.eye(g.n)
        for u in range(g.n):
            for v in range(g.n):
                if u != v and nb[u] and nb[v]:
                    total = sum(s[a, b] for a in nb[u] for b in nb[v])
                    new[u, v] = lam * total / (len(nb[u]) * len(nb[v]))
        s = new
    return s


@pytest.mark.parametrize("seed", range(3))
def test_simrank_matches_double_sum(seed):
    g = random_graph(12, 0.3, np.random.default_rng(seed))
    assert np.allclose(simrank_score(g, 0.8, 4), brute_simrank(g, 0.8, 4), rtol=0, atol=1e-12)


# -- scorer contract -------------------------------------------------------


@pytest.mark.parametrize("name", SCORER_NAMES)
def test_scorers_symmetric_and_finite(name):
    g = random_graph(35, 0.12, np.random.default_rng(5), 1)
    kw = {"order": 3, "dim": 4} if name == "ssne" else {}
    scorer = make_scorer(name, g, **kw)
    us, vs = np.triu_indices(g.n, 1)
    a, b = scorer.score_pairs(us, vs), scorer.score_pairs(vs, us)
    assert np.allclose(a, b, rtol=0, atol=1e-12)
    assert np.all(np.isfinite(a))


def test_make_scorer_rejects_unknown():
    g = path_graph(3)
    with pytest.raises(ValidationError):
        make_scorer("pagerank", g)
    with pytest.raises(ValidationError):
        make_scorer("cn", g, beta=0.1)
    with pytest.raises(ValidationError):
        make_scorer("ssne", g, features=FeatureMatrix(np.zeros((5, 2)), {}))
