"""Pairwise similarity scorers for link prediction.

Every scorer exposes ``score(u, v)`` and a vectorized ``score_pairs(us, vs)``.
Local indexes (CN family) read the training graph's neighbor lists; global
indexes (Katz, RWR, LHN-II, SimRank) solve for a dense ``n x n`` score matrix
once and then answer lookups. The SSNE scorer turns Euclidean distance between
embedding rows into ``1 / (1 + D)``.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .embedding import FeatureMatrix, embed
from .errors import NumericalError, ValidationError
from .graph_core import Graph
from .snham import row_normalize

DEFAULT_RWR_C = 0.8
DEFAULT_SIMRANK_LAMBDA = 0.8
DEFAULT_SIMRANK_ITERATIONS = 5
DEFAULT_LHN2_PHI = 0.9
KATZ_BETA_CAP = 0.01

LOCAL_SCORERS = ("cn", "salton", "jaccard", "aa", "ra", "lhn1")
GLOBAL_SCORERS = ("katz", "rwr", "lhn2", "simrank")
SCORER_NAMES = LOCAL_SCORERS + GLOBAL_SCORERS + ("ssne",)


def _check_pair(g_n: int, u: int, v: int) -> None:
    if not (0 <= u < g_n and 0 <= v < g_n):
        raise ValidationError(f"node pair ({u}, {v}) outside 0..{g_n - 1}")


def _check_pairs(n: int, us: np.ndarray, vs: np.ndarray) -> None:
    if us.shape != vs.shape:
        raise ValidationError("endpoint arrays differ in shape")
    if us.size and (min(us.min(), vs.min()) < 0 or max(us.max(), vs.max()) >= n):
        raise ValidationError(f"node id outside 0..{n - 1}")


# ---------------------------------------------------------------------------
# local indexes, one pair at a time


def common_neighbors(g: Graph, u: int, v: int) -> np.ndarray:
    _check_pair(g.n, u, v)
    return np.intersect1d(g.neighbors(u), g.neighbors(v), assume_unique=True)


def cn_score(g: Graph, u: int, v: int) -> float:
    return float(common_neighbors(g, u, v).size)


def salton_score(g: Graph, u: int, v: int) -> float:
    ku, kv = g.degrees[u], g.degrees[v]
    if ku == 0 or kv == 0:
        return 0.0
    return cn_score(g, u, v) / math.sqrt(ku * kv)


def jaccard_score(g: Graph, u: int, v: int) -> float:
    cn = cn_score(g, u, v)
    union = g.degrees[u] + g.degrees[v] - cn
    return cn / union if union > 0 else 0.0


def aa_score(g: Graph, u: int, v: int) -> float:
    z = common_neighbors(g, u, v)
    k = g.degrees[z]
    # a common neighbor touches both endpoints, so k >= 2 whenever u != v
    assert u == v or np.all(k >= 2)
    k = k[k >= 2]
    return float(np.sum(1.0 / np.log(k)))


def ra_score(g: Graph, u: int, v: int) -> float:
    z = common_neighbors(g, u, v)
    return float(np.sum(1.0 / g.degrees[z]))


def lhn1_score(g: Graph, u: int, v: int) -> float:
    ku, kv = g.degrees[u], g.degrees[v]
    if ku == 0 or kv == 0:
        return 0.0
    return cn_score(g, u, v) / float(ku * kv)


_LOCAL_FUNCS = {
    "cn": cn_score,
    "salton": salton_score,
    "jaccard": jaccard_score,
    "aa": aa_score,
    "ra": ra_score,
    "lhn1": lhn1_score,
}


# ---------------------------------------------------------------------------
# global indexes


def spectral_radius(g: Graph) -> float:
    """Largest adjacency eigenvalue (Lanczos; dense for tiny graphs)."""
    if g.m == 0:
        return 0.0
    a = g.adjacency_matrix()
    if g.n <= 64:
        return float(np.linalg.eigvalsh(a.toarray())[-1])
    try:
        vals = spla.eigsh(a, k=1, which="LA", tol=1e-10, v0=np.ones(g.n), return_eigenvectors=False)
    except spla.ArpackNoConvergence as exc:
        raise NumericalError("leading eigenvalue did not converge") from exc
    return float(vals[0])


def default_katz_beta(g: Graph, lam: float | None = None) -> float:
    lam = spectral_radius(g) if lam is None else lam
    return KATZ_BETA_CAP if lam <= 0 else min(KATZ_BETA_CAP, 0.5 / lam)


def _inverse(m: np.ndarray, what: str) -> np.ndarray:
    try:
        inv = sla.solve(m, np.eye(m.shape[0]), check_finite=False)
    except (np.linalg.LinAlgError, sla.LinAlgWarning) as exc:
        raise NumericalError(f"{what}: singular linear system") from exc
    if not np.all(np.isfinite(inv)):
        raise NumericalError(f"{what}: non-finite solution")
    return inv


def katz_score(g: Graph, beta: float | None = None) -> np.ndarray:
    """``(I - beta A)^{-1} - I``, the weighted count of all walks."""
    lam = spectral_radius(g)
    if beta is None:
        beta = default_katz_beta(g, lam)
    if beta <= 0:
        raise ValidationError("Katz beta must be positive")
    if lam > 0 and beta >= 1.0 / lam:
        raise NumericalError(f"Katz series diverges: beta={beta:g} >= 1/lambda_max "
                             f"(lambda_max ~ {lam:.6g})")
    m = np.eye(g.n) - beta * g.adjacency_matrix().toarray()
    s = _inverse(m, "Katz")
    s[np.diag_indices_from(s)] -= 1.0
    return s


def rwr_matrix(g: Graph, c: float = DEFAULT_RWR_C) -> np.ndarray:
    """Column ``u`` is the stationary vector of a walk from ``u`` that continues w.p. ``c``."""
    if not 0.0 < c < 1.0:
        raise ValidationError("RWR parameter c must lie in (0, 1)")
    s1 = row_normalize(g.adjacency_matrix())
    return (1.0 - c) * _inverse(np.eye(g.n) - c * s1.T, "RWR")


def rwr_score(g: Graph, c: float = DEFAULT_RWR_C) -> np.ndarray:
    """``score(u, v) = pi_u(v) + pi_v(u)``."""
    pi = rwr_matrix(g, c)
    return pi + pi.T


def lhn2_score(g: Graph, phi: float = DEFAULT_LHN2_PHI) -> np.ndarray:
    """Global Leicht-Holme-Newman index ``D^-1 (I - (phi/lambda_1) A)^-1 D^-1``.

    The constant prefactor ``2 m lambda_1`` is dropped; it does not change
    any ranking.
    """
    if not 0.0 < phi < 1.0:
        raise ValidationError("LHN-II parameter phi must lie in (0, 1)")
    lam = spectral_radius(g)
    if lam <= 0:
        raise NumericalError("LHN-II needs a graph with at least one edge")
    k = g.degrees.astype(np.float64)
    dinv = np.divide(1.0, k, out=np.zeros_like(k), where=k > 0)
    m = np.eye(g.n) - (phi / lam) * g.adjacency_matrix().toarray()
    s = _inverse(m, "LHN-II")
    s *= dinv[:, None]
    s *= dinv[None, :]
    return s


def simrank_score(g: Graph, lam: float = DEFAULT_SIMRANK_LAMBDA,
                  iterations: int = DEFAULT_SIMRANK_ITERATIONS) -> np.ndarray:
    """SimRank by fixed-point sweeps ``S <- lam * P S P^T`` with unit diagonal, ``P = D^-1 A``."""
    if not 0.0 < lam < 1.0:
        raise ValidationError("SimRank lambda must lie in (0, 1)")
    if iterations < 1:
        raise ValidationError("SimRank needs at least one iteration")
    k = g.degrees.astype(np.float64)
    dinv = np.divide(1.0, k, out=np.zeros_like(k), where=k > 0)
    p = sp.diags(dinv) @ g.adjacency_matrix()
    p = p.tocsr()
    s = np.eye(g.n)
    for _ in range(iterations):
        t = np.asarray(p @ s)          # P S
        s = np.asarray(p @ t.T)        # P (P S)^T = P S P^T, S symmetric
        s *= lam
        s = 0.5 * (s + s.T)            # scrub rounding asymmetry
        np.fill_diagonal(s, 1.0)
    return s


# ---------------------------------------------------------------------------
# scorer objects


class Scorer:
    """Named symmetric similarity; subclasses implement ``score_pairs``."""

    name = "scorer"

    def __init__(self, **params):
        self.params = params

    def score_pairs(self, us, vs) -> np.ndarray:
        raise NotImplementedError

    def score(self, u: int, v: int) -> float:
        return float(self.score_pairs(np.array([u]), np.array([v]))[0])

    def __call__(self, us, vs) -> np.ndarray:
        return self.score_pairs(us, vs)

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{type(self).__name__}({self.name}{', ' if args else ''}{args})"


class LocalScorer(Scorer):
    """CN-family index on a training graph.

    ``score`` evaluates one pair directly from neighbor lists; ``score_pairs``
    reads the same quantities from sparse products built on first use.
    """

    def __init__(self, g: Graph, name: str):
        if name not in _LOCAL_FUNCS:
            raise ValidationError(f"unknown local index {name!r}")
        super().__init__()
        self.g = g
        self.name = name
        self._mat = None

    def score(self, u: int, v: int) -> float:
        return _LOCAL_FUNCS[self.name](self.g, int(u), int(v))

    def _matrix(self) -> sp.csr_matrix:
        if self._mat is None:
            a = self.g.adjacency_matrix()
            k = self.g.degrees.astype(np.float64)
            if self.name == "aa":
                w = np.zeros_like(k)
                w[k >= 2] = 1.0 / np.log(k[k >= 2])
            elif self.name == "ra":
                w = np.divide(1.0, k, out=np.zeros_like(k), where=k > 0)
            else:
                w = np.ones_like(k)
            self._mat = (a @ sp.diags(w) @ a).tocsr()
        return self._mat

    def score_pairs(self, us, vs) -> np.ndarray:
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        _check_pairs(self.g.n, us, vs)
        base = np.asarray(self._matrix()[us, vs], dtype=np.float64).ravel()
        if self.name in ("cn", "aa", "ra"):
            return base
        ku = self.g.degrees[us].astype(np.float64)
        kv = self.g.degrees[vs].astype(np.float64)
        out = np.zeros_like(base)
        if self.name == "salton":
            den = np.sqrt(ku * kv)
        elif self.name == "lhn1":
            den = ku * kv
        else:  # jaccard
            den = ku + kv - base
        np.divide(base, den, out=out, where=den > 0)
        return out


class MatrixScorer(Scorer):
    """Lookup into a precomputed dense score matrix."""

    def __init__(self, matrix: np.ndarray, name: str, **params):
        super().__init__(**params)
        self.matrix = matrix
        self.name = name

    def score_pairs(self, us, vs) -> np.ndarray:
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        _check_pairs(self.matrix.shape[0], us, vs)
        return self.matrix[us, vs]


class SsneScorer(Scorer):
    """``1 / (1 + ||R_u - R_v||)`` over embedding rows."""

    name = "ssne"
    chunk = 8192

    def __init__(self, features: FeatureMatrix, **params):
        super().__init__(**params)
        self.features = features

    def score_pairs(self, us, vs) -> np.ndarray:
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        r = self.features.r
        _check_pairs(r.shape[0], us, vs)
        out = np.empty(us.size, dtype=np.float64)
        for start in range(0, us.size, self.chunk):
            sl = slice(start, start + self.chunk)
            diff = r[us[sl]] - r[vs[sl]]
            out[sl] = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        return 1.0 / (1.0 + out)


def ssne_score(r, u: int, v: int) -> float:
    """``1 / (1 + D)`` with ``D`` the Euclidean distance of rows ``u`` and ``v``."""
    r = r.r if isinstance(r, FeatureMatrix) else np.asarray(r, dtype=np.float64)
    _check_pair(r.shape[0], u, v)
    return 1.0 / (1.0 + float(np.linalg.norm(r[u] - r[v])))


_PARAM_NAMES = {
    "katz": {"beta"},
    "rwr": {"c"},
    "lhn2": {"phi"},
    "simrank": {"lam", "iterations"},
    "ssne": {"order", "proportion", "dim", "sigma", "alpha", "seed", "method", "features"},
}


def check_scorer_spec(name: str, params: dict | None = None) -> None:
    """Raise :class:`ValidationError` for unknown names or parameters."""
    if name not in SCORER_NAMES:
        raise ValidationError(f"unknown scorer {name!r}; choose from {', '.join(SCORER_NAMES)}")
    extra = set(params or {}) - _PARAM_NAMES.get(name, set())
    if extra:
        raise ValidationError(f"scorer {name!r} takes no parameter(s) {sorted(extra)}")


def make_scorer(name: str, g: Graph, **params) -> Scorer:
    """Build a scorer by name over training graph ``g``.

    Parameters: ``katz(beta)``, ``rwr(c)``, ``lhn2(phi)``,
    ``simrank(lam, iterations)``, ``ssne(order, proportion | dim, sigma,
    alpha, seed, method)`` or ``ssne(features=FeatureMatrix)``.
    """
    check_scorer_spec(name, params)
    if name in LOCAL_SCORERS:
        return LocalScorer(g, name)
    if name == "katz":
        beta = params.get("beta")
        beta = default_katz_beta(g) if beta is None else beta
        return MatrixScorer(katz_score(g, beta), name, beta=beta)
    if name == "rwr":
        c = params.get("c", DEFAULT_RWR_C)
        return MatrixScorer(rwr_score(g, c), name, c=c)
    if name == "lhn2":
        phi = params.get("phi", DEFAULT_LHN2_PHI)
        return MatrixScorer(lhn2_score(g, phi), name, phi=phi)
    if name == "simrank":
        lam = params.get("lam", DEFAULT_SIMRANK_LAMBDA)
        it = params.get("iterations", DEFAULT_SIMRANK_ITERATIONS)
        return MatrixScorer(simrank_score(g, lam, it), name, lam=lam, iterations=it)
    features = params.pop("features", None)
    if features is None:
        features = embed(g, **params)
    if features.n != g.n:
        raise ValidationError("embedding rows do not match graph size")
    return SsneScorer(features, **features.provenance)
