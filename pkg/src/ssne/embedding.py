"""Node embeddings from the SNHAM matrix.

The pipeline is ``W = log(SNHAM + sigma)`` followed by a rank-``d`` SVD
``W ~ U_d diag(s_d) V_d^T``; the feature matrix is ``R = U_d diag(s_d)``.
Because ``softmax(W_i)`` recovers the sigma-shifted SNHAM row, ``U_d`` and
``V_d^T`` are the two weight matrices of a linear-softmax autoencoder that
reproduces SNHAM exactly at full rank.
"""

from __future__ import annotations

import logging
import os
import struct
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .errors import NumericalError, ValidationError
from .graph_core import Graph, round_half_up
from .snham import DEFAULT_ALPHA, DEFAULT_ORDER, SnhamMatrix, snham_matrix

log = logging.getLogger(__name__)

DEFAULT_SIGMA = 1e-8
DEFAULT_PROPORTION = 0.1
DENSE_SVD_LIMIT = 6000
ITER_TOL = 1e-10
ITER_MAXITER = 300

EMBED_MAGIC = b"SSNEEMB1"
_EMBED_HEADER = struct.Struct("<8sQQQddq")


@dataclass(frozen=True, eq=False)
class TargetMatrix:
    matrix: np.ndarray
    sigma: float


def shifted_log(s, sigma: float = DEFAULT_SIGMA) -> TargetMatrix:
    """Elementwise natural log of ``s + sigma``.

    ``s`` may be a :class:`SnhamMatrix` or a plain nonnegative array.
    """
    if not sigma > 0:
        raise ValidationError("sigma must be positive")
    m = s.matrix if isinstance(s, SnhamMatrix) else np.asarray(s, dtype=np.float64)
    w = np.add(m, sigma)
    np.log(w, out=w)
    if not np.all(np.isfinite(w)):
        raise NumericalError("shifted log produced non-finite entries")
    return TargetMatrix(w, float(sigma))


@dataclass(frozen=True, eq=False)
class SvdFactors:
    """Leading singular triplets, singular values descending."""

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray

    @property
    def rank(self) -> int:
        return self.s.size

    def truncate(self, d: int) -> "SvdFactors":
        if not 1 <= d <= self.rank:
            raise ValidationError(f"cannot truncate rank-{self.rank} factors to d={d}")
        return SvdFactors(self.u[:, :d], self.s[:d], self.v[:, :d])

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.s) @ self.v.T


def _fix_signs(u: np.ndarray, v: np.ndarray) -> None:
    # deterministic convention: largest-magnitude entry of each u column is positive
    pivot = np.argmax(np.abs(u), axis=0)
    flip = u[pivot, np.arange(u.shape[1])] < 0
    u[:, flip] *= -1.0
    v[:, flip] *= -1.0


def full_svd(w, overwrite: bool = False) -> SvdFactors:
    """Thin SVD of a dense matrix via LAPACK (divide and conquer, then QR fallback)."""
    a = w.matrix if isinstance(w, TargetMatrix) else np.asarray(w, dtype=np.float64)
    try:
        u, s, vt = sla.svd(a, full_matrices=False, lapack_driver="gesdd",
                           overwrite_a=False, check_finite=False)
    except np.linalg.LinAlgError:
        log.warning("gesdd failed, retrying with gesvd")
        try:
            u, s, vt = sla.svd(a, full_matrices=False, lapack_driver="gesvd",
                               overwrite_a=overwrite, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"dense SVD did not converge: {exc}") from exc
    v = np.ascontiguousarray(vt.T)
    _fix_signs(u, v)
    return SvdFactors(u, s, v)


def _iterative_svd(a: np.ndarray, d: int, seed: int, tol: float, maxiter: int) -> SvdFactors:
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(min(a.shape))
    try:
        u, s, vt = spla.svds(a, k=d, tol=tol, maxiter=maxiter, v0=v0, solver="arpack")
    except spla.ArpackNoConvergence as exc:
        vals, vecs = exc.eigenvalues, exc.eigenvectors
        residual = float("nan")
        if vals is not None and len(vals):
            ata = a.T @ (a @ vecs)
            residual = float(np.max(np.linalg.norm(ata - vecs * vals, axis=0)))
        raise NumericalError(f"iterative SVD did not converge in {maxiter} iterations",
                             residual=residual) from exc
    order = np.argsort(s)[::-1]
    u = np.ascontiguousarray(u[:, order])
    v = np.ascontiguousarray(vt[order].T)
    s = s[order]
    _fix_signs(u, v)
    return SvdFactors(u, s, v)


def truncated_svd(w, d: int, method: str = "auto", seed: int = 0,
                  tol: float = ITER_TOL, maxiter: int = ITER_MAXITER) -> SvdFactors:
    """Top-``d`` singular triplets of ``w``.

    ``method`` is ``"dense"`` (exact LAPACK SVD then truncation),
    ``"iterative"`` (ARPACK Lanczos, seeded start vector) or ``"auto"``,
    which picks dense up to :data:`DENSE_SVD_LIMIT` rows.
    """
    a = w.matrix if isinstance(w, TargetMatrix) else np.asarray(w, dtype=np.float64)
    n = min(a.shape)
    if int(d) != d or not 1 <= d <= n:
        raise ValidationError(f"rank d={d} must lie in 1..{n}")
    if method == "auto":
        method = "dense" if a.shape[0] <= DENSE_SVD_LIMIT else "iterative"
    if method == "iterative" and d >= n - 1:
        method = "dense"
    if method == "dense":
        return full_svd(a).truncate(int(d))
    if method == "iterative":
        return _iterative_svd(a, int(d), seed, tol, maxiter)
    raise ValidationError(f"unknown SVD method {method!r}")


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    r: np.ndarray
    provenance: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.r.shape[0]

    @property
    def d(self) -> int:
        return self.r.shape[1]


def feature_matrix(f: SvdFactors, provenance: dict | None = None) -> FeatureMatrix:
    r = f.u * f.s
    if not np.all(np.isfinite(r)):
        raise NumericalError("feature matrix has non-finite entries")
    return FeatureMatrix(r, dict(provenance or {}))


def dimension_from_proportion(n: int, p: float) -> int:
    """``d = round(p * n)`` (half up), clamped to ``1..n``."""
    if not p > 0:
        raise ValidationError("proportion must be positive")
    return min(n, max(1, round_half_up(p * n)))


def resolve_dimension(n: int, proportion: float | None, dim: int | None) -> int:
    if dim is not None:
        if proportion is not None:
            raise ValidationError("give either a proportion or a dimension, not both")
        if not 1 <= dim <= n:
            raise ValidationError(f"dimension {dim} outside 1..{n}")
        return int(dim)
    return dimension_from_proportion(n, DEFAULT_PROPORTION if proportion is None else proportion)


def embed(g: Graph, order: int = DEFAULT_ORDER, proportion: float | None = None,
          dim: int | None = None, sigma: float = DEFAULT_SIGMA, alpha: float = DEFAULT_ALPHA,
          seed: int = 0, method: str = "auto") -> FeatureMatrix:
    """SNHAM -> shifted log -> truncated SVD -> ``R = U_d diag(s_d)``.

    ``proportion`` defaults to 0.1 when neither it nor ``dim`` is given.
    """
    d = resolve_dimension(g.n, proportion, dim)
    s = snham_matrix(g, order, alpha)
    w = shifted_log(s, sigma)
    del s
    factors = truncated_svd(w, d, method=method, seed=seed)
    return feature_matrix(factors, {
        "order": order, "dim": d, "proportion": proportion, "sigma": sigma,
        "alpha": alpha, "seed": seed, "method": method,
    })


def save_embedding(f: FeatureMatrix, path: str | os.PathLike) -> None:
    """Binary dump: magic, n, d, h, sigma, alpha, seed, then row-major float64."""
    p = f.provenance
    header = _EMBED_HEADER.pack(EMBED_MAGIC, f.n, f.d, int(p.get("order", 0)),
                                float(p.get("sigma", 0.0)), float(p.get("alpha", 0.0)),
                                int(p.get("seed", 0)))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(f.r, dtype="<f8").tobytes())


def load_embedding(path: str | os.PathLike) -> FeatureMatrix:
    with open(path, "rb") as fh:
        head = fh.read(_EMBED_HEADER.size)
        if len(head) != _EMBED_HEADER.size:
            raise ValidationError(f"{path}: truncated header")
        magic, n, d, h, sigma, alpha, seed = _EMBED_HEADER.unpack(head)
        if magic != EMBED_MAGIC:
            raise ValidationError(f"{path}: not an embedding dump")
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != n * d:
        raise ValidationError(f"{path}: expected {n * d} values, found {data.size}")
    prov = {"order": h, "dim": d, "sigma": sigma, "alpha": alpha, "seed": seed}
    return FeatureMatrix(data.reshape(n, d).astype(np.float64), prov)
