"""Sum of normalized h-order adjacency matrices (SNHAM).

``S_i = Normal(A^i)`` is the row-normalized i-th adjacency power,
``SPCO_h = sum_{i=1..h} ((1 - alpha) S_i + alpha S_1)`` and the SNHAM matrix
is ``Normal(SPCO_h)``.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from typing import Iterator

import numpy as np
import scipy.sparse as sp

from .errors import ResourceError, ValidationError
from .graph_core import Graph

DEFAULT_ORDER = 10
DEFAULT_ALPHA = 0.0
# cap on one dense n x n float64 matrix; several live at once during the build
DEFAULT_MEMORY_CAP = 1 << 30

SNHAM_MAGIC = b"SNHAMv1\0"
_SNHAM_HEADER = struct.Struct("<8sQQd")


def row_normalize(m, out=None) -> np.ndarray:
    """Divide each nonzero row of a nonnegative matrix by its sum.

    Zero rows stay zero. Accepts dense arrays or scipy sparse matrices and
    always returns a dense ``float64`` array.
    """
    if sp.issparse(m):
        m = m.toarray()
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValidationError("row_normalize expects a 2-D matrix")
    if np.any(m < 0):
        raise ValidationError("row_normalize requires nonnegative entries")
    sums = m.sum(axis=1)
    scale = np.zeros_like(sums)
    nz = sums > 0
    scale[nz] = 1.0 / sums[nz]
    if out is None:
        return m * scale[:, None]
    np.multiply(m, scale[:, None], out=out)
    return out


def check_memory(n: int, cap: int | None = DEFAULT_MEMORY_CAP) -> None:
    need = 8 * n * n
    if cap is not None and need > cap:
        raise ResourceError(f"dense {n}x{n} matrix needs {need / 2**20:.0f} MiB, cap is {cap / 2**20:.0f} MiB")


def transition_powers(g: Graph, h: int) -> Iterator[np.ndarray]:
    """Yield ``S_1, ..., S_h`` as dense arrays (one buffer per step).

    ``A^i`` is carried with every row rescaled to sum 1 before the next
    sparse product. Row scaling commutes with right-multiplication by ``A``
    and is removed again by ``Normal``, so the yielded ``S_i`` equal
    ``Normal(A^i)`` while the walk counts never overflow.
    """
    a = g.adjacency_matrix()
    at = a.T.tocsr()
    power = row_normalize(a)
    yield power
    for _ in range(2, h + 1):
        # (power @ A) == (A^T @ power^T)^T; A is symmetric so A^T == A
        power = np.asarray((at @ power.T).T)
        power = row_normalize(power, out=np.empty_like(power))
        yield power


@dataclass(frozen=True, eq=False)
class SnhamMatrix:
    matrix: np.ndarray
    order: int
    alpha: float

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def _check_params(h: int, alpha: float) -> None:
    if int(h) != h or h < 1:
        raise ValidationError("order h must be an integer >= 1")
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError("restart alpha must lie in [0, 1]")


def snham_prefix(g: Graph, orders, alpha: float = DEFAULT_ALPHA,
                 memory_cap: int | None = DEFAULT_MEMORY_CAP) -> Iterator[SnhamMatrix]:
    """SNHAM for every order in ``orders``, sharing one pass over the powers.

    ``SPCO_h`` extends ``SPCO_{h-1}`` by one term, so the matrices for all
    requested orders cost as much as the largest one alone.
    """
    wanted = sorted(set(int(h) for h in orders))
    if not wanted:
        raise ValidationError("no orders requested")
    for h in wanted:
        _check_params(h, alpha)
    check_memory(g.n, memory_cap)
    spco = None
    s1 = None
    for i, s_i in enumerate(transition_powers(g, wanted[-1]), start=1):
        if i == 1:
            s1 = s_i.copy()
            spco = s1.copy()
        elif alpha == 0.0:
            spco += s_i
        else:
            spco += (1.0 - alpha) * s_i + alpha * s1
        if i in wanted:
            # SPCO_1 = S_1 is already stochastic; renormalizing would only add rounding
            out = s1.copy() if i == 1 else row_normalize(spco)
            yield SnhamMatrix(out, i, float(alpha))


def spco_matrix(g: Graph, h: int, alpha: float = DEFAULT_ALPHA) -> np.ndarray:
    """The un-normalized sum ``SPCO_h``."""
    _check_params(h, alpha)
    s1 = None
    total = None
    for i, s_i in enumerate(transition_powers(g, h), start=1):
        if i == 1:
            s1 = s_i.copy()
            total = s1.copy()
        else:
            total += (1.0 - alpha) * s_i + alpha * s1
    return total


def snham_matrix(g: Graph, h: int = DEFAULT_ORDER, alpha: float = DEFAULT_ALPHA,
                 memory_cap: int | None = DEFAULT_MEMORY_CAP) -> SnhamMatrix:
    """Row-stochastic SNHAM matrix of order ``h`` with restart weight ``alpha``."""
    _check_params(h, alpha)
    return next(snham_prefix(g, [h], alpha, memory_cap))


def save_snham(s: SnhamMatrix, path: str | os.PathLike) -> None:
    """Binary dump: magic, n, h, alpha, then row-major little-endian float64."""
    with open(path, "wb") as fh:
        fh.write(_SNHAM_HEADER.pack(SNHAM_MAGIC, s.n, s.order, s.alpha))
        fh.write(np.ascontiguousarray(s.matrix, dtype="<f8").tobytes())


def load_snham(path: str | os.PathLike) -> SnhamMatrix:
    with open(path, "rb") as fh:
        head = fh.read(_SNHAM_HEADER.size)
        if len(head) != _SNHAM_HEADER.size:
            raise ValidationError(f"{path}: truncated header")
        magic, n, h, alpha = _SNHAM_HEADER.unpack(head)
        if magic != SNHAM_MAGIC:
            raise ValidationError(f"{path}: not a SNHAM dump")
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != n * n:
        raise ValidationError(f"{path}: expected {n * n} values, found {data.size}")
    return SnhamMatrix(data.reshape(n, n).astype(np.float64), int(h), float(alpha))
