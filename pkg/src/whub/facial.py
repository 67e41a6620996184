"""Facial reduction data for the lifted problem.

Feasible lifted matrices ``Y = (1; x)(1; x)^T`` have their range inside the
nullspace of ``B = [-e | A]``, where ``A`` is the set-membership matrix. The
relaxation is therefore parametrized as ``Y = V R V^T`` with ``V`` an
orthonormal basis of ``null(B)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp


def _check_sizes(sizes: Sequence[int]) -> tuple[int, ...]:
    sizes = tuple(int(n) for n in sizes)
    if not sizes:
        raise ValueError("need at least one set")
    if any(n < 1 for n in sizes):
        raise ValueError(f"set sizes must be positive, got {sizes}")
    return sizes


def constraint_matrix(sizes: Sequence[int]) -> np.ndarray:
    """``B = [-e | A]`` with ``A`` the block-diagonal row of ones per set."""
    sizes = _check_sizes(sizes)
    B = np.zeros((len(sizes), sum(sizes) + 1))
    B[:, 0] = -1.0
    col = 1
    for j, n in enumerate(sizes):
        B[j, col:col + n] = 1.0
        col += n
    return B


@dataclass(frozen=True)
class FacialBasis:
    """Orthonormal basis ``V`` of ``null([-e | A])``, shape ``(N+1, N+1-k)``."""

    V: sp.csr_matrix
    sizes: tuple[int, ...]
    mode: str

    @property
    def k(self) -> int:
        return len(self.sizes)

    @property
    def N(self) -> int:
        return int(sum(self.sizes))

    @property
    def dense(self) -> np.ndarray:
        return self.V.toarray()

    def compress(self, M: np.ndarray) -> np.ndarray:
        """``V^T M V``."""
        VT = self.V.T.tocsr()
        return np.asarray((VT @ (VT @ M).T).T)

    def expand(self, R: np.ndarray) -> np.ndarray:
        """``V R V^T``."""
        W = np.asarray(self.V @ R)
        return np.asarray(self.V @ W.T).T

    def project(self, M: np.ndarray) -> np.ndarray:
        """``P_V M P_V`` with ``P_V = V V^T``."""
        return self.expand(self.compress(M))


def _block_columns(n: int) -> np.ndarray:
    # n x (n-1): column r has -v_r in rows 0..r-1 and vbar_r in row r
    O = np.zeros((n, n - 1))
    for r in range(1, n):
        scale = 1.0 / math.sqrt(r + r * r)
        O[:r, r - 1] = -scale
        O[r, r - 1] = r * scale
    return O


def build_facial_basis(sizes: Sequence[int], mode: str = "structured") -> FacialBasis:
    """Orthonormal nullspace basis of ``[-e | A]``.

    ``structured`` uses the explicit sparse construction: per set an
    ``n_j x (n_j - 1)`` block of Helmert-like columns, plus one dense last
    column ``(alpha; alpha/n_1 e; ...; alpha/n_k e)`` normalized to unit
    length. For equal set sizes this reduces to the closed form with
    ``beta = -1/sqrt(n^2 + nk)`` and ``alpha = n beta``.

    ``nullspace`` returns the SVD-based orthonormal nullspace instead.
    """
    sizes = _check_sizes(sizes)
    N, k = sum(sizes), len(sizes)
    if mode == "nullspace":
        V = scipy.linalg.null_space(constraint_matrix(sizes))
        return FacialBasis(sp.csr_matrix(V), sizes, mode)
    if mode != "structured":
        raise ValueError(f"unknown basis mode {mode!r}")

    rows, cols, vals = [], [], []
    row0, col0 = 1, 0
    for n in sizes:
        O = _block_columns(n)
        r, c = np.nonzero(O)
        rows.append(r + row0)
        cols.append(c + col0)
        vals.append(O[r, c])
        row0 += n
        col0 += n - 1
    alpha = -1.0 / math.sqrt(1.0 + sum(1.0 / n for n in sizes))
    last = np.concatenate([[alpha]] + [np.full(n, alpha / n) for n in sizes])
    rows.append(np.arange(N + 1))
    cols.append(np.full(N + 1, col0))
    vals.append(last)
    V = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(N + 1, N + 1 - k),
    )
    return FacialBasis(V, sizes, mode)


@dataclass(frozen=True)
class GangsterIndex:
    """Off-diagonal positions inside each set's diagonal block.

    Indices are global 1-based positions of the lifted matrix (row/column 0
    is the homogenizing coordinate and never appears).
    """

    sizes: tuple[int, ...]
    rows: np.ndarray
    cols: np.ndarray

    @property
    def pairs(self) -> set[tuple[int, int]]:
        return set(zip(self.rows.tolist(), self.cols.tolist()))

    def __len__(self):
        return len(self.rows)

    def mask(self) -> np.ndarray:
        """Symmetric boolean ``(N+1, N+1)`` mask of the gangster entries."""
        N = sum(self.sizes)
        M = np.zeros((N + 1, N + 1), dtype=bool)
        M[self.rows, self.cols] = True
        M[self.cols, self.rows] = True
        return M


def build_gangster(sizes: Sequence[int]) -> GangsterIndex:
    sizes = _check_sizes(sizes)
    rows, cols = [], []
    start = 1
    for n in sizes:
        r, c = np.triu_indices(n, 1)
        rows.append(r + start)
        cols.append(c + start)
        start += n
    return GangsterIndex(sizes, np.concatenate(rows).astype(int), np.concatenate(cols).astype(int))


def arrow(Y: np.ndarray) -> np.ndarray:
    """``(Y_00; diag(Y_bar) - Y[1:, 0])``."""
    out = np.empty(Y.shape[0])
    out[0] = Y[0, 0]
    out[1:] = np.diag(Y)[1:] - Y[1:, 0]
    return out


def arrow0(Y: np.ndarray) -> np.ndarray:
    out = arrow(Y)
    out[0] = 0.0
    return out


def lift(x: np.ndarray) -> np.ndarray:
    """Rank-one lifting ``(1; x)(1; x)^T``."""
    y = np.concatenate([[1.0], np.asarray(x, dtype=float)])
    return np.outer(y, y)


@dataclass(frozen=True)
class ScaledObjective:
    """Shifted and scaled objective ``delta * (P_V Dhat P_V + alpha I)``.

    For any relaxation-feasible ``Y`` (``trace Y = k + 1``, ``Y = P_V Y P_V``)
    ``<Dhat, Y> = (<DhatEff, Y> - offset) / delta``.
    """

    DhatEff: np.ndarray
    alpha: float
    delta: float
    offset: float

    def unscale(self, value: float) -> float:
        return (value - self.offset) / self.delta


def scale_objective(Dhat: np.ndarray, basis: FacialBasis, alpha: float = 0.0, delta: float = 1.0) -> ScaledObjective:
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    M = basis.project(Dhat)
    M = 0.5 * (M + M.T)
    M[np.diag_indices_from(M)] += alpha
    return ScaledObjective(delta * M, float(alpha), float(delta), float(delta * alpha * (basis.k + 1)))


def sparsity_listing(basis: FacialBasis) -> str:
    """Coordinate list ``row col value`` of the nonzeros of ``V``."""
    C = basis.V.tocoo()
    order = np.lexsort((C.col, C.row))
    return "\n".join(f"{C.row[i]} {C.col[i]} {C.data[i]:.17g}" for i in order)
