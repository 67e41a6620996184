"""Euclidean projections used by the splitting method."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .facial import GangsterIndex

# values this close to a box bound are snapped onto it
SNAP = 1e-14


class ProjectionError(ArithmeticError):
    pass


def project_simplex(d: np.ndarray, s: float) -> np.ndarray:
    """Projection of ``d`` onto ``{x >= 0, sum(x) = s}`` by sort and threshold."""
    d = np.asarray(d, dtype=float)
    if d.ndim != 1 or d.size == 0:
        raise ValueError("need a nonempty vector")
    if not s > 0:
        raise ValueError(f"simplex scale must be positive, got {s}")
    u = np.sort(d)[::-1]
    css = np.cumsum(u) - s
    ind = np.arange(1, d.size + 1)
    rho = np.nonzero(u - css / ind > 0)[0][-1]
    tau = css[rho] / (rho + 1)
    return np.maximum(d - tau, 0.0)


def project_R(M: np.ndarray, k: int, iteration: int | None = None) -> np.ndarray:
    """Nearest PSD matrix with trace ``k + 1``.

    Eigenvalues are projected onto the scaled simplex; eigenvectors kept.
    """
    M = 0.5 * (M + M.T)
    try:
        w, U = scipy.linalg.eigh(M, check_finite=True, driver="evd")
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        where = "" if iteration is None else f" at iteration {iteration}"
        raise ProjectionError(f"eigendecomposition failed{where}: {exc}") from exc
    lam = project_simplex(w, k + 1)
    keep = lam > 0
    Uk = U[:, keep]
    R = (Uk * lam[keep]) @ Uk.T
    return 0.5 * (R + R.T)


def _snap_box(Y: np.ndarray) -> np.ndarray:
    np.clip(Y, 0.0, 1.0, out=Y)
    Y[Y < SNAP] = 0.0
    Y[Y > 1.0 - SNAP] = 1.0
    return Y


def project_Y(W: np.ndarray, gang: GangsterIndex, mask: np.ndarray | None = None) -> np.ndarray:
    """Projection onto ``{Y_00 = 1, gangster entries 0, arrow0(Y) = 0, 0 <= Y <= 1}``.

    The constraint groups touch disjoint entries, so the projection splits:
    each triple ``(Y_ii, Y_0i, Y_i0)`` is tied to the clamped mean of its
    three entries and every remaining entry is clamped separately.

    ``mask`` is the precomputed gangster mask; it is built when omitted.
    """
    W = 0.5 * (W + W.T)
    Y = _snap_box(W.copy())
    if mask is None:
        mask = gang.mask()
    Y[mask] = 0.0
    diag = np.diag(W)[1:]
    tied = _snap_box((diag + 2.0 * W[0, 1:]) / 3.0)
    Y[0, 1:] = tied
    Y[1:, 0] = tied
    idx = np.arange(1, W.shape[0])
    Y[idx, idx] = tied
    Y[0, 0] = 1.0
    return Y


def project_ZA0(W: np.ndarray) -> np.ndarray:
    """Zero the diagonal and row/column 0; every other entry is kept."""
    out = np.array(W, dtype=float)
    out[0, :] = 0.0
    out[:, 0] = 0.0
    np.fill_diagonal(out, 0.0)
    return out


def init_Z(Dhat: np.ndarray) -> np.ndarray:
    """Point of ``{Z : (Z + Dhat) vanishes on the diagonal and row/column 0}`` nearest to 0."""
    Z = np.zeros_like(Dhat, dtype=float)
    Z[0, :] = -Dhat[0, :]
    Z[:, 0] = -Dhat[:, 0]
    np.fill_diagonal(Z, -np.diag(Dhat))
    return Z
