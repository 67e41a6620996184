"""Lower bounds from the dual function and upper bounds from rounding."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .facial import FacialBasis, GangsterIndex, ScaledObjective
from .instance import EDMData, Selection, objective_value

logger = logging.getLogger(__name__)

EPS = np.finfo(float).eps


def relative_gap(ub: float, lb: float) -> float:
    return (ub - lb) / (abs(ub) + abs(lb) + 1.0)


def free_mask(gang: GangsterIndex) -> np.ndarray:
    """Off-diagonal entries of the lower-right block not fixed by the gangster."""
    M = ~gang.mask()
    M[0, :] = False
    M[:, 0] = False
    np.fill_diagonal(M, False)
    return M


def inner_min(C: np.ndarray, free: np.ndarray) -> float:
    """``min <C, Y>`` over the polyhedral set of lifted-matrix constraints.

    ``C`` must be symmetric. Each independent entry group is minimized on its
    own: the corner is fixed at 1, the tied triple ``(i,i), (0,i), (i,0)``
    contributes ``min(0, C_ii + 2 C_0i)``, every free off-diagonal entry
    ``min(0, C_ij)``, and gangster entries nothing.
    """
    tied = np.diag(C)[1:] + 2.0 * C[0, 1:]
    return float(C[0, 0] + np.minimum(tied, 0.0).sum() + np.minimum(C[free], 0.0).sum())


def lower_bound(Z: np.ndarray, Dhat: np.ndarray, basis: FacialBasis, gang: GangsterIndex,
                free: np.ndarray | None = None) -> float:
    """Dual function value ``min_Y <Dhat + Z, Y> - (k+1) lambda_max(V^T Z V)``.

    The largest eigenvalue is inflated by ``m * eps * ||V^T Z V||_2`` (``m`` the
    order of the compressed matrix) to cover the eigensolver's backward
    error, so the value stays a valid bound in floating point.
    """
    Zs = 0.5 * (Z + Z.T)
    C = Dhat + Zs
    C = 0.5 * (C + C.T)
    if free is None:
        free = free_mask(gang)
    W = basis.compress(Zs)
    W = 0.5 * (W + W.T)
    w = scipy.linalg.eigvalsh(W)
    lam = w[-1] + W.shape[0] * EPS * max(abs(w[0]), abs(w[-1]))
    return inner_min(C, free) - (basis.k + 1) * lam


def _blockwise_argmax(weights: np.ndarray, sizes: Sequence[int]) -> Selection:
    picks = []
    start = 0
    for n in sizes:
        picks.append(int(np.argmax(weights[start:start + n])) + 1)
        start += n
    return Selection(tuple(picks))


def round_column0(Y: np.ndarray, sizes: Sequence[int]) -> Selection:
    """Per set, the point with the largest weight in column 0 of ``Y``."""
    return _blockwise_argmax(np.asarray(Y)[1:, 0], sizes)


def perron_vector(Y: np.ndarray, rtol: float = 1e-10) -> tuple[np.ndarray, bool]:
    """Leading eigenvector of symmetric ``Y``, signed to be nonnegative.

    If the top eigenvalue is repeated, the all-ones vector is projected onto
    its eigenspace, which picks the Perron vector for a nonnegative matrix
    and keeps exact ties. The flag is set when the vector still has entries
    below ``-1e-10`` and absolute values had to be taken.
    """
    Ys = 0.5 * (Y + Y.T)
    w, U = scipy.linalg.eigh(Ys)
    top = w >= w[-1] - rtol * max(abs(w[-1]), 1.0)
    Ut = U[:, top]
    if Ut.shape[1] == 1:
        v = Ut[:, 0]
    else:
        v = Ut @ (Ut.T @ np.ones(Y.shape[0]))
    if v.sum() < 0:
        v = -v
    flagged = bool(v.min() < -1e-10)
    if flagged:
        v = np.abs(v)
    return v, flagged


def round_perron(Y: np.ndarray, sizes: Sequence[int]) -> Selection:
    """Per set, the point with the largest entry of the leading eigenvector."""
    v, flagged = perron_vector(Y)
    if flagged:
        logger.warning("leading eigenvector has mixed signs; rounding on absolute values")
    return _blockwise_argmax(v[1:], sizes)


@dataclass(frozen=True)
class BoundsCertificate:
    lb: float
    ub: float
    selection: Selection
    source: str

    @property
    def gap(self) -> float:
        return self.ub - self.lb

    @property
    def rel_gap(self) -> float:
        return relative_gap(self.ub, self.lb)


def local_search(edm: EDMData, sel: Selection) -> Selection:
    """Swap single picks while that strictly lowers the objective.

    Sets are visited in order; within a set the cheapest point wins, with
    ties going to the current pick and then the lowest index.
    """
    D = edm.D
    offsets = np.concatenate([[0], np.cumsum(edm.sizes)[:-1]]).astype(int)
    idx = sel.global_indices(edm.sizes).copy()
    improved = True
    while improved:
        improved = False
        for j, n in enumerate(edm.sizes):
            others = np.delete(idx, j)
            cost = D[offsets[j]:offsets[j] + n][:, others].sum(axis=1)
            best = int(np.argmin(cost))
            if cost[best] < cost[idx[j] - offsets[j]]:
                idx[j] = offsets[j] + best
                improved = True
    return Selection(tuple(int(i - o) + 1 for i, o in zip(idx, offsets)))


def upper_bound(Y: np.ndarray, edm: EDMData, polish: bool = True) -> tuple[float, Selection, str]:
    """Best of the two roundings, evaluated on the original distances.

    With ``polish`` each rounding is improved by :func:`local_search`.
    """
    best = None
    for source, rounding in (("column0", round_column0), ("perron", round_perron)):
        sel = rounding(Y, edm.sizes)
        if polish:
            sel = local_search(edm, sel)
        val = objective_value(edm, sel)
        if best is None or val < best[0]:
            best = (val, sel, source)
    return best


def certify(Y: np.ndarray, Z: np.ndarray, edm: EDMData, basis: FacialBasis, gang: GangsterIndex,
            scaled: ScaledObjective | None = None, free: np.ndarray | None = None,
            polish: bool = True) -> BoundsCertificate:
    """Lower and upper bound on ``p*`` from one iterate.

    When the iterate came from a run on a scaled objective, pass ``scaled``;
    ``Z`` then belongs to the scaled problem and the bound is mapped back.
    """
    if scaled is None:
        lb = lower_bound(Z, edm.Dhat, basis, gang, free)
    else:
        lb = scaled.unscale(lower_bound(Z, scaled.DhatEff, basis, gang, free))
    ub, sel, source = upper_bound(Y, edm, polish)
    return BoundsCertificate(lb=lb, ub=ub, selection=sel, source=source)
