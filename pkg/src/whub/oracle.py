"""Exhaustive enumeration and the multiple-optima duality-gap check."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .instance import EDMData, Selection, objective_value

GUARD = 10**8
CHUNK = 1 << 18


class SearchSpaceError(ValueError):
    def __init__(self, count: int, guard: int):
        self.count = count
        self.guard = guard
        super().__init__(f"{count} selections exceed the enumeration guard of {guard}")


def selection_count(sizes: Sequence[int]) -> int:
    return math.prod(int(n) for n in sizes)


def _suffix_split(sizes: Sequence[int]) -> int:
    # first set index of the largest trailing block with at most CHUNK combinations
    split, prod = len(sizes), 1
    while split > 0 and prod * sizes[split - 1] <= CHUNK:
        split -= 1
        prod *= sizes[split]
    return split


def brute_force(edm: EDMData, tol_opt: float = 1e-9, maximize: bool = False,
                guard: int = GUARD) -> tuple[float, list[Selection]]:
    """Exact optimum of ``x^T D x`` over all selections.

    Selections are enumerated in lexicographic order of their picks; the
    returned optima are every selection within ``tol_opt * (1 + |p*|)`` of
    the optimum, in that order. ``p*`` is recomputed with
    :func:`objective_value` on those optima. With ``maximize`` the largest value is found.
    """
    sizes = edm.sizes
    count = selection_count(sizes)
    if count > guard:
        raise SearchSpaceError(count, guard)
    D = edm.D
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(int)
    sign = -1.0 if maximize else 1.0

    split = _suffix_split(sizes)
    suffix = list(range(split, len(sizes)))
    if suffix:
        grid = np.indices([sizes[j] for j in suffix]).reshape(len(suffix), -1)
        glob = grid + offsets[suffix][:, None]
        inner = np.zeros(grid.shape[1])
        for a in range(len(suffix)):
            for b in range(a + 1, len(suffix)):
                inner += D[glob[a], glob[b]]
        inner *= 2.0
    else:
        grid = np.zeros((0, 1), dtype=int)
        glob = grid
        inner = np.zeros(1)

    best = math.inf
    found: list[tuple[float, tuple[int, ...]]] = []
    for prefix in itertools.product(*[range(sizes[j]) for j in range(split)]):
        pidx = offsets[:split] + np.asarray(prefix, dtype=int)
        pin = D[np.ix_(pidx, pidx)].sum()
        rows = D[pidx].sum(axis=0)
        cross = np.zeros(grid.shape[1])
        for a in range(len(suffix)):
            cross += rows[glob[a]]
        vals = sign * (pin + 2.0 * cross + inner)
        low = vals.min()
        if low < best:
            best = low
        cut = best + tol_opt * (1.0 + abs(best))
        for c in np.nonzero(vals <= cut)[0]:
            found.append((vals[c], prefix + tuple(int(g) for g in grid[:, c])))

    cut = best + tol_opt * (1.0 + abs(best))
    optima = [Selection(tuple(p + 1 for p in picks)) for v, picks in found if v <= cut]
    # report the value in the same summation order as objective_value, so
    # it compares exactly with upper bounds evaluated there
    exact = [sign * objective_value(edm, s) for s in optima]
    return float(sign * min(exact)), optima


def lifted_vectors(optima: Sequence[Selection], sizes: Sequence[int]) -> np.ndarray:
    """Rows ``(1; x_i)`` for each selection."""
    return np.array([np.concatenate([[1.0], s.to_vector(sizes)]) for s in optima])


def lifted_barycenter(optima: Sequence[Selection], sizes: Sequence[int]) -> tuple[np.ndarray, int, bool]:
    """Average of the lifted vertices, the rank of the lifted vectors and
    whether their sum is entrywise positive."""
    if not optima:
        raise ValueError("need at least one selection")
    Yv = lifted_vectors(optima, sizes)
    Yhat = Yv.T @ Yv / len(optima)
    sv = scipy.linalg.svdvals(Yv)
    rank = int(np.sum(sv > 1e-9 * sv[0]))
    return Yhat, rank, bool((Yv.sum(axis=0) > 0).all())


@dataclass(frozen=True)
class GapReport:
    p_star: float
    optima: list[Selection]
    lifted_rank: int
    threshold: int
    sum_positive: bool
    has_nonoptimal: bool
    solver_lb: float | None

    @property
    def gap_certified(self) -> bool:
        """All hypotheses of the multiple-optima gap result hold."""
        return self.lifted_rank >= self.threshold and self.sum_positive and self.has_nonoptimal

    @property
    def empirical_gap(self) -> float | None:
        if self.solver_lb is None:
            return None
        return self.p_star - self.solver_lb

    def to_json(self) -> dict:
        return {
            "pStar": self.p_star,
            "optima": [list(s.picks) for s in self.optima],
            "optimaCount": len(self.optima),
            "liftedRank": self.lifted_rank,
            "threshold": self.threshold,
            "sumPositive": self.sum_positive,
            "hasNonOptimal": self.has_nonoptimal,
            "gapCertified": self.gap_certified,
            "solverLB": self.solver_lb,
            "empiricalGap": self.empirical_gap,
        }


def gap_check(edm: EDMData, solver_lb: float | None = None, tol_opt: float = 1e-9,
              guard: int = GUARD) -> GapReport:
    """Enumerate the optima and test the hypotheses for a certified gap:
    ``N + 1 - k`` linearly independent lifted optima, positive sum, and a
    feasible non-optimal selection."""
    p_star, optima = brute_force(edm, tol_opt, guard=guard)
    _, rank, positive = lifted_barycenter(optima, edm.sizes)
    return GapReport(
        p_star=p_star,
        optima=optima,
        lifted_rank=rank,
        threshold=edm.N + 1 - edm.k,
        sum_positive=positive,
        has_nonoptimal=selection_count(edm.sizes) > len(optima),
        solver_lb=solver_lb,
    )
