"""Modified symmetric ADMM for the facially reduced DNN relaxation.

Each iteration updates ``R`` (spectral projection), a half step of the
multiplier, ``Y`` (polyhedral projection) and a second multiplier step.
Multiplier steps are projected so that ``Z + Dhat`` keeps vanishing on the
diagonal and on row/column 0. Every ``bound_every`` iterations a lower bound
(dual function) and an upper bound (roundings) are computed; the run stops
on a small relative gap, small KKT residuals, stalled bounds or the
iteration cap.
"""

from __future__ import annotations

import dataclasses
import logging
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .bounds import certify, free_mask, relative_gap
from .facial import FacialBasis, GangsterIndex, ScaledObjective, scale_objective
from .instance import EDMData, Selection
from .proj import ProjectionError, init_Z, project_R, project_Y, project_ZA0

logger = logging.getLogger(__name__)

LOG_COLUMNS = ("j", "beta", "r", "sR", "sY", "lb", "ub", "relgap")


class SolverError(RuntimeError):
    """Numerical failure inside the iteration; ``state`` is the last iterate."""

    def __init__(self, message: str, state: SolverState | None = None):
        super().__init__(message)
        self.state = state


@dataclass
class SolverConfig:
    eps: float = 1e-12
    eta: float = 1e-10
    maxiter: int | None = None
    gamma: float = 0.9
    beta0: float | None = None
    mu: float = 2.0
    tau_inc: float = 2.0
    tau_dec: float = 2.0
    stall_max: int = 200
    bound_every: int = 100
    freeze_beta: bool = False
    polish: bool = True
    alpha: float | None = None
    delta: float | None = None
    debug: bool = False

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.beta0 is not None and not self.beta0 > 0:
            raise ValueError(f"beta0 must be positive, got {self.beta0}")
        for name in ("mu", "tau_inc", "tau_dec"):
            if not getattr(self, name) > 1:
                raise ValueError(f"{name} must exceed 1")
        if not (self.eps > 0 and self.eta > 0):
            raise ValueError("tolerances must be positive")
        if self.maxiter is not None and self.maxiter < 1:
            raise ValueError("maxiter must be positive")
        if self.stall_max < 1 or self.bound_every < 1:
            raise ValueError("stall_max and bound_every must be positive")
        if self.delta is not None and not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")

    @property
    def scaling(self) -> bool:
        return self.alpha is not None or self.delta is not None

    def resolved(self, N: int, k: int) -> SolverConfig:
        """Copy with the size-dependent defaults filled in."""
        maxiter = self.maxiter if self.maxiter is not None else 10**4 + k * (N + 1)
        beta0 = self.beta0 if self.beta0 is not None else float(max((N + 1) // k, 1))
        return dataclasses.replace(self, maxiter=maxiter, beta0=beta0)


@dataclass
class SolverState:
    j: int
    Y: np.ndarray
    R: np.ndarray | None
    Z: np.ndarray
    Z_half: np.ndarray
    beta: float
    r: float = np.inf
    sR: float = np.inf
    sY: float = np.inf
    lb: float = -np.inf
    ub: float = np.inf
    selection: Selection | None = None
    history: list = field(default_factory=list)
    stall: int = 0
    stop_reason: str | None = None


@dataclass
class SolveReport:
    lb: float
    ub: float
    selection: Selection
    rel_gap: float
    iterations: int
    stop_reason: str
    wall_seconds: float
    rank_y: int
    config: dict
    history: list = field(default_factory=list, repr=False)

    @property
    def gap(self) -> float:
        return self.ub - self.lb


def adapt_beta(beta: float, r: float, s: float, mu: float = 2.0, tau_inc: float = 2.0, tau_dec: float = 2.0) -> float:
    """Keep primal and dual residuals within a factor ``mu`` of each other."""
    if r > mu * s:
        return beta * tau_inc
    if s > mu * r:
        return beta / tau_dec
    return beta


def kkt_residuals(state: SolverState, basis: FacialBasis, gang: GangsterIndex, Dhat: np.ndarray,
                  mask: np.ndarray | None = None) -> tuple[float, float, float]:
    """Primal, dual-R and dual-Y residuals of the optimality conditions."""
    k = basis.k
    VRV = basis.expand(state.R)
    r = float(np.linalg.norm(state.Y - VRV))
    sR = float(np.linalg.norm(state.R - project_R(state.R + basis.compress(state.Z), k)))
    sY = float(np.linalg.norm(state.Y - project_Y(state.Y - Dhat - state.Z_half, gang, mask)))
    return r, sR, sY


def rank_estimate(Y: np.ndarray, rtol: float = 1e-6) -> int:
    w = scipy.linalg.eigvalsh(0.5 * (Y + Y.T))
    if w[-1] <= 0:
        return 0
    return int(np.sum(w > rtol * w[-1]))


def check_invariants(state: SolverState, basis: FacialBasis, gang: GangsterIndex, Dhat: np.ndarray,
                     mask: np.ndarray | None = None) -> None:
    """Assert ``R`` in the trace-constrained PSD set, ``Y`` in the box/arrow/gangster set
    and ``Z + Dhat`` zero on the diagonal and row/column 0."""
    k = basis.k
    R, Y, Z = state.R, state.Y, state.Z
    assert abs(np.trace(R) - (k + 1)) <= 1e-9, f"trace(R) = {np.trace(R)}"
    assert scipy.linalg.eigvalsh(R)[0] >= -1e-10 * (k + 1)
    assert Y[0, 0] == 1.0 and Y.min() >= 0.0 and Y.max() <= 1.0
    assert np.array_equal(np.diag(Y)[1:], Y[0, 1:]) and np.array_equal(Y[0, 1:], Y[1:, 0])
    if mask is None:
        mask = gang.mask()
    assert not Y[mask].any()
    C = Z + Dhat
    scale = 1e-12 * (1.0 + np.abs(Dhat).max())
    assert np.abs(np.diag(C)).max() <= scale and np.abs(C[0, :]).max() <= scale and np.abs(C[:, 0]).max() <= scale


def solve(edm: EDMData, basis: FacialBasis, gang: GangsterIndex, cfg: SolverConfig | None = None,
          callback: Callable[[SolverState], None] | None = None) -> SolveReport:
    """Run the splitting method and return certified bounds on ``p*``.

    ``callback`` is called with the live state after every iteration.
    """
    if basis.sizes != edm.sizes or gang.sizes != edm.sizes:
        raise ValueError("instance, basis and gangster index disagree on set sizes")
    k, N = edm.k, edm.N
    cfg = (cfg or SolverConfig()).resolved(N, k)
    start = time.perf_counter()

    scaled: ScaledObjective | None = None
    Dh = edm.Dhat
    if cfg.scaling:
        alpha = cfg.alpha if cfg.alpha is not None else 0.0
        delta = cfg.delta if cfg.delta is not None else 1.0
        scaled = scale_objective(edm.Dhat, basis, alpha, delta)
        Dh = scaled.DhatEff

    mask = gang.mask()
    free = free_mask(gang)
    Z = init_Z(Dh)
    state = SolverState(j=0, Y=np.zeros((N + 1, N + 1)), R=None, Z=Z, Z_half=Z.copy(), beta=cfg.beta0)
    gamma = cfg.gamma

    while True:
        state.j += 1
        j, beta = state.j, state.beta
        Y, Z = state.Y, state.Z
        try:
            R = project_R(basis.compress(Y + Z / beta), k, iteration=j)
        except ProjectionError as exc:
            raise SolverError(str(exc), state) from exc
        VRV = basis.expand(R)
        Z_half = Z + gamma * beta * project_ZA0(Y - VRV)
        Y = project_Y(VRV - (Dh + Z_half) / beta, gang, mask)
        Z = Z_half + gamma * beta * project_ZA0(Y - VRV)
        if not (np.isfinite(Z).all() and np.isfinite(R).all()):
            raise SolverError(f"non-finite iterate at iteration {j}", state)
        state.R, state.Y, state.Z, state.Z_half = R, Y, Z, Z_half
        if cfg.debug:
            check_invariants(state, basis, gang, Dh, mask)
        if callback is not None:
            callback(state)

        if j % cfg.bound_every == 0 or j == cfg.maxiter:
            _evaluate(state, edm, basis, gang, Dh, scaled, free, mask, cfg)
            if state.stop_reason is not None:
                break
        if j >= cfg.maxiter:
            state.stop_reason = "maxiter"
            break

    return SolveReport(
        lb=state.lb,
        ub=state.ub,
        selection=state.selection,
        rel_gap=relative_gap(state.ub, state.lb),
        iterations=state.j,
        stop_reason=state.stop_reason,
        wall_seconds=time.perf_counter() - start,
        rank_y=rank_estimate(state.Y),
        config=dataclasses.asdict(cfg),
        history=state.history,
    )


def _evaluate(state, edm, basis, gang, Dh, scaled, free, mask, cfg) -> None:
    cert = certify(state.Y, state.Z, edm, basis, gang, scaled, free, cfg.polish)
    improved = False
    if cert.lb > state.lb + 1e-12:
        improved = True
    if cert.lb > state.lb:
        state.lb = cert.lb
    if cert.ub < state.ub - 1e-12:
        improved = True
    if cert.ub < state.ub:
        state.ub, state.selection = cert.ub, cert.selection
    state.stall = 0 if improved else state.stall + 1

    r, sR, sY = kkt_residuals(state, basis, gang, Dh, mask)
    state.r, state.sR, state.sY = r, sR, sY
    gap = relative_gap(state.ub, state.lb)
    row = dict(zip(LOG_COLUMNS, (state.j, state.beta, r, sR, sY, state.lb, state.ub, gap)))
    state.history.append(row)
    logger.info(" ".join(f"{row[c]:.6e}" if c != "j" else f"{row[c]:d}" for c in LOG_COLUMNS))

    if gap <= cfg.eps:
        state.stop_reason = "gap"
    elif max(r, sR, sY) < cfg.eta:
        state.stop_reason = "kkt"
    elif state.stall >= cfg.stall_max:
        state.stop_reason = "stall"
    elif not cfg.freeze_beta:
        state.beta = adapt_beta(state.beta, r, max(sR, sY), cfg.mu, cfg.tau_inc, cfg.tau_dec)
