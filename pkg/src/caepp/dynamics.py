"""
Multi-round drivers: trajectories, maximum convergent fidelity, sweeps over m.

Every CAEPP round map is projective-linear: the unnormalized output is
T @ q for a fixed nonnegative matrix T, so the success-conditioned iterate
after n rounds is T^n q0 / |T^n q0|_1.  For maps that expose T the limit is
computed by repeated squaring in extended precision; this stays exact when a
single round barely moves the state (large m, where the per-round change is
of order (C/A) and a step-size stopping rule would stop far from the limit).
Maps without a transfer matrix (TWEPP on two copies of the current state)
are iterated directly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import mpmath
import numpy as np

from ._parallel import parallel_map
from .errors import AbortError, ConvergenceError, ParameterError
from .rounds import RoundOutcome, StarMap, abc_coefficients
from .states import BellDiagonalState

__all__ = [
    "RoundRecord", "Trajectory", "FixedPointReport", "SweepRow",
    "run_trajectory", "fixed_point", "projective_limit", "sweep_m", "abc_coefficients",
]

RoundFn = Callable[[BellDiagonalState], RoundOutcome]

CONVERGED_STEP = 1e-12
MAX_SQUARINGS = 256
START_SENSITIVITY = 1e-9

_mp = mpmath.MPContext()
_mp.dps = 60


@dataclass(frozen=True)
class RoundRecord:
    round: int
    fidelity: float
    p_succ: float
    cum_succ: float
    state: BellDiagonalState


@dataclass
class Trajectory:
    initial: BellDiagonalState
    records: list = field(default_factory=list)
    status: str = "completed"  # completed | converged | target_reached | aborted

    @property
    def fidelities(self) -> list:
        return [r.fidelity for r in self.records]

    @property
    def final_state(self) -> BellDiagonalState:
        return self.records[-1].state if self.records else self.initial


def run_trajectory(state0: BellDiagonalState, round_fn: RoundFn, n_rounds: int,
                   target_F: Optional[float] = None) -> Trajectory:
    """Iterate the round map, conditioning on Success each time.

    Stops early once the fidelity reaches ``target_F``.  An abort re-raises
    :class:`AbortError` carrying the partial trajectory.
    """
    if n_rounds < 1:
        raise ParameterError("n_rounds must be at least 1")
    traj = Trajectory(state0)
    state, cum = state0, 1.0
    for n in range(1, n_rounds + 1):
        try:
            res = round_fn(state)
        except AbortError as exc:
            traj.status = "aborted"
            raise AbortError(f"round {n} aborted: {exc}", trajectory=traj) from exc
        cum *= res.p_succ
        step = max(abs(a - b) for a, b in zip(res.out_state.coeffs, state.coeffs))
        state = res.out_state
        traj.records.append(RoundRecord(n, res.fidelity, res.p_succ, cum, state))
        if target_F is not None and res.fidelity >= target_F:
            traj.status = "target_reached"
            return traj
        traj.status = "converged" if step < CONVERGED_STEP else "completed"
    return traj


@dataclass(frozen=True)
class FixedPointReport:
    F_star: float
    q_star: BellDiagonalState
    iterations: int  # rounds, or rounds-equivalent 2**k for the squaring method
    residual: float  # |F(round(q*)) - F*|
    infidelity: float  # 1 - F*, accumulated from the other coefficients
    bound: Optional[float] = None  # 3B/(2C) for star codes over depolarizing channels
    method: str = "iteration"
    start_sensitive: Optional[bool] = None

    @property
    def within_bound(self) -> Optional[bool]:
        if self.bound is None:
            return None
        return self.infidelity <= self.bound


def _to_mp_matrix(T):
    return [[_mp.mpf(v) for v in row] for row in (T.tolist() if isinstance(T, np.ndarray) else T)]


def _matvec(P, v):
    return [_mp.fsum(P[i][k] * v[k] for k in range(4)) for i in range(4)]


def _matmul(P, Q):
    return [[_mp.fsum(P[i][k] * Q[k][j] for k in range(4)) for j in range(4)] for i in range(4)]


def _normalized(v):
    s = _mp.fsum(v)
    if s <= 0:
        raise AbortError("protocol cannot succeed: success probability is zero")
    return [x / s for x in v]


def projective_limit(T, q0, tol: float = 1e-12, max_squarings: int = MAX_SQUARINGS):
    """Limit of T^n q0 / |T^n q0|_1 as n grows.

    Works on T^(2^k).  Stops once successive iterates differ by less than
    ``tol`` *and* the difference has stopped growing; while the slowest mode
    has not yet decayed the difference doubles with every squaring, which
    rules out stopping on a merely small step.  Returns (vector, k) with
    entries in 60-digit precision.
    """
    P = _to_mp_matrix(T)
    q0 = [_mp.mpf(x) for x in q0]
    prev = _normalized(_matvec(P, q0))
    prev_diff = None
    for k in range(1, max_squarings + 1):
        P = _matmul(P, P)
        scale = max(abs(x) for row in P for x in row)
        if scale == 0:
            raise AbortError("protocol cannot succeed: success probability is zero")
        P = [[x / scale for x in row] for row in P]
        v = _normalized(_matvec(P, q0))
        diff = max(abs(a - b) for a, b in zip(v, prev))
        if prev_diff is not None and diff < tol and diff <= prev_diff:
            return v, k
        prev, prev_diff = v, diff
    raise ConvergenceError("no limit within the squaring budget", last_state=[float(x) for x in prev],
                           iterations=2**max_squarings)


def _from_mp(v) -> BellDiagonalState:
    return BellDiagonalState([float(x) for x in v])


def fixed_point(round_fn: RoundFn, state0: BellDiagonalState, tol: float = 1e-12,
                max_iter: int = 100_000) -> FixedPointReport:
    """Maximum convergent fidelity of the success-conditioned iteration from ``state0``.

    ``max_iter`` limits direct iteration; the squaring method is limited by
    ``MAX_SQUARINGS`` instead.
    """
    if not tol > 0:
        raise ParameterError("tol must be positive")
    bound = round_fn.bound() if callable(getattr(round_fn, "bound", None)) else None
    transfer = getattr(round_fn, "transfer_matrix", None)

    if callable(transfer):
        T = transfer(_mp)
        v, k = projective_limit(T, state0.coeffs, tol)
        q_star = _from_mp(v)
        check = round_fn(q_star)
        step = max(abs(a - b) for a, b in zip(check.out_state.coeffs, q_star.coeffs))
        if step > 10 * tol:
            raise ConvergenceError(f"limit is not a fixed point of the round map (step {step:.3g})",
                                   last_state=q_star, iterations=2**k)
        try:
            alt, _ = projective_limit(T, (1.0, 0.0, 0.0, 0.0), tol)
            sensitive = abs(float(alt[0] - v[0])) > START_SENSITIVITY
        except (AbortError, ConvergenceError):
            sensitive = True
        return FixedPointReport(
            F_star=q_star.coeffs[0], q_star=q_star, iterations=2**k,
            residual=abs(check.fidelity - q_star.coeffs[0]),
            infidelity=float(_mp.fsum(v[1:])), bound=bound, method="power-limit",
            start_sensitive=sensitive,
        )

    state = state0
    for n in range(1, max_iter + 1):
        nxt = round_fn(state).out_state
        step = max(abs(a - b) for a, b in zip(nxt.coeffs, state.coeffs))
        residual = abs(nxt.coeffs[0] - state.coeffs[0])
        state = nxt
        if step < tol:
            return FixedPointReport(
                F_star=state.coeffs[0], q_star=state, iterations=n, residual=residual,
                infidelity=math.fsum(state.coeffs[1:]), bound=bound, method="iteration",
            )
    raise ConvergenceError(f"no convergence within {max_iter} rounds", last_state=state, iterations=max_iter)


@dataclass(frozen=True)
class SweepRow:
    p00: float
    m: int
    F_star: float
    infidelity: float
    bound: Optional[float]

    @property
    def within_bound(self) -> Optional[bool]:
        return None if self.bound is None else self.infidelity <= self.bound


CROSS_CHECK_MAX_M = 4
CROSS_CHECK_TOL = 1e-10


def _sweep_cell(args) -> SweepRow:
    p00, m, tol, cross_check = args
    star = StarMap(p00, m)
    state0 = BellDiagonalState((p00, (1 - p00) / 3, (1 - p00) / 3, (1 - p00) / 3))
    rep = fixed_point(star, state0, tol)
    if cross_check and m <= CROSS_CHECK_MAX_M:
        enum = fixed_point(star.enumeration_map(), state0, tol)
        if abs(enum.F_star - rep.F_star) > CROSS_CHECK_TOL:
            raise ConvergenceError(
                f"closed form and enumeration disagree at p00={p00}, m={m}: {rep.F_star} vs {enum.F_star}")
    return SweepRow(p00, m, rep.F_star, rep.infidelity, rep.bound)


def sweep_m(p00: float, m_range, tol: float = 1e-12, workers: Optional[int] = 1,
            cross_check: bool = True) -> list:
    """F* of the star code over a depolarizing channel for each m in ``m_range``.

    Starts from the channel's Choi state.  Small m are cross-checked against
    the enumeration engine.
    """
    if p00 <= 0.5:
        warnings.warn(f"p00={p00} <= 1/2: the channel is entanglement breaking", stacklevel=2)
    cells = [(p00, int(m), tol, cross_check) for m in m_range]
    return parallel_map(_sweep_cell, cells, workers)
