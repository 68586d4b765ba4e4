"""Tripartite carrier-assisted round on GHZ-diagonal states."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AbortError
from .states import GHZDiagonalState, PauliChannel


@dataclass(frozen=True)
class GHZRoundOutcome:
    p_succ: float
    out_state: GHZDiagonalState

    @property
    def fidelity(self) -> float:
        return self.out_state.coeffs[0]


def _as_tensor(s: GHZDiagonalState) -> np.ndarray:
    return s.array.reshape(2, 2, 2)


def ghz_init(ch_AB: PauliChannel, ch_AC: PauliChannel) -> GHZDiagonalState:
    """GHZ-diagonal state left after sending two GHZ qubits through the channels.

    s_abc = sum_k p_{a,k} q_{b,k^c}: a, b are the bit flips seen by Bob and
    Carol, c the total phase flip.
    """
    p = ch_AB.array.reshape(2, 2)
    q = ch_AC.array.reshape(2, 2)
    s = np.zeros((2, 2, 2))
    for k in range(2):
        for c in range(2):
            s[:, :, c] += np.outer(p[:, k], q[:, k ^ c])
    return GHZDiagonalState(s.reshape(-1))


def _ghz_unnormalized(r: np.ndarray, s: np.ndarray) -> np.ndarray:
    out = np.zeros((2, 2, 2))
    for c in range(2):
        for k in range(2):
            out[:, :, c] += r[:, :, k] * s[:, :, k ^ c]
    return out


def ghz_round(r: GHZDiagonalState, s: GHZDiagonalState) -> GHZRoundOutcome:
    """One round: shared state ``r``, carrier-pair error distribution ``s``.

    Both carriers must read 0; bit flips have to match between the shared
    state and the carriers and the phase flips add up.
    """
    out = _ghz_unnormalized(_as_tensor(r), _as_tensor(s)).reshape(-1)
    p = float(np.sum(out))
    if not p > 0.0:
        raise AbortError("protocol cannot succeed: success probability is zero")
    return GHZRoundOutcome(min(p, 1.0), GHZDiagonalState(out / p))


def ghz_iterate(r: GHZDiagonalState, s: GHZDiagonalState, rounds: int) -> list:
    """Repeat the round feeding each output back in as the shared state.

    Extrapolated: the tripartite protocol is only specified for one round.
    """
    out = []
    for _ in range(rounds):
        res = ghz_round(r, s)
        out.append(res)
        r = res.out_state
    return out
