"""
Pauli channels, Bell-diagonal and GHZ-diagonal states.

Index convention shared by every module: a two-bit index (x, z) stands for
the Pauli X^x Z^z, flattened as ``2*x + z``.  For channels this gives the
order (I, Z, X, Y); for Bell-diagonal states the order
(phi+, phi-, psi+, psi-), since the Bell state with index (x, z) is
(I ⊗ X^x Z^z)|phi+>.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ParameterError

TOL = 1e-9

# (x, z) -> flat index
IDX = {(0, 0): 0, (0, 1): 1, (1, 0): 2, (1, 1): 3}


def _probability_vector(values, size: int, what: str) -> tuple:
    arr = np.asarray(values, dtype=np.float64).reshape(-1)
    if arr.shape != (size,):
        raise ParameterError(f"{what} needs {size} entries, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{what} has non-finite entries: {values!r}")
    if np.any(arr < -TOL) or np.any(arr > 1 + TOL):
        raise ParameterError(f"{what} entries must lie in [0, 1]: {values!r}")
    total = arr.sum()
    if abs(total - 1.0) > TOL:
        raise ParameterError(f"{what} must sum to 1 (got {total!r})")
    arr = np.clip(arr, 0.0, None)
    # leave exact permutations bit-identical; only fix genuine drift
    if abs(arr.sum() - 1.0) > 8 * np.finfo(float).eps:
        arr = arr / arr.sum()
    return tuple(float(v) for v in arr)


@dataclass(frozen=True)
class PauliChannel:
    """Qubit Pauli channel with weights (p00, p01, p10, p11) on (I, Z, X, Y)."""

    probs: tuple

    def __post_init__(self):
        object.__setattr__(self, "probs", _probability_vector(self.probs, 4, "Pauli channel"))

    def __getitem__(self, xz):
        return self.probs[IDX[xz]]

    @property
    def array(self) -> np.ndarray:
        return np.array(self.probs)

    @property
    def p00(self) -> float:
        return self.probs[0]


@dataclass(frozen=True)
class BellDiagonalState:
    """Mixture of Bell states with weights (q00, q01, q10, q11) on (phi+, phi-, psi+, psi-)."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _probability_vector(self.coeffs, 4, "Bell-diagonal state"))

    def __getitem__(self, xz):
        return self.coeffs[IDX[xz]]

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coeffs)

    @property
    def fidelity(self) -> float:
        return self.coeffs[0]


@dataclass(frozen=True)
class GHZDiagonalState:
    """Mixture of GHZ basis states G_abc, coefficient of G_abc at index 4a + 2b + c."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _probability_vector(self.coeffs, 8, "GHZ-diagonal state"))

    def __getitem__(self, abc):
        a, b, c = abc
        return self.coeffs[4 * a + 2 * b + c]

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coeffs)

    @property
    def fidelity(self) -> float:
        return self.coeffs[0]


FAMILIES = ("depolarizing", "biased", "flip", "custom")


@dataclass(frozen=True)
class ChannelFamily:
    """Parametrised channel family.

    ``gamma``/``delta`` are used by the flip family only and must add up to 1;
    ``probs`` is the explicit vector of a custom channel.
    """

    tag: str
    p00: Optional[float] = None
    gamma: float = 1.0
    delta: float = 0.0
    probs: Optional[Sequence[float]] = None


def make_channel(family: ChannelFamily) -> PauliChannel:
    tag = family.tag
    if tag not in FAMILIES:
        raise ParameterError(f"unknown channel family {tag!r}; expected one of {FAMILIES}")
    if tag == "custom":
        if family.probs is None:
            raise ParameterError("custom channel needs an explicit probability vector")
        return PauliChannel(tuple(family.probs))

    p = family.p00
    if p is None or not 0.0 <= p <= 1.0:
        raise ParameterError(f"p00 must lie in [0, 1], got {p!r}")
    rest = 1.0 - p
    if tag == "depolarizing":
        return PauliChannel((p, rest / 3, rest / 3, rest / 3))
    if tag == "biased":
        return PauliChannel((p, rest / 5, 2 * rest / 5, 2 * rest / 5))
    # flip family: no phase error
    g, d = family.gamma, family.delta
    if g < 0 or d < 0 or abs(g + d - 1.0) > TOL:
        raise ParameterError(f"flip family needs gamma, delta >= 0 with gamma + delta = 1, got {g}, {d}")
    return PauliChannel((p, 0.0, g * rest, d * rest))


def depolarizing(p00: float) -> PauliChannel:
    return make_channel(ChannelFamily("depolarizing", p00))


def isotropic(fidelity: float) -> BellDiagonalState:
    """Isotropic state, i.e. the Choi state of a depolarizing channel."""
    return choi_state(depolarizing(fidelity))


def memory_noise(e: float) -> PauliChannel:
    """Depolarizing memory error rho -> (1-e) rho + e I/2 as a Pauli channel."""
    if not 0.0 <= e <= 1.0:
        raise ParameterError(f"memory error rate must lie in [0, 1], got {e!r}")
    return PauliChannel((1 - 3 * e / 4, e / 4, e / 4, e / 4))


IDENTITY_CHANNEL = PauliChannel((1.0, 0.0, 0.0, 0.0))


def choi_state(ch: PauliChannel) -> BellDiagonalState:
    return BellDiagonalState(ch.probs)


def channel_of(state: BellDiagonalState) -> PauliChannel:
    """Inverse of :func:`choi_state`."""
    return PauliChannel(state.coeffs)


def fidelity(s: BellDiagonalState) -> float:
    return s.coeffs[0]


def is_entanglement_breaking(ch: PauliChannel) -> bool:
    # Bell-diagonal Choi state is separable iff no weight exceeds 1/2
    return max(ch.probs) <= 0.5


def canonical_order(s: BellDiagonalState):
    """Sort coefficients into descending order.

    Returns the sorted state and ``perm`` with ``sorted[i] = s.coeffs[perm[i]]``.
    Ties keep their original order.
    """
    perm = tuple(sorted(range(4), key=lambda i: -s.coeffs[i]))
    return BellDiagonalState(tuple(s.coeffs[i] for i in perm)), perm


_SWAP_Z_Y = (0, 3, 2, 1)


def preprocess_swap(s: BellDiagonalState) -> BellDiagonalState:
    """Exchange the phi- and psi- weights (local R_x(+pi/2) ⊗ R_x(-pi/2))."""
    return BellDiagonalState(tuple(s.coeffs[i] for i in _SWAP_Z_Y))


def channel_encdec_swap(ch: PauliChannel) -> PauliChannel:
    """Exchange the Z and Y weights (R_x(-pi/2) before the channel, R_x(+pi/2) after)."""
    return PauliChannel(tuple(ch.probs[i] for i in _SWAP_Z_Y))


def twirl_isotropic(s: BellDiagonalState) -> BellDiagonalState:
    f = s.coeffs[0]
    r = (1.0 - f) / 3
    return BellDiagonalState((f, r, r, r))


def pauli_convolve(a, b) -> np.ndarray:
    """Distribution of the product of two independent single-qubit Pauli errors.

    With flat (x, z) indices the product's index is the XOR of the factors'.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    idx = np.arange(4)
    return np.array([np.dot(a, b[idx ^ i]) for i in range(4)])
