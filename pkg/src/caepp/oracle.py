"""
Dense density-matrix reference simulator (at most 6 qubits).

Runs the protocols gate by gate with explicit unitaries, including the
R_x(±pi/2) pre-processing rotations, and reads Bell/GHZ coefficients off
the final state.  It shares no code with the Pauli-frame engines it checks.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import AbortError, ParameterError
from .pauli import StabilizerCode, encoding_circuit
from .states import BellDiagonalState, GHZDiagonalState, PauliChannel

MAX_QUBITS = 6
ATOL = 1e-10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
# Clifford cycling X -> Y -> Z -> X (up to sign)
CYCLE = (I2 - 1j * X - 1j * Y - 1j * Z) / 2

# flat (x, z) index -> X^x Z^z
PAULIS = [I2, Z, X, X @ Z]


def rx(theta: float) -> np.ndarray:
    return np.cos(theta / 2) * I2 - 1j * np.sin(theta / 2) * X


GATES = {
    "H": H,
    "CNOT": CNOT,
    "X": X,
    "Z": Z,
    "RX+": rx(np.pi / 2),
    "RX-": rx(-np.pi / 2),
}


@dataclass
class DenseState:
    rho: np.ndarray
    n: int

    def __post_init__(self):
        if self.n > MAX_QUBITS:
            raise ParameterError(f"dense simulation is limited to {MAX_QUBITS} qubits")
        if self.rho.shape != (2**self.n, 2**self.n):
            raise ParameterError(f"density matrix shape {self.rho.shape} does not match {self.n} qubits")

    def check(self, atol: float = ATOL):
        """Raise if the matrix is not a valid density matrix."""
        rho = self.rho
        if np.abs(rho - rho.conj().T).max() > atol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1) > atol:
            raise ValueError("density matrix does not have unit trace")
        if np.linalg.eigvalsh(rho).min() < -atol:
            raise ValueError("density matrix is not positive semidefinite")
        return self


def zero_state(n: int) -> DenseState:
    rho = np.zeros((2**n, 2**n), dtype=complex)
    rho[0, 0] = 1
    return DenseState(rho, n)


def tensor(*states: DenseState) -> DenseState:
    rho = np.ones((1, 1), dtype=complex)
    for s in states:
        rho = np.kron(rho, s.rho)
    return DenseState(rho, sum(s.n for s in states))


def _bell_ket(xz: int) -> np.ndarray:
    phi = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    return np.kron(I2, PAULIS[xz]) @ phi


def _ghz_ket(a: int, b: int, c: int) -> np.ndarray:
    ghz = np.zeros(8, dtype=complex)
    ghz[0] = ghz[7] = 1 / np.sqrt(2)
    op = np.kron(np.kron(np.linalg.matrix_power(Z, c), np.linalg.matrix_power(X, a)), np.linalg.matrix_power(X, b))
    return op @ ghz


def bell_diagonal_dm(s: BellDiagonalState) -> DenseState:
    rho = sum(q * np.outer(_bell_ket(i), _bell_ket(i).conj()) for i, q in enumerate(s.coeffs))
    return DenseState(np.asarray(rho, dtype=complex), 2)


def ghz_diagonal_dm(s: GHZDiagonalState) -> DenseState:
    rho = np.zeros((8, 8), dtype=complex)
    for a, b, c in itertools.product(range(2), repeat=3):
        ket = _ghz_ket(a, b, c)
        rho += s[a, b, c] * np.outer(ket, ket.conj())
    return DenseState(rho, 3)


def _apply(rho: np.ndarray, U: np.ndarray, qubits, n: int) -> np.ndarray:
    k = len(qubits)
    Ut = U.reshape((2,) * (2 * k))
    t = rho.reshape((2,) * (2 * n))
    t = np.tensordot(Ut, t, axes=(list(range(k, 2 * k)), list(qubits)))
    t = np.moveaxis(t, list(range(k)), list(qubits))
    t = np.tensordot(t, Ut.conj(), axes=([n + q for q in qubits], list(range(k, 2 * k))))
    t = np.moveaxis(t, list(range(2 * n - k, 2 * n)), [n + q for q in qubits])
    return t.reshape(2**n, 2**n)


def apply_gate(st: DenseState, gate, qubits) -> DenseState:
    """rho -> U rho U^dagger; ``gate`` is a name from GATES or a unitary matrix."""
    qubits = tuple(qubits)
    U = GATES[gate] if isinstance(gate, str) else np.asarray(gate, dtype=complex)
    if U.shape != (2 ** len(qubits),) * 2:
        raise ParameterError(f"gate acts on {int(np.log2(U.shape[0]))} qubits, got {len(qubits)}")
    if len(set(qubits)) != len(qubits) or any(not 0 <= q < st.n for q in qubits):
        raise ParameterError(f"qubit indices {qubits} invalid for {st.n} qubits")
    return DenseState(_apply(st.rho, U, qubits, st.n), st.n)


def apply_pauli_channel(st: DenseState, ch: PauliChannel, qubit: int) -> DenseState:
    rho = sum(p * _apply(st.rho, P, (qubit,), st.n) for p, P in zip(ch.probs, PAULIS) if p > 0)
    return DenseState(np.asarray(rho, dtype=complex), st.n)


def apply_depolarizing(st: DenseState, e: float, qubit: int) -> DenseState:
    """rho -> (1 - e) rho + e tr_q(rho) ⊗ I/2 on one qubit."""
    twirled = sum(_apply(st.rho, P, (qubit,), st.n) for P in PAULIS) / 4
    return DenseState((1 - e) * st.rho + e * twirled, st.n)


def apply_local_pair(st: DenseState, U: np.ndarray, qa: int, qb: int) -> DenseState:
    """U on one party's qubit and U* on the other's."""
    st = apply_gate(st, U, (qa,))
    return apply_gate(st, U.conj(), (qb,))


def twirl_pair(st: DenseState, qa: int, qb: int) -> DenseState:
    """Average over U ⊗ U* with U in {1, K, K^2}, K cycling X, Y, Z."""
    acc = np.zeros_like(st.rho)
    U = I2
    for _ in range(3):
        acc += apply_local_pair(st, U, qa, qb).rho
        U = CYCLE @ U
    return DenseState(acc / 3, st.n)


def _reduce(st: DenseState, qubits, weights: dict):
    """sum_o w(o) <o|rho|o> over outcomes o of ``qubits``, other qubits kept."""
    n = st.n
    keep = [q for q in range(n) if q not in qubits]
    t = st.rho.reshape((2,) * (2 * n))
    out = np.zeros((2 ** len(keep),) * 2, dtype=complex)
    for outcome, w in weights.items():
        if w == 0:
            continue
        idx = [slice(None)] * (2 * n)
        for q, o in zip(qubits, outcome):
            idx[q] = o
            idx[n + q] = o
        out += w * t[tuple(idx)].reshape(out.shape)
    return out, len(keep)


def postselect(st: DenseState, qubits, weights: dict):
    """Keep the branch with outcome weights ``weights`` (a POVM element diagonal
    in Z on ``qubits``), trace the measured qubits out and renormalize."""
    rho, n = _reduce(st, tuple(qubits), weights)
    p = float(np.real(np.trace(rho)))
    if not p > 1e-300:
        raise AbortError("post-selected branch has zero probability")
    return p, DenseState(rho / p, n)


def flip_weights(outcomes, f: float) -> dict:
    """Noisy-POVM element for reading ``outcomes`` with independent flip rate f."""
    weights = {}
    for actual in itertools.product(range(2), repeat=len(outcomes)):
        w = 1.0
        for a, o in zip(actual, outcomes):
            w *= (1 - f) if a == o else f
        weights[actual] = w
    return weights


def measure_z_postselect(st: DenseState, qubits, outcomes, flip: float = 0.0):
    qubits, outcomes = tuple(qubits), tuple(outcomes)
    if len(qubits) != len(outcomes):
        raise ParameterError("one outcome per measured qubit")
    return postselect(st, qubits, flip_weights(outcomes, flip))


def _check_diagonal(rho: np.ndarray, coeffs, kets):
    recon = sum(c * np.outer(k, k.conj()) for c, k in zip(coeffs, kets))
    if np.abs(rho - recon).max() > 1e-9:
        warnings.warn("state has off-diagonal weight in the Bell/GHZ basis", stacklevel=3)


def bell_coefficients(st: DenseState) -> BellDiagonalState:
    if st.n != 2:
        raise ParameterError("Bell coefficients need a two-qubit state")
    kets = [_bell_ket(i) for i in range(4)]
    coeffs = [float(np.real(k.conj() @ st.rho @ k)) for k in kets]
    _check_diagonal(st.rho, coeffs, kets)
    return BellDiagonalState(coeffs)


def ghz_coefficients(st: DenseState) -> GHZDiagonalState:
    if st.n != 3:
        raise ParameterError("GHZ coefficients need a three-qubit state")
    kets = [_ghz_ket(a, b, c) for a, b, c in itertools.product(range(2), repeat=3)]
    coeffs = [float(np.real(k.conj() @ st.rho @ k)) for k in kets]
    _check_diagonal(st.rho, coeffs, kets)
    return GHZDiagonalState(coeffs)


# full protocol runs

def simulate_caepp(state: BellDiagonalState, code: StabilizerCode, channel: PauliChannel,
                   pre_process: bool = True, e: float = 0.0, f: float = 0.0):
    """One CAEPP round: qubit 0 = Alice's half, 1 = Bob's half, 2.. = carriers.

    Returns (success probability, output Bell-diagonal state).
    """
    m = code.m
    carriers = list(range(2, m + 2))
    dm = tensor(bell_diagonal_dm(state), zero_state(m))
    if pre_process:
        dm = apply_gate(dm, "RX+", (0,))
        dm = apply_gate(dm, "RX-", (1,))
    circ = encoding_circuit(code)
    alice = [0] + carriers
    bob = [1] + carriers
    for g in circ.gates:
        dm = apply_gate(dm, g.name, [alice[q] for q in g.qubits])
    for c in carriers:
        if pre_process:
            dm = apply_gate(dm, "RX-", (c,))
        dm = apply_pauli_channel(dm, channel, c)
        if pre_process:
            dm = apply_gate(dm, "RX+", (c,))
    if e > 0:
        dm = apply_depolarizing(dm, e, 0)
        dm = apply_depolarizing(dm, e, 1)
    for g in reversed(circ.gates):
        dm = apply_gate(dm, g.name, [bob[q] for q in g.qubits])
    p, out = measure_z_postselect(dm, carriers, [0] * m, flip=f)
    return p, bell_coefficients(out)


def simulate_twepp(a: BellDiagonalState, b: BellDiagonalState, variant: str = "none",
                   e: float = 0.0, f: float = 0.0):
    """Two-pair TWEPP: qubits (A0, B0, A1, B1); keep pair 0 when readouts agree."""
    dm = tensor(bell_diagonal_dm(a), bell_diagonal_dm(b))
    for qa, qb in ((0, 1), (2, 3)):
        if variant == "dejmps":
            dm = apply_gate(dm, "RX+", (qa,))
            dm = apply_gate(dm, "RX-", (qb,))
        elif variant == "bbpssw":
            dm = twirl_pair(dm, qa, qb)
    if e > 0:
        for q in range(4):
            dm = apply_depolarizing(dm, e, q)
    dm = apply_gate(dm, "CNOT", (0, 2))
    dm = apply_gate(dm, "CNOT", (1, 3))
    weights = {}
    for oa, ob in itertools.product(range(2), repeat=2):
        # probability that the two noisy readouts agree given true outcomes oa, ob
        agree = sum(flip_weights((r, r), f)[(oa, ob)] for r in range(2))
        weights[(oa, ob)] = agree
    p, out = postselect(dm, (2, 3), weights)
    return p, bell_coefficients(out)


def simulate_ghz(r: GHZDiagonalState, ch_AB: PauliChannel, ch_AC: PauliChannel):
    """Tripartite round: qubits (A, B, C, carrier to B, carrier to C)."""
    dm = tensor(ghz_diagonal_dm(r), zero_state(2))
    dm = apply_gate(dm, "CNOT", (0, 3))
    dm = apply_gate(dm, "CNOT", (0, 4))
    dm = apply_pauli_channel(dm, ch_AB, 3)
    dm = apply_pauli_channel(dm, ch_AC, 4)
    dm = apply_gate(dm, "CNOT", (1, 3))
    dm = apply_gate(dm, "CNOT", (2, 4))
    p, out = measure_z_postselect(dm, (3, 4), (0, 0))
    return p, ghz_coefficients(out)


# grid comparison against the fast engines

@dataclass(frozen=True)
class OracleCase:
    name: str
    max_deviation: float

    def passed(self, atol: float = ATOL) -> bool:
        return self.max_deviation <= atol


def _deviation(fast, p_dense, dense_state) -> float:
    return max(abs(fast.p_succ - p_dense), float(np.abs(fast.out_state.array - dense_state.array).max()))


def _families(p: float, rng) -> dict:
    from .states import ChannelFamily, make_channel
    return {
        "depolarizing": make_channel(ChannelFamily("depolarizing", p)),
        "biased": make_channel(ChannelFamily("biased", p)),
        "flip": make_channel(ChannelFamily("flip", p, gamma=0.7, delta=0.3)),
        "custom": PauliChannel(rng.dirichlet(np.ones(4))),
    }


def _grid_point(args) -> list:
    from . import rounds
    from .ghz import ghz_init, ghz_round
    from .pauli import single_code, star_code, three_carrier_code

    i, p, seed = args
    rng = np.random.default_rng([seed, i])
    codes = {"single": single_code(), "star2": star_code(2), "three": three_carrier_code()}
    state = BellDiagonalState(rng.dirichlet(np.ones(4)))
    cases = []
    for fam, ch in _families(p, rng).items():
        for cname, code in codes.items():
            for pre in (True, False):
                cfg = rounds.RoundConfig(code, ch, pre_process=pre)
                dev = _deviation(rounds.caepp_round(state, cfg), *simulate_caepp(state, code, ch, pre))
                cases.append((f"caepp/{cname}/{fam}/pre={int(pre)}", dev))

    partner = BellDiagonalState(rng.dirichlet(np.ones(4)))
    for variant in rounds.TWEPP_VARIANTS:
        dev = _deviation(rounds.twepp_round(state, partner, variant), *simulate_twepp(state, partner, variant))
        cases.append((f"twepp/{variant}", dev))

    ch = _families(p, rng)["custom"]
    for e in (0.0, 0.1, 0.2):
        for f in (0.0, 0.1, 0.2):
            cfg = rounds.RoundConfig(single_code(), ch, e=e, f=f)
            dev = _deviation(rounds.noisy_round(state, cfg), *simulate_caepp(state, single_code(), ch, True, e, f))
            cases.append(("noisy/caepp", dev))
            cfg = rounds.RoundConfig(single_code(), ch, e=e, f=f, protocol="twepp", twepp_variant="dejmps")
            dev = _deviation(rounds.noisy_round(state, cfg, partner),
                             *simulate_twepp(state, partner, "dejmps", e, f))
            cases.append(("noisy/twepp", dev))

    r = GHZDiagonalState(rng.dirichlet(np.ones(8)))
    ab, ac = PauliChannel(rng.dirichlet(np.ones(4))), _families(p, rng)["depolarizing"]
    cases.append(("ghz", _deviation(ghz_round(r, ghz_init(ab, ac)), *simulate_ghz(r, ab, ac))))
    return cases


def oracle_check(grid: int = 20, seed: int = 2024, workers=None) -> list:
    """Max deviation between dense simulation and the engines, per case family.

    ``grid`` points p00 are spread over [0.5, 1); each point also draws a
    random input state and custom channel from a seeded generator.
    """
    from ._parallel import parallel_map

    if grid < 1:
        raise ParameterError("grid must be at least 1")
    points = [(i, 0.5 + 0.5 * i / grid, seed) for i in range(grid)]
    worst: dict = {}
    for cases in parallel_map(_grid_point, points, workers):
        for name, dev in cases:
            worst[name] = max(worst.get(name, 0.0), dev)
    return [OracleCase(name, dev) for name, dev in worst.items()]
