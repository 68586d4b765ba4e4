"""
Pauli strings, stabilizer codes and Pauli-frame propagation through {H, CNOT} circuits.

Qubit 0 is the kept half of the shared pair, qubits 1..m are carriers.
Phases are not tracked: only the (x, z) bit pattern of a Pauli matters for
diagonal-mixture coefficients.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional

import numpy as np

from .errors import ParameterError, UnsupportedCodeError

MAX_TABLE_QUBITS = 11


@dataclass(frozen=True)
class PauliString:
    x: tuple
    z: tuple

    def __post_init__(self):
        x = tuple(int(b) & 1 for b in self.x)
        z = tuple(int(b) & 1 for b in self.z)
        if len(x) != len(z) or len(x) < 1:
            raise ParameterError("x and z bit-vectors must have the same nonzero length")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)

    @property
    def n(self) -> int:
        return len(self.x)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls((0,) * n, (0,) * n)

    @classmethod
    def from_ops(cls, n: int, ops: dict) -> "PauliString":
        """Build from ``{qubit: 'X'|'Y'|'Z'|'I'}``."""
        x, z = [0] * n, [0] * n
        for q, op in ops.items():
            if not 0 <= q < n:
                raise ParameterError(f"qubit {q} out of range for width {n}")
            op = op.upper()
            if op not in "IXYZ":
                raise ParameterError(f"unknown Pauli {op!r}")
            x[q] = int(op in "XY")
            z[q] = int(op in "ZY")
        return cls(tuple(x), tuple(z))

    def __mul__(self, other: "PauliString") -> "PauliString":
        _check_width(self, other.n)
        return PauliString(
            tuple(a ^ b for a, b in zip(self.x, other.x)),
            tuple(a ^ b for a, b in zip(self.z, other.z)),
        )

    def label(self) -> str:
        names = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
        parts = [f"{names[xz]}{k}" for k, xz in enumerate(zip(self.x, self.z)) if xz != (0, 0)]
        return " ".join(parts) if parts else "I"

    def __str__(self):
        return self.label()


def _check_width(p: PauliString, n: int):
    if p.n != n:
        raise ParameterError(f"width mismatch: Pauli string has {p.n} qubits, expected {n}")


_FACTOR = re.compile(r"^([IXYZ])(\d+)$", re.IGNORECASE)


def parse_pauli(text: str, n: Optional[int] = None) -> PauliString:
    """Parse ``"X1 X2"`` / ``"Z0 Z1 Z2"`` (0-based qubit indices).

    Without ``n`` the width is one more than the largest index mentioned.
    """
    ops = {}
    for tok in text.split():
        m = _FACTOR.match(tok)
        if not m:
            raise ParameterError(f"cannot parse Pauli factor {tok!r}")
        q = int(m.group(2))
        if q in ops:
            raise ParameterError(f"qubit {q} appears twice in {text!r}")
        ops[q] = m.group(1).upper()
    if not ops:
        raise ParameterError("empty Pauli string")
    width = n if n is not None else max(ops) + 1
    return PauliString.from_ops(width, ops)


def commutes(p: PauliString, q: PauliString) -> bool:
    _check_width(p, q.n)
    s = sum(a & d for a, d in zip(p.x, q.z)) + sum(b & c for b, c in zip(p.z, q.x))
    return s % 2 == 0


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple

    def __post_init__(self):
        if self.name not in ("H", "CNOT"):
            raise ParameterError(f"unsupported gate {self.name!r}")
        want = 1 if self.name == "H" else 2
        if len(self.qubits) != want:
            raise ParameterError(f"{self.name} takes {want} qubit(s)")
        if self.name == "CNOT" and self.qubits[0] == self.qubits[1]:
            raise ParameterError("CNOT control and target must differ")

    def __str__(self):
        return f"{self.name}({','.join(map(str, self.qubits))})"


def H(q: int) -> Gate:
    return Gate("H", (q,))


def CNOT(c: int, t: int) -> Gate:
    return Gate("CNOT", (c, t))


@dataclass(frozen=True)
class CliffordCircuit:
    width: int
    gates: tuple

    def __post_init__(self):
        gates = tuple(self.gates)
        for g in gates:
            if any(not 0 <= q < self.width for q in g.qubits):
                raise ParameterError(f"gate {g} acts outside width {self.width}")
        object.__setattr__(self, "gates", gates)

    def __str__(self):
        return " ".join(str(g) for g in self.gates)


def parse_circuit(text: str, width: int) -> CliffordCircuit:
    """Parse ``"H 1; CNOT 1 2; CNOT 0 2"``."""
    gates = []
    for chunk in text.split(";"):
        toks = chunk.replace(",", " ").split()
        if not toks:
            continue
        name = toks[0].upper()
        if name == "CX":
            name = "CNOT"
        try:
            qubits = tuple(int(t) for t in toks[1:])
        except ValueError:
            raise ParameterError(f"cannot parse gate {chunk.strip()!r}") from None
        gates.append(Gate(name, qubits))
    return CliffordCircuit(width, tuple(gates))


def propagate(circ: CliffordCircuit, p: PauliString, reversed: bool = False) -> PauliString:
    """Conjugate ``p`` through the circuit gate by gate.

    ``reversed=True`` walks the gates backwards, i.e. conjugates by the
    inverse circuit (every gate here is self-inverse).
    """
    _check_width(p, circ.width)
    x, z = list(p.x), list(p.z)
    gates = circ.gates[::-1] if reversed else circ.gates
    for g in gates:
        if g.name == "H":
            (q,) = g.qubits
            x[q], z[q] = z[q], x[q]
        else:
            c, t = g.qubits
            x[t] ^= x[c]
            z[c] ^= z[t]
    return PauliString(tuple(x), tuple(z))


FAMILY_TAGS = ("single", "star", "pairwise", "three_carrier", "custom")


@dataclass(frozen=True)
class StabilizerCode:
    """Generators on ``n_qubits`` = m + 1 qubits; generator k pairs with carrier k + 1."""

    n_qubits: int
    generators: tuple
    family: str = "custom"
    circuit: Optional[CliffordCircuit] = None

    def __post_init__(self):
        gens = tuple(self.generators)
        if self.family not in FAMILY_TAGS:
            raise ParameterError(f"unknown code family {self.family!r}")
        if self.n_qubits < 2:
            raise ParameterError("a code needs qubit 0 and at least one carrier")
        if len(gens) > self.n_qubits:
            raise ParameterError("more generators than qubits")
        for g in gens:
            _check_width(g, self.n_qubits)
        for i, a in enumerate(gens):
            for b in gens[i + 1:]:
                if not commutes(a, b):
                    raise ParameterError(f"generators {a} and {b} anticommute")
        object.__setattr__(self, "generators", gens)

    @property
    def m(self) -> int:
        return self.n_qubits - 1

    def __str__(self):
        return "{" + ", ".join(str(g) for g in self.generators) + "}"


def _z(n: int, *qubits: int) -> PauliString:
    return PauliString.from_ops(n, {q: "Z" for q in qubits})


def _xx(n: int, a: int, b: int) -> PauliString:
    return PauliString.from_ops(n, {a: "X", b: "X"})


def star_code(m: int) -> StabilizerCode:
    if m < 1:
        raise ParameterError("star code needs m >= 1 carriers")
    n = m + 1
    gens = [_xx(n, i, m) for i in range(1, m)] + [_z(n, *range(n))]
    return StabilizerCode(n, tuple(gens), "single" if m == 1 else "star")


def single_code() -> StabilizerCode:
    return star_code(1)


def three_carrier_code() -> StabilizerCode:
    code = star_code(3)
    return StabilizerCode(code.n_qubits, code.generators, "three_carrier")


def pairwise_code(blocks: int) -> StabilizerCode:
    if blocks < 1:
        raise ParameterError("pairwise code needs at least one block")
    n = 2 * blocks + 1
    gens = []
    for j in range(1, blocks + 1):
        a, b = 2 * j - 1, 2 * j
        gens += [_xx(n, a, b), _z(n, 0, a, b)]
    return StabilizerCode(n, tuple(gens), "pairwise")


def custom_code(generators: Iterable[PauliString], circuit: CliffordCircuit) -> StabilizerCode:
    """Code with a user-supplied encoding circuit.

    The circuit must map Z_k to the k-th generator and may touch qubit 0
    only as a CNOT control, so that either party's half of the pair can
    stand in for qubit 0.
    """
    gens = tuple(generators)
    if not gens:
        raise ParameterError("custom code needs at least one generator")
    n = gens[0].n
    if len(gens) != n - 1:
        raise UnsupportedCodeError(f"need one generator per carrier: {n - 1} carriers, {len(gens)} generators")
    if circuit.width != n:
        raise ParameterError(f"circuit width {circuit.width} does not match code width {n}")
    for g in circuit.gates:
        if 0 in g.qubits and not (g.name == "CNOT" and g.qubits[0] == 0):
            raise UnsupportedCodeError(f"gate {g} acts on qubit 0 other than as a CNOT control")
    code = StabilizerCode(n, gens, "custom", circuit)
    for k, s in enumerate(gens, start=1):
        if propagate(circuit, _z(n, k)) != s:
            raise UnsupportedCodeError(f"circuit does not map Z{k} to generator {s}")
    return code


def _star_gates(carriers: list, offset_zero: int = 0) -> list:
    *rest, last = carriers
    gates = [H(q) for q in rest] + [CNOT(q, last) for q in rest]
    return gates + [CNOT(offset_zero, last)]


def encoding_circuit(code: StabilizerCode) -> CliffordCircuit:
    n = code.n_qubits
    if code.family == "custom":
        if code.circuit is None:
            raise UnsupportedCodeError("custom code without an encoding circuit")
        return code.circuit
    if code.family in ("single", "star", "three_carrier"):
        return CliffordCircuit(n, tuple(_star_gates(list(range(1, n)))))
    if code.family == "pairwise":
        gates = []
        for j in range(1, (n - 1) // 2 + 1):
            gates += _star_gates([2 * j - 1, 2 * j])
        return CliffordCircuit(n, tuple(gates))
    raise UnsupportedCodeError(f"no encoding circuit for family {code.family!r}")


def detects(code: StabilizerCode, e: PauliString) -> bool:
    _check_width(e, code.n_qubits)
    return any(not commutes(e, s) for s in code.generators)


def decode_classify(code: StabilizerCode, e: PauliString):
    """Push an error through the receiver's decoding circuit.

    Returns ``(syndrome, residual)``: syndrome bit k-1 is the X component left
    on carrier k (nonzero means the carrier reads 1), residual is the (x, z)
    error left on qubit 0.
    """
    _check_width(e, code.n_qubits)
    out = propagate(encoding_circuit(code), e, reversed=True)
    return tuple(out.x[1:]), (out.x[0], out.z[0])


@dataclass(frozen=True)
class DecodeTable:
    """Decoding outcome for every error string of a code.

    String index: qubit k contributes digit ``2*x_k + z_k`` with qubit 0 the
    most significant base-4 digit, matching ``np.multiply.outer`` ordering.
    """

    n_qubits: int
    syndrome: np.ndarray  # int64 bitmask, bit k-1 <-> carrier k
    residual: np.ndarray  # int8 flat (x, z) index on qubit 0

    @property
    def accepted(self) -> np.ndarray:
        return self.syndrome == 0


@lru_cache(maxsize=16)
def decode_table(code: StabilizerCode) -> DecodeTable:
    n = code.n_qubits
    if n > MAX_TABLE_QUBITS:
        raise ParameterError(f"decode table limited to {MAX_TABLE_QUBITS} qubits")
    idx = np.arange(4**n, dtype=np.int64)
    x = np.empty((n, idx.size), dtype=np.uint8)
    z = np.empty_like(x)
    for k in range(n):
        digit = (idx >> (2 * (n - 1 - k))) & 3
        x[k] = digit >> 1
        z[k] = digit & 1
    del idx
    for g in reversed(encoding_circuit(code).gates):
        if g.name == "H":
            (q,) = g.qubits
            x[q], z[q] = z[q].copy(), x[q].copy()
        else:
            c, t = g.qubits
            x[t] ^= x[c]
            z[c] ^= z[t]
    syndrome = np.zeros(x.shape[1], dtype=np.int64)
    for k in range(1, n):
        syndrome |= x[k].astype(np.int64) << (k - 1)
    residual = (2 * x[0] + z[0]).astype(np.int8)
    return DecodeTable(n, syndrome, residual)
