"""
Single purification rounds.

The enumeration engine sums over every error string on the shared qubit and
the m carriers; the closed forms (single carrier, star code over a
depolarizing channel, two-pair TWEPP) are checked against it in the tests.
All output states are reported in the standard Bell basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from . import states as st
from .errors import AbortError, EnumerationSizeError, ParameterError
from .pauli import StabilizerCode, decode_table, star_code
from .states import BellDiagonalState, PauliChannel

MAX_ENUM_CARRIERS = 10

PROTOCOLS = ("caepp", "twepp")
TWEPP_VARIANTS = ("none", "bbpssw", "dejmps")

_SWAP = np.array([0, 3, 2, 1])


@dataclass(frozen=True)
class RoundOutcome:
    p_succ: float
    out_state: BellDiagonalState

    @property
    def fidelity(self) -> float:
        return self.out_state.coeffs[0]


@dataclass(frozen=True)
class RoundConfig:
    code: StabilizerCode
    channel: PauliChannel
    pre_process: bool = True
    e: float = 0.0  # memory depolarizing rate per stored qubit
    f: float = 0.0  # measurement flip rate
    protocol: str = "caepp"
    twepp_variant: str = "none"

    def __post_init__(self):
        for name in ("e", "f"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ParameterError(f"{name} must lie in [0, 1], got {v!r}")
        if self.protocol not in PROTOCOLS:
            raise ParameterError(f"protocol must be one of {PROTOCOLS}")
        if self.twepp_variant not in TWEPP_VARIANTS:
            raise ParameterError(f"TWEPP variant must be one of {TWEPP_VARIANTS}")

    @property
    def m(self) -> int:
        return self.code.m

    @property
    def noisy(self) -> bool:
        return self.e > 0 or self.f > 0


def _finish(unnormalized) -> RoundOutcome:
    unnormalized = np.asarray(unnormalized, dtype=np.float64)
    p = math.fsum(unnormalized)
    if not p > 0.0:
        raise AbortError("protocol cannot succeed: success probability is zero")
    return RoundOutcome(min(p, 1.0), BellDiagonalState(unnormalized / p))


def _xor_matrix(dist) -> np.ndarray:
    """K with (K @ a) = distribution of (error a) * (error drawn from dist)."""
    idx = np.arange(4)
    return np.asarray(dist, dtype=np.float64)[idx[:, None] ^ idx[None, :]]


def _flip_weights(syndrome: np.ndarray, m: int, f: float) -> np.ndarray:
    """Probability that noisy readout of each syndrome shows all zeros."""
    ones = np.zeros(syndrome.shape, dtype=np.int64)
    for k in range(m):
        ones += (syndrome >> k) & 1
    return (f**ones) * ((1.0 - f) ** (m - ones))


def _check_enumerable(m: int):
    if m > MAX_ENUM_CARRIERS:
        raise EnumerationSizeError(
            f"exact enumeration supports at most {MAX_ENUM_CARRIERS} carriers (got {m}); "
            "use star_closed_form for larger star codes over depolarizing channels"
        )


def _enumerate(qvec: np.ndarray, cvec: np.ndarray, code: StabilizerCode, f: float = 0.0) -> np.ndarray:
    """Unnormalized output coefficients summed over all accepted error strings."""
    table = decode_table(code)
    w = qvec
    for _ in range(code.m):
        w = np.multiply.outer(w, cvec)
    w = w.reshape(-1)
    if f == 0.0:
        acc = table.accepted
        return np.bincount(table.residual[acc], weights=w[acc], minlength=4)
    w = w * _flip_weights(table.syndrome, code.m, f)
    return np.bincount(table.residual, weights=w, minlength=4)


def _caepp_unnormalized(qvec: np.ndarray, cfg: RoundConfig) -> np.ndarray:
    cvec = cfg.channel.array
    if cfg.pre_process:
        qvec, cvec = qvec[_SWAP], cvec[_SWAP]
    if cfg.e > 0:
        # receiver's stored half is hit before decoding and so feeds the parity check;
        # sender's half only multiplies the output
        mem = _xor_matrix(st.memory_noise(cfg.e).probs)
        return mem @ _enumerate(mem @ qvec, cvec, cfg.code, cfg.f)
    return _enumerate(qvec, cvec, cfg.code, cfg.f)


def caepp_round(state: BellDiagonalState, cfg: RoundConfig) -> RoundOutcome:
    """One CAEPP round with noiseless local operations, by exact enumeration."""
    if cfg.noisy:
        raise ParameterError("caepp_round models ideal operations; use noisy_round for e, f > 0")
    if cfg.protocol != "caepp":
        raise ParameterError("caepp_round needs protocol='caepp'")
    _check_enumerable(cfg.m)
    return _finish(_caepp_unnormalized(state.array, cfg))


def caepp_transfer(cfg: RoundConfig) -> np.ndarray:
    """Matrix T with unnormalized round output = T @ q (noise included)."""
    if cfg.protocol != "caepp":
        raise ParameterError("transfer matrix is defined for CAEPP rounds")
    _check_enumerable(cfg.m)
    return np.column_stack([_caepp_unnormalized(col, cfg) for col in np.eye(4)])


def _single_carrier_update(r, c) -> np.ndarray:
    return np.array([
        r[0] * c[0] + r[1] * c[1],
        r[0] * c[1] + r[1] * c[0],
        r[2] * c[2] + r[3] * c[3],
        r[2] * c[3] + r[3] * c[2],
    ])


def caepp_round_closed_single(state: BellDiagonalState, ch: PauliChannel, pre_process: bool = True) -> RoundOutcome:
    r, c = state.coeffs, ch.probs
    if pre_process:
        r = st.preprocess_swap(state).coeffs
        c = st.channel_encdec_swap(ch).probs
    return _finish(_single_carrier_update(r, c))


def abc_coefficients(p00: float, m: int):
    """(alpha, A, B, C) of the star code over a depolarizing channel."""
    if m < 1:
        raise ParameterError("m must be at least 1")
    alpha = (4 * p00 - 1) / 3
    return alpha, ((1 + alpha) / 2) ** m, ((1 - alpha) / 2) ** m, alpha**m


def star_closed_form(state: BellDiagonalState, p00: float, m: int) -> RoundOutcome:
    """Star-code round over a depolarizing channel, pre-processing included."""
    if not 0.0 <= p00 <= 1.0:
        raise ParameterError(f"p00 must lie in [0, 1], got {p00!r}")
    _, A, B, C = abc_coefficients(p00, m)
    q00, q01, q10, q11 = state.coeffs
    z = A + B + C * (q00 + q11 - q01 - q10)
    if not z > 0.0:
        raise AbortError("protocol cannot succeed: success probability is zero")
    out = BellDiagonalState((
        ((A + C) * q00 + B * q11) / z,
        ((A + C) * q11 + B * q00) / z,
        ((A - C) * q10 + B * q01) / z,
        ((A - C) * q01 + B * q10) / z,
    ))
    return RoundOutcome(z / 2, out)


def star_transfer(p00, m: int, ctx=mpmath.mp):
    """Star-code transfer matrix evaluated in the arithmetic of ``ctx``.

    Rows are scaled by 1/2 so that the column sums give the success probability.
    """
    p = ctx.mpf(p00)
    alpha = (4 * p - 1) / 3
    A, B, C = ((1 + alpha) / 2) ** m, ((1 - alpha) / 2) ** m, alpha**m
    half = ctx.mpf(1) / 2
    rows = [
        [A + C, 0, 0, B],
        [B, 0, 0, A + C],
        [0, B, A - C, 0],
        [0, A - C, B, 0],
    ]
    return [[half * ctx.mpf(v) for v in row] for row in rows]


def _apply_variant(s: BellDiagonalState, variant: str) -> BellDiagonalState:
    if variant == "bbpssw":
        return st.twirl_isotropic(s)
    if variant == "dejmps":
        return st.preprocess_swap(s)
    return s


def twepp_round(a: BellDiagonalState, b: BellDiagonalState, variant: str = "none") -> RoundOutcome:
    """Two-pair TWEPP (bilateral CNOT, keep on equal outcomes)."""
    if variant not in TWEPP_VARIANTS:
        raise ParameterError(f"TWEPP variant must be one of {TWEPP_VARIANTS}")
    a = _apply_variant(a, variant).coeffs
    b = _apply_variant(b, variant).coeffs
    n = [
        a[0] * b[0] + a[1] * b[1],
        a[0] * b[1] + a[1] * b[0],
        a[2] * b[2] + a[3] * b[3],
        a[2] * b[3] + a[3] * b[2],
    ]
    return _finish(n)


def _twepp_noisy_unnormalized(a, b, e: float, f: float) -> np.ndarray:
    if e > 0:
        # both halves of both pairs sit in memory until the bilateral CNOT
        mem = _xor_matrix(st.memory_noise(e).probs)
        a = mem @ (mem @ a)
        b = mem @ (mem @ b)
    # two independent readout flips only matter through their parity
    g = 2 * f * (1 - f)
    out = np.zeros(4)
    for i in range(4):
        for j in range(4):
            keep = (1.0 - g) if (i >> 1) == (j >> 1) else g
            out[(i & 2) | ((i ^ j) & 1)] += a[i] * b[j] * keep
    return out


def noisy_round(state: BellDiagonalState, cfg: RoundConfig, partner: BellDiagonalState | None = None) -> RoundOutcome:
    """Round with depolarizing memories (rate e) and flipped readouts (rate f).

    CAEPP stores the two halves of the shared pair and reads one syndrome bit
    per carrier. TWEPP (single target pair, m = 1) stores four qubits and both
    parties read out; ``partner`` is the sacrificed pair and defaults to a
    copy of ``state``.
    """
    if cfg.protocol == "caepp":
        _check_enumerable(cfg.m)
        return _finish(_caepp_unnormalized(state.array, cfg))
    if cfg.m != 1:
        raise ParameterError("noisy TWEPP is modelled for two pairs (m = 1) only")
    a = _apply_variant(state, cfg.twepp_variant).array
    b = _apply_variant(partner if partner is not None else state, cfg.twepp_variant).array
    return _finish(_twepp_noisy_unnormalized(a, b, cfg.e, cfg.f))


class CaeppMap:
    """Round map state -> RoundOutcome for a fixed CAEPP configuration."""

    def __init__(self, cfg: RoundConfig):
        if cfg.protocol != "caepp":
            raise ParameterError("CaeppMap needs protocol='caepp'")
        _check_enumerable(cfg.m)
        self.cfg = cfg

    def __call__(self, state: BellDiagonalState) -> RoundOutcome:
        if self.cfg.noisy:
            return noisy_round(state, self.cfg)
        return caepp_round(state, self.cfg)

    def transfer_matrix(self, ctx=None) -> np.ndarray:
        return caepp_transfer(self.cfg)

    def bound(self):
        cfg = self.cfg
        p = cfg.channel.p00
        depol = np.allclose(cfg.channel.probs, st.depolarizing(p).probs, atol=1e-15)
        if not (depol and cfg.pre_process and not cfg.noisy and cfg.code.family in ("single", "star", "three_carrier")):
            return None
        return star_bound(p, cfg.m)


class StarMap:
    """Closed-form star-code round over a depolarizing channel (any m)."""

    def __init__(self, p00: float, m: int):
        if m < 1:
            raise ParameterError("m must be at least 1")
        if not 0.0 <= p00 <= 1.0:
            raise ParameterError(f"p00 must lie in [0, 1], got {p00!r}")
        self.p00, self.m = p00, m

    def __call__(self, state: BellDiagonalState) -> RoundOutcome:
        return star_closed_form(state, self.p00, self.m)

    def transfer_matrix(self, ctx=mpmath.mp):
        return star_transfer(self.p00, self.m, ctx)

    def bound(self):
        return star_bound(self.p00, self.m)

    def enumeration_map(self) -> CaeppMap:
        return CaeppMap(RoundConfig(star_code(self.m), st.depolarizing(self.p00)))


def star_bound(p00: float, m: int):
    """3B/(2C), the bound on 1 - F* for the star code; None when C <= 0."""
    _, _, B, C = abc_coefficients(p00, m)
    if not C > 0:
        return None
    return 1.5 * B / C


class TweppMap:
    """TWEPP round map; each round consumes two copies of the current state
    unless a fixed ``partner`` pair is given."""

    def __init__(self, variant: str = "none", e: float = 0.0, f: float = 0.0, partner: BellDiagonalState | None = None):
        if variant not in TWEPP_VARIANTS:
            raise ParameterError(f"TWEPP variant must be one of {TWEPP_VARIANTS}")
        self.variant, self.e, self.f, self.partner = variant, e, f, partner

    def __call__(self, state: BellDiagonalState) -> RoundOutcome:
        partner = self.partner if self.partner is not None else state
        if self.e == 0 and self.f == 0:
            return twepp_round(state, partner, self.variant)
        cfg = RoundConfig(star_code(1), st.channel_of(partner), e=self.e, f=self.f,
                          protocol="twepp", twepp_variant=self.variant)
        return noisy_round(state, cfg, partner)
