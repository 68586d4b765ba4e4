import numpy as np
import pytest

from caepp import states as st
from caepp.errors import AbortError, ParameterError
from caepp.oracle import (DenseState, apply_gate, apply_pauli_channel, bell_coefficients, bell_diagonal_dm,
                          ghz_coefficients, ghz_diagonal_dm, measure_z_postselect, oracle_check,
                          simulate_caepp, simulate_twepp, tensor, twirl_pair, zero_state)
from caepp.pauli import star_code
from caepp.rounds import RoundConfig, caepp_round, twepp_round

PHI = st.BellDiagonalState((1, 0, 0, 0))


def test_hadamard_twice():
    rho = bell_diagonal_dm(st.BellDiagonalState((0.5, 0.2, 0.2, 0.1)))
    twice = apply_gate(apply_gate(rho, "H", (1,)), "H", (1,))
    np.testing.assert_allclose(twice.rho, rho.rho, atol=1e-12)


def test_rotations_swap_coefficients():
    s = st.BellDiagonalState((0.5, 0.3, 0.15, 0.05))
    rho = apply_gate(apply_gate(bell_diagonal_dm(s), "RX+", (0,)), "RX-", (1,))
    assert bell_coefficients(rho).coeffs == pytest.approx(st.preprocess_swap(s).coeffs, abs=1e-14)


def test_twirl_gives_isotropic():
    s = st.BellDiagonalState((0.5, 0.3, 0.15, 0.05))
    out = bell_coefficients(twirl_pair(bell_diagonal_dm(s), 0, 1))
    assert out.coeffs == pytest.approx(st.twirl_isotropic(s).coeffs, abs=1e-14)


def test_pauli_channels():
    rho = bell_diagonal_dm(PHI)
    np.testing.assert_allclose(apply_pauli_channel(rho, st.IDENTITY_CHANNEL, 1).rho, rho.rho, atol=1e-15)
    full = apply_pauli_channel(rho, st.PauliChannel((0.25,) * 4), 1)
    np.testing.assert_allclose(full.rho, np.eye(4) / 4, atol=1e-15)
    iso = bell_coefficients(apply_pauli_channel(rho, st.depolarizing(0.75), 1))
    assert iso.coeffs == pytest.approx((0.75, 1 / 12, 1 / 12, 1 / 12), abs=1e-15)


def test_noiseless_encode_decode_reads_zero():
    dm = tensor(bell_diagonal_dm(PHI), zero_state(1))
    dm = apply_gate(dm, "CNOT", (0, 2))
    dm = apply_gate(dm, "CNOT", (1, 2))
    p, out = measure_z_postselect(dm, (2,), (0,))
    assert p == pytest.approx(1.0) and bell_coefficients(out).fidelity == pytest.approx(1.0)


def test_single_carrier_branch_probability():
    iso, ch = st.isotropic(0.75), st.depolarizing(0.75)
    p, out = simulate_caepp(iso, star_code(1), ch)
    assert p == pytest.approx(0.722222, abs=1e-6)
    ref = caepp_round(iso, RoundConfig(star_code(1), ch))
    np.testing.assert_allclose(out.array, ref.out_state.array, atol=1e-10)


def test_branches_complete():
    dm = tensor(bell_diagonal_dm(st.isotropic(0.7)), zero_state(1))
    dm = apply_pauli_channel(apply_gate(dm, "H", (2,)), st.depolarizing(0.8), 2)
    p0, _ = measure_z_postselect(dm, (2,), (0,), flip=0.1)
    p1, _ = measure_z_postselect(dm, (2,), (1,), flip=0.1)
    assert p0 + p1 == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(AbortError):
        measure_z_postselect(zero_state(1), (0,), (1,))


def test_coefficient_readout():
    assert bell_coefficients(bell_diagonal_dm(PHI)).coeffs == pytest.approx((1, 0, 0, 0))
    g = st.GHZDiagonalState(np.eye(8)[0])
    assert ghz_coefficients(ghz_diagonal_dm(g)).fidelity == pytest.approx(1.0)
    with pytest.raises(ParameterError):
        bell_coefficients(zero_state(3))
    with pytest.warns(UserWarning):
        bell_coefficients(apply_gate(zero_state(2), "H", (0,)))


def test_dense_state_validation():
    DenseState(np.eye(4) / 4, 2).check()
    with pytest.raises(ValueError):
        DenseState(np.diag([1.5, -0.5]).astype(complex), 1).check()
    with pytest.raises(ParameterError):
        zero_state(7)
    with pytest.raises(ParameterError):
        apply_gate(zero_state(2), "CNOT", (0, 0))
    with pytest.raises(ParameterError):
        apply_gate(zero_state(2), "H", (0, 1))


def test_twepp_dense():
    a, b = st.BellDiagonalState((0.6, 0.2, 0.15, 0.05)), st.BellDiagonalState((0.7, 0.05, 0.2, 0.05))
    for variant in ("none", "dejmps", "bbpssw"):
        p, out = simulate_twepp(a, b, variant)
        ref = twepp_round(a, b, variant)
        assert p == pytest.approx(ref.p_succ, abs=1e-12)
        np.testing.assert_allclose(out.array, ref.out_state.array, atol=1e-12)


def test_oracle_check_small_grid():
    cases = oracle_check(3, workers=1)
    names = {c.name for c in cases}
    assert {"ghz", "noisy/caepp", "noisy/twepp", "twepp/bbpssw"} <= names
    assert all(c.passed() for c in cases)
    with pytest.raises(ParameterError):
        oracle_check(0)
