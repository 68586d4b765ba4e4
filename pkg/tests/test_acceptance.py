"""Acceptance criteria 1-10, one test each; every test records a PASS/FAIL line
(printed in the pytest terminal summary, or directly when run as a script)."""

import itertools
import time

import numpy as np
import pytest

from caepp import states as st
from caepp.dynamics import fixed_point, run_trajectory, sweep_m
from caepp.ghz import ghz_init, ghz_round
from caepp.oracle import oracle_check
from caepp.pauli import star_code
from caepp.rounds import (CaeppMap, RoundConfig, StarMap, abc_coefficients, caepp_round,
                          caepp_round_closed_single, noisy_round, star_closed_form, twepp_round)

RESULTS = {}


def report(n, ok, detail):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def cfg(ch, m=1, **kw):
    return RoundConfig(star_code(m), ch, **kw)


def test_criterion_01_depolarizing_trajectory():
    t0 = time.perf_counter()
    ch = st.depolarizing(0.75)
    traj = run_trajectory(st.choi_state(ch), CaeppMap(cfg(ch)), 2)
    f1, f2 = traj.fidelities
    fstar = fixed_point(CaeppMap(cfg(ch)), st.choi_state(ch)).F_star
    dt = time.perf_counter() - t0
    ok = abs(f1 - 0.788) <= 5e-4 and abs(f2 - 0.841) <= 5e-4 and abs(fstar - 0.863) <= 2e-3 and dt < 1
    report(1, ok, f"F1={f1:.6f} F2={f2:.6f} F*={fstar:.6f} in {dt:.3f}s")


def test_criterion_02_flip_channel_closed_form():
    worst = 0.0
    for p in np.arange(0.55, 0.951, 0.05):
        ch = st.PauliChannel((p, 0.0, 1 - p, 0.0))
        traj = run_trajectory(st.choi_state(ch), CaeppMap(cfg(ch)), 20)
        for n, f in enumerate(traj.fidelities, start=1):
            worst = max(worst, abs(f - p ** (n + 1) / (p ** (n + 1) + (1 - p) ** (n + 1))))
    ch = st.PauliChannel((0.75, 0, 0.25, 0))
    f8 = run_trajectory(st.choi_state(ch), CaeppMap(cfg(ch)), 8).fidelities[-1]
    report(2, worst <= 1e-12 and f8 >= 0.9999, f"max |F_n - closed form| = {worst:.2e}, F_8(0.75) = {f8:.6f}")


def test_criterion_03_noiseless_two_rounds():
    rng = np.random.default_rng(3)
    inputs = [st.BellDiagonalState((0.25,) * 4), st.BellDiagonalState((0.5, 0.5, 0, 0)),
              st.BellDiagonalState((0.4, 0.0, 0.2, 0.4))]
    while len(inputs) < 200:
        q = rng.dirichlet(np.ones(4))
        if q[0] == q.max():
            inputs.append(st.BellDiagonalState(q))
    fn = CaeppMap(cfg(st.IDENTITY_CHANNEL))
    fids = [run_trajectory(s, fn, 2).fidelities[-1] for s in inputs]
    report(3, all(f == 1.0 for f in fids), f"{len(inputs)} inputs, min F_2 = {min(fids)!r}")


def test_criterion_04_two_carrier_fixed_point():
    t0 = time.perf_counter()
    ch = st.depolarizing(0.75)
    fstar = fixed_point(CaeppMap(cfg(ch, 2)), st.choi_state(ch)).F_star
    dt = time.perf_counter() - t0
    report(4, fstar > 0.95 and dt < 1, f"F*(star m=2, 0.75) = {fstar:.6f} in {dt:.3f}s")


def test_criterion_05_closed_form_and_bounds():
    dev, bounds_ok = 0.0, True
    rng = np.random.default_rng(5)
    for m, p in itertools.product([1, 2, 3, 4], [0.55, 0.65, 0.75, 0.85, 0.95]):
        for s in (st.isotropic(p), st.BellDiagonalState(rng.dirichlet(np.ones(4)))):
            a = caepp_round(s, cfg(st.depolarizing(p), m))
            b = star_closed_form(s, p, m)
            dev = max(dev, abs(a.p_succ - b.p_succ), np.abs(a.out_state.array - b.out_state.array).max())
        q = fixed_point(CaeppMap(cfg(st.depolarizing(p), m)), st.isotropic(p)).q_star.coeffs
        _, _, B, C = abc_coefficients(p, m)
        bounds_ok &= q[1] + q[2] <= B / (2 * C) and q[3] <= B / C and 1 - q[0] <= 1.5 * B / C
    report(5, dev <= 1e-12 and bounds_ok, f"max deviation {dev:.2e}, fixed-point bounds hold: {bounds_ok}")


def test_criterion_06_convergence_in_m():
    t0 = time.perf_counter()
    ok, details = True, []
    for p in [0.53, 0.55, 0.60, 0.65, 0.70]:
        rows = sweep_m(p, range(1, 41))
        fs = [r.F_star for r in rows]
        mono = all(b >= a for a, b in zip(fs, fs[1:]))
        last = rows[-1]
        ok &= mono and last.infidelity <= last.bound
        details.append(f"{p}:{last.infidelity:.2e}<={last.bound:.2e}")
    dt = time.perf_counter() - t0
    ok &= dt < 5 and sweep_m(0.53, [40])[0].infidelity <= 1.5e-3
    report(6, ok, f"monotone, 1-F*(m=40) vs bound {' '.join(details)} in {dt:.2f}s")


def test_criterion_07_caepp_twepp_equivalence():
    rng = np.random.default_rng(7)
    exact, dev = True, 0.0
    for _ in range(200):
        s = st.BellDiagonalState(rng.dirichlet(np.ones(4)))
        ch = st.PauliChannel(rng.dirichlet(np.ones(4)))
        closed = caepp_round_closed_single(s, ch, pre_process=False)
        exact &= closed == twepp_round(s, st.choi_state(ch), "none")
        enum = caepp_round(s, cfg(ch, pre_process=False))
        dev = max(dev, abs(enum.p_succ - closed.p_succ), np.abs(enum.out_state.array - closed.out_state.array).max())
    report(7, exact and dev <= 1e-12, f"200 inputs, closed == TWEPP exactly: {exact}, vs enumeration {dev:.2e}")


def test_criterion_08_dense_oracle():
    t0 = time.perf_counter()
    cases = oracle_check(20)
    dt = time.perf_counter() - t0
    worst = max(c.max_deviation for c in cases)
    kinds = sorted({c.name.split("/")[0] for c in cases})
    ok = worst <= 1e-10 and dt < 30 and kinds == ["caepp", "ghz", "noisy", "twepp"]
    report(8, ok, f"{len(cases)} case families on a 20-point grid, max deviation {worst:.2e} in {dt:.2f}s")


def test_criterion_09_noise_ordering():
    grid = np.linspace(0, 0.2, 21)
    ok = True
    for F in [0.6, 0.7, 0.8, 0.9]:
        ch, s = st.depolarizing(F), st.isotropic(F)
        for knob in ("e", "f"):
            ca = [noisy_round(s, cfg(ch, **{knob: x})).fidelity for x in grid]
            tw = [noisy_round(s, cfg(ch, protocol="twepp", **{knob: x})).fidelity for x in grid]
            ok &= all(a >= b for a, b in zip(ca, tw))
            ok &= all(y <= x for seq in (ca, tw) for x, y in zip(seq, seq[1:]))
        clean = caepp_round_closed_single(s, ch, pre_process=False)
        ok &= noisy_round(s, cfg(ch)) == clean
        ok &= noisy_round(s, cfg(ch, protocol="twepp")) == twepp_round(s, s, "none") == clean
    report(9, ok, "CAEPP >= TWEPP and both non-increasing on 21-point e and f grids over [0, 0.2]")


def test_criterion_10_ghz_round():
    rng = np.random.default_rng(10)
    dev = 0.0
    for _ in range(200):
        r = st.GHZDiagonalState(rng.dirichlet(np.ones(8)))
        s = ghz_init(st.PauliChannel(rng.dirichlet(np.ones(4))), st.PauliChannel(rng.dirichlet(np.ones(4))))
        out = np.zeros((2, 2, 2))
        for a, b, c, k in itertools.product(range(2), repeat=4):
            out[a, b, c] += r[a, b, k] * s[a, b, k ^ c]
        res = ghz_round(r, s)
        dev = max(dev, abs(res.p_succ - out.sum()), np.abs(res.out_state.array - out.reshape(-1) / out.sum()).max())
        clean = ghz_round(r, ghz_init(st.IDENTITY_CHANNEL, st.IDENTITY_CHANNEL)).fidelity
        dev = max(dev, abs(clean - r[0, 0, 0] / (r[0, 0, 0] + r[0, 0, 1])))
    report(10, dev <= 1e-12, f"200 inputs against the quadruple loop, max deviation {dev:.2e}")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
