"""Command-line front end: every subcommand prints one CSV or JSON table on stdout."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings

import numpy as np

from . import states as st
from .dynamics import fixed_point, run_trajectory, sweep_m
from .errors import AbortError, CaeppError, ConvergenceError
from .ghz import ghz_init, ghz_round
from .oracle import ATOL, oracle_check
from .pauli import (custom_code, pairwise_code, parse_circuit, parse_pauli, star_code,
                    three_carrier_code)
from .rounds import (MAX_ENUM_CARRIERS, TWEPP_VARIANTS, CaeppMap, RoundConfig, StarMap, TweppMap,
                     noisy_round)

EXIT_OK, EXIT_DEVIATION, EXIT_USAGE, EXIT_FAILURE = 0, 1, 2, 3


class UsageError(Exception):
    pass


# formatting

def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    return str(v)


def _json_value(v):
    if isinstance(v, (float, np.floating)):
        return float(format(float(v), ".12g"))
    if isinstance(v, np.integer):
        return int(v)
    return v


def render(rows: list, columns: list, fmt: str) -> str:
    if fmt == "json":
        data = [{c: _json_value(r.get(c)) for c in columns} for r in rows]
        return json.dumps(data, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


# argument parsing helpers

def _floats(text: str, n=None, what="value") -> list:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"cannot parse {what} {text!r}") from None
    if n is not None and len(vals) != n:
        raise UsageError(f"{what} needs {n} comma-separated numbers, got {len(vals)}")
    return vals


def _range(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"range must look like START:STOP:COUNT, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"cannot parse range {text!r}") from None
    if n < 1:
        raise UsageError("range needs at least one point")
    return np.linspace(lo, hi, n)


def channel_from_args(tag: str, p00, gamma: float = 1.0) -> st.PauliChannel:
    if tag.startswith("custom:"):
        return st.make_channel(st.ChannelFamily("custom", probs=_floats(tag[7:], 4, "custom channel")))
    if tag not in ("depolarizing", "biased", "flip"):
        raise UsageError(f"unknown channel {tag!r}")
    if p00 is None:
        raise UsageError(f"--channel {tag} needs --p00")
    return st.make_channel(st.ChannelFamily(tag, p00, gamma=gamma, delta=1.0 - gamma))


def parse_channel_arg(text: str) -> st.PauliChannel:
    """'depolarizing:0.75', 'flip:0.8' or 'custom:a,b,c,d'."""
    if text.startswith("custom:"):
        return channel_from_args(text, None)
    tag, _, val = text.partition(":")
    return channel_from_args(tag, _floats(val, 1, "p00")[0] if val else None)


def code_from_args(name: str, m, circuit):
    if name.startswith("custom:"):
        if not circuit:
            raise UsageError("--code custom:... needs --circuit")
        gens = [parse_pauli(g) for g in name[7:].split(",") if g.strip()]
        if not gens:
            raise UsageError("custom code needs at least one generator")
        n = max(g.n for g in gens)
        gens = [parse_pauli(g, n) for g in name[7:].split(",") if g.strip()]
        code = custom_code(gens, parse_circuit(circuit, n))
        if m is not None and m != code.m:
            raise UsageError(f"--m {m} does not match the custom code's {code.m} carriers")
        return code
    if circuit:
        raise UsageError("--circuit only applies to --code custom:...")
    if name == "single":
        if m not in (None, 1):
            raise UsageError("--code single has m = 1")
        return star_code(1)
    if name == "three":
        if m not in (None, 3):
            raise UsageError("--code three has m = 3")
        return three_carrier_code()
    m = 1 if m is None else m
    if m < 1:
        raise UsageError("--m must be at least 1")
    if name == "star":
        return star_code(m)
    if name == "pairwise":
        if m % 2:
            raise UsageError("--code pairwise needs an even --m")
        return pairwise_code(m // 2)
    raise UsageError(f"unknown code {name!r}")


def _is_depolarizing(ch: st.PauliChannel) -> bool:
    return np.allclose(ch.probs, st.depolarizing(ch.p00).probs, atol=1e-15)


def _warn_eb(ch: st.PauliChannel, what: str = "channel"):
    if st.is_entanglement_breaking(ch):
        print(f"warning: {what} is entanglement breaking (max probability <= 1/2)", file=sys.stderr)


def build_round(args):
    """(round map, initial state) for trajectory and fixed-point runs."""
    channel = channel_from_args(args.channel, args.p00, args.gamma)
    _warn_eb(channel)
    state0 = st.BellDiagonalState(_floats(args.state, 4, "--state")) if args.state else st.choi_state(channel)
    pre = not args.no_preprocess
    if args.protocol == "twepp":
        if args.m not in (None, 1) or args.code != "star" or args.circuit:
            raise UsageError("--protocol twepp is a two-pair protocol; --m and --code do not apply")
        return TweppMap(args.twepp_variant, args.e, args.f), state0
    if args.twepp_variant != "none":
        raise UsageError("--twepp-variant needs --protocol twepp")
    m = args.m if args.m is not None else (3 if args.code == "three" else 1)
    noisy = args.e > 0 or args.f > 0
    if (args.code == "star" and m > MAX_ENUM_CARRIERS and _is_depolarizing(channel) and pre and not noisy):
        return StarMap(channel.p00, m), state0
    code = code_from_args(args.code, args.m, args.circuit)
    return CaeppMap(RoundConfig(code, channel, pre_process=pre, e=args.e, f=args.f)), state0


# subcommands

def cmd_trajectory(args):
    fn, state0 = build_round(args)
    cols = ["round", "fidelity", "p_succ", "cum_succ"]
    try:
        traj = run_trajectory(state0, fn, args.rounds, args.target_f)
        code = EXIT_OK
    except AbortError as exc:
        print(f"error: {exc}", file=sys.stderr)
        traj, code = exc.trajectory, EXIT_FAILURE
    rows = [dict(round=r.round, fidelity=r.fidelity, p_succ=r.p_succ, cum_succ=r.cum_succ) for r in traj.records]
    return rows, cols, code


FIXED_POINT_COLUMNS = ["status", "F_star", "iterations", "residual", "infidelity", "bound_3B_2C",
                       "within_bound", "method"]


def cmd_fixed_point(args):
    fn, state0 = build_round(args)
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    try:
        rep = fixed_point(fn, state0, args.tol, args.max_iter)
    except (ConvergenceError, AbortError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        last = getattr(exc, "last_state", None)
        row = dict(status="aborted" if isinstance(exc, AbortError) else "not_converged",
                   iterations=getattr(exc, "iterations", None))
        if isinstance(last, st.BellDiagonalState):
            row["F_star"] = last.fidelity
        return [row], FIXED_POINT_COLUMNS, EXIT_FAILURE
    row = dict(status="converged", F_star=rep.F_star, iterations=rep.iterations, residual=rep.residual,
               infidelity=rep.infidelity, bound_3B_2C=rep.bound, within_bound=rep.within_bound,
               method=rep.method)
    return [row], FIXED_POINT_COLUMNS, EXIT_OK


def cmd_sweep_m(args):
    p_list = _floats(args.p00, what="--p00")
    if not p_list:
        raise UsageError("--p00 needs at least one value")
    if not 1 <= args.m_min <= args.m_max:
        raise UsageError("need 1 <= --m-min <= --m-max")
    rows = []
    for p in p_list:
        if not 0.0 <= p <= 1.0:
            raise UsageError(f"p00 must lie in [0, 1], got {p}")
        for r in sweep_m(p, range(args.m_min, args.m_max + 1), args.tol, workers=None):
            rows.append(dict(p00=r.p00, m=r.m, F_star=r.F_star, infidelity=r.infidelity, bound_3B_2C=r.bound))
    return rows, ["p00", "m", "F_star", "infidelity", "bound_3B_2C"], EXIT_OK


def noise_compare_rows(f_in: list, sweeps: dict, variant: str = "none") -> list:
    """Round-1 CAEPP (m = 1) against TWEPP for isotropic inputs with the matching
    depolarizing carrier channel."""
    rows = []
    for name, grid in sweeps.items():
        for F in f_in:
            ch = st.depolarizing(F)
            s = st.choi_state(ch)
            for x in grid:
                e, f = (float(x), 0.0) if name == "e" else (0.0, float(x))
                ca = noisy_round(s, RoundConfig(star_code(1), ch, e=e, f=f))
                tw = noisy_round(s, RoundConfig(star_code(1), ch, e=e, f=f, protocol="twepp",
                                                twepp_variant=variant))
                rows.append(dict(sweep=name, F_in=F, e=e, f=f, caepp_F1=ca.fidelity, twepp_F1=tw.fidelity,
                                 caepp_psucc=ca.p_succ, twepp_psucc=tw.p_succ))
    return rows


def cmd_noise_compare(args):
    f_in = _floats(args.f_in, what="--f-in")
    sweeps = {}
    if args.e_range:
        sweeps["e"] = _range(args.e_range)
    if args.f_range:
        sweeps["f"] = _range(args.f_range)
    if not sweeps:
        sweeps = {"e": np.linspace(0, 0.2, 11), "f": np.linspace(0, 0.2, 11)}
    for F in f_in:
        _warn_eb(st.depolarizing(F), f"input with F_in={F}")
    rows = noise_compare_rows(f_in, sweeps, args.twepp_variant)
    cols = ["sweep", "F_in", "e", "f", "caepp_F1", "twepp_F1", "caepp_psucc", "twepp_psucc"]
    return rows, cols, EXIT_OK


def cmd_ghz(args):
    ab, ac = parse_channel_arg(args.ab), parse_channel_arg(args.ac)
    s = ghz_init(ab, ac)
    r = st.GHZDiagonalState(_floats(args.state, 8, "--state")) if args.state else s
    rows, code = [], EXIT_OK
    for n in range(1, args.rounds + 1):
        row = dict(round=n, F_before=r.fidelity, extrapolated=n > 1)
        try:
            res = ghz_round(r, s)
        except AbortError as exc:
            print(f"error: round {n}: {exc}", file=sys.stderr)
            row.update(p_succ=0.0, status="aborted")
            rows.append(row)
            code = EXIT_FAILURE
            break
        row.update(p_succ=res.p_succ, F_after=res.fidelity, status="ok")
        rows.append(row)
        r = res.out_state
    return rows, ["round", "p_succ", "F_before", "F_after", "status", "extrapolated"], code


def cmd_oracle_check(args):
    if args.grid < 1:
        raise UsageError("--grid must be at least 1")
    cases = oracle_check(args.grid, seed=args.seed)
    rows = [dict(case=c.name, max_deviation=c.max_deviation, passed=c.passed(ATOL)) for c in cases]
    code = EXIT_OK if all(r["passed"] for r in rows) else EXIT_DEVIATION
    return rows, ["case", "max_deviation", "passed"], code


# parser

def _add_round_flags(p):
    p.add_argument("--channel", default="depolarizing",
                   help="depolarizing | biased | flip | custom:a,b,c,d")
    p.add_argument("--p00", type=float, default=None)
    p.add_argument("--gamma", type=float, default=1.0, help="flip family: X share of the error (Y gets 1 - gamma)")
    p.add_argument("--m", type=int, default=None, help="number of carriers")
    p.add_argument("--code", default="star", help="single | star | pairwise | three | custom:GEN,GEN,...")
    p.add_argument("--circuit", default=None, help='encoding circuit for custom codes, e.g. "H 1; CNOT 1 2; CNOT 0 2"')
    p.add_argument("--state", default=None, help="initial q00,q01,q10,q11 (default: the channel's Choi state)")
    p.add_argument("--no-preprocess", action="store_true")
    p.add_argument("--e", type=float, default=0.0, help="memory depolarizing rate")
    p.add_argument("--f", type=float, default=0.0, help="measurement flip rate")
    p.add_argument("--protocol", choices=("caepp", "twepp"), default="caepp")
    p.add_argument("--twepp-variant", choices=TWEPP_VARIANTS, default="none")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="caepp", allow_abbrev=False,
                                     description="Carrier-assisted and two-way entanglement purification tables.")
    fmt = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    fmt.add_argument("--format", choices=("csv", "json"), default="csv")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trajectory", parents=[fmt], allow_abbrev=False, help="per-round fidelity and success")
    _add_round_flags(p)
    p.add_argument("--rounds", type=int, default=10)
    p.add_argument("--target-f", type=float, default=None)
    p.set_defaults(func=cmd_trajectory)

    p = sub.add_parser("fixed-point", parents=[fmt], allow_abbrev=False, help="maximum convergent fidelity")
    _add_round_flags(p)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=100_000)
    p.set_defaults(func=cmd_fixed_point)

    p = sub.add_parser("sweep-m", parents=[fmt], allow_abbrev=False, help="star-code F* against m")
    p.add_argument("--p00", default="0.53,0.55,0.6,0.65,0.7", help="comma-separated list")
    p.add_argument("--m-min", type=int, default=1)
    p.add_argument("--m-max", type=int, default=40)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_sweep_m)

    p = sub.add_parser("noise-compare", parents=[fmt], allow_abbrev=False,
                       help="round-1 CAEPP against TWEPP under memory and readout noise")
    p.add_argument("--f-in", default="0.6,0.7,0.8,0.9", help="comma-separated input fidelities")
    p.add_argument("--e-range", default=None, help="START:STOP:COUNT")
    p.add_argument("--f-range", default=None, help="START:STOP:COUNT")
    p.add_argument("--twepp-variant", choices=TWEPP_VARIANTS, default="none")
    p.set_defaults(func=cmd_noise_compare)

    p = sub.add_parser("ghz", parents=[fmt], allow_abbrev=False, help="tripartite round")
    p.add_argument("--ab", required=True, help="channel to Bob, e.g. depolarizing:0.75")
    p.add_argument("--ac", required=True, help="channel to Carol")
    p.add_argument("--state", default=None, help="initial GHZ-diagonal state, 8 values (default: as distributed)")
    p.add_argument("--rounds", type=int, default=1, help="rounds beyond the first are extrapolated")
    p.set_defaults(func=cmd_ghz)

    p = sub.add_parser("oracle-check", parents=[fmt], allow_abbrev=False,
                       help="compare engines with the dense simulator")
    p.add_argument("--grid", type=int, default=20)
    p.add_argument("--seed", type=int, default=2024)
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "rounds", 1) < 1:
        parser.error("--rounds must be at least 1")
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        warnings.showwarning = lambda msg, *a, **k: print(f"warning: {msg}", file=sys.stderr)
        try:
            rows, cols, code = args.func(args)
        except (UsageError, ValueError) as exc:
            parser.error(str(exc))
        except CaeppError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_FAILURE
    sys.stdout.write(render(rows, cols, args.format))
    return code


if __name__ == "__main__":
    sys.exit(main())
