"""Exact simulator for carrier-assisted (CAEPP) and two-way (TWEPP) entanglement purification."""

from .dynamics import (FixedPointReport, RoundRecord, SweepRow, Trajectory, fixed_point,
                       projective_limit, run_trajectory, sweep_m)
from .errors import (AbortError, CaeppError, ConvergenceError, EnumerationSizeError, ParameterError,
                     UnsupportedCodeError)
from .ghz import GHZRoundOutcome, ghz_init, ghz_iterate, ghz_round
from .pauli import (CliffordCircuit, PauliString, StabilizerCode, custom_code, decode_classify,
                    detects, encoding_circuit, pairwise_code, parse_circuit, parse_pauli, propagate,
                    single_code, star_code, three_carrier_code)
from .rounds import (CaeppMap, RoundConfig, RoundOutcome, StarMap, TweppMap, abc_coefficients,
                     caepp_round, caepp_round_closed_single, noisy_round, star_bound,
                     star_closed_form, twepp_round)
from .states import (BellDiagonalState, ChannelFamily, GHZDiagonalState, PauliChannel, choi_state,
                     canonical_order, channel_of, depolarizing, isotropic, make_channel,
                     memory_noise)

__version__ = "0.1.0"
