import numpy as np
from hypothesis import settings, strategies as hst

from caepp.states import BellDiagonalState, GHZDiagonalState, PauliChannel

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def _simplex(n, floor=0.0):
    weights = hst.lists(hst.floats(min_value=floor, max_value=1.0), min_size=n, max_size=n)
    return weights.filter(lambda w: sum(w) > 1e-3).map(lambda w: np.array(w) / sum(w))


bell_states = _simplex(4).map(BellDiagonalState)
channels = _simplex(4).map(PauliChannel)
ghz_states = _simplex(8).map(GHZDiagonalState)
# strictly positive entries keep every round away from zero success probability
positive_bell = _simplex(4, floor=0.01).map(BellDiagonalState)
positive_channels = _simplex(4, floor=0.01).map(PauliChannel)


def random_simplex(rng, n):
    return rng.dirichlet(np.ones(n))


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[n])
