"""Exception types raised by the simulator."""


class CaeppError(Exception):
    """Base class for all simulator errors."""


class ParameterError(CaeppError, ValueError):
    """An argument is outside its valid domain."""


class UnsupportedCodeError(CaeppError, ValueError):
    """A stabilizer code has no encoding circuit the engine can use."""


class EnumerationSizeError(CaeppError, ValueError):
    """Exact enumeration would exceed the supported number of carriers."""


class AbortError(CaeppError):
    """The protocol round cannot succeed (zero success probability).

    ``trajectory`` is filled in by multi-round drivers with the rounds that
    completed before the abort.
    """

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class ConvergenceError(CaeppError):
    """Fixed-point search did not converge; ``last_state`` holds the final iterate."""

    def __init__(self, message, last_state=None, iterations=None):
        super().__init__(message)
        self.last_state = last_state
        self.iterations = iterations
