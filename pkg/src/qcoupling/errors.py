"""Exception taxonomy shared by the whole package.

Two failure families exist and they map onto CLI exit codes:
input errors (the caller handed us something malformed) exit 1,
numerical failures (an iteration did not converge) exit 2.
"""


class InputError(ValueError):
    """Malformed, inconsistent, or out-of-contract input."""


class NumericalError(RuntimeError):
    """An iterative routine failed to reach its tolerance."""


class SolverFailure(NumericalError):
    """Interior-point solve stopped before reaching the target accuracy.

    The best iterate seen is attached so callers can inspect how close
    the solve got.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
