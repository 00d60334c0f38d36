"""Exception hierarchy.

Two families matter to callers (and to the CLI exit codes): invalid inputs
raise :class:`ParameterError`, numerical guards that trip on otherwise valid
inputs raise :class:`NumericGuardError`.
"""


class BayesDeskError(Exception):
    """Base class for all library errors."""


class ParameterError(BayesDeskError, ValueError):
    """Invalid parameters or inputs."""


class PairingError(ParameterError):
    """Unsupported likelihood/prior pairing for a conjugate update."""


class NumericGuardError(BayesDeskError, ArithmeticError):
    """A numerical safeguard was triggered."""


class SingularityError(NumericGuardError):
    """A matrix that must be invertible is (numerically) singular."""


class DegenerateSampleError(NumericGuardError):
    """All importance weights vanish or no draw was accepted."""


class BoundError(NumericGuardError):
    """An accept-reject envelope was violated.

    Attributes
    ----------
    x : float
        The point where target/(M * proposal) exceeded one.
    ratio : float
        The offending ratio.
    """

    def __init__(self, x, ratio):
        super().__init__(f"envelope violated at x={x!r} (ratio {ratio:.6g} > 1)")
        self.x = x
        self.ratio = ratio


class SupportError(NumericGuardError):
    """A truncated support leaves too much tail mass."""


class BudgetError(NumericGuardError):
    """A simulation budget produced no usable output."""

    def __init__(self, message, acceptance_rate=0.0):
        super().__init__(message)
        self.acceptance_rate = acceptance_rate


class BoundaryRootError(NumericGuardError):
    """A polynomial has a root on (or numerically at) the unit circle."""


class DivergenceError(NumericGuardError):
    """A fixed-point iteration failed to converge."""


class IncompatibleConditionalsError(NumericGuardError):
    """Conditionals cannot come from a single positive joint distribution."""
