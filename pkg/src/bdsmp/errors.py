"""Exception hierarchy shared across the package.

Every error carries an ``exit_code`` used by the CLI (and an ``api_code``
used by the HTTP error envelope): 2 for configuration/validation problems,
3 for precision-window problems, 4 for numeric range problems.
"""


class BdsmpError(Exception):
    exit_code = 2
    api_code = "config"


class InvariantViolation(BdsmpError):
    """Builder or model parameters violate a documented invariant."""


class ViolatesD(InvariantViolation):
    """Transition-probability expansion has a wrong order shift or a
    non-positive leading coefficient."""


class ViolatesE(InvariantViolation):
    """Sojourn-expectation expansion has a wrong order shift or a
    non-positive leading coefficient."""


class ViolatesF(InvariantViolation):
    """p_minus + p_plus coefficients fail the normalization identities."""


class ViolatesG(InvariantViolation):
    """p and e leading orders disagree at a boundary state."""


class LengthMismatch(InvariantViolation):
    """Expansions in one model do not share a common length."""


class WrongScenario(BdsmpError):
    """Operation not defined for the model's scenario."""


class FormulaNotApplicable(BdsmpError):
    """No closed form exists for the given parameters."""


class NoSignChange(BdsmpError):
    """Drift has no root bracketed in (0, 1)."""


class InsufficientPrecision(BdsmpError):
    """Requested expansion order exceeds the guaranteed precision window."""

    exit_code = 3
    api_code = "precision"


class NonPivotalOperand(InsufficientPrecision):
    """An operand that must have a nonzero leading coefficient does not."""


class NonPivotalDivisor(NonPivotalOperand):
    """Division by an expansion whose leading coefficient vanishes."""


class WindowTooSmall(InsufficientPrecision):
    """Reduction requested on a window with fewer than two states."""


class RangeError(BdsmpError):
    """Numeric evaluation left the valid range (probabilities outside [0,1],
    non-positive expectations, eps outside (0, eps0], ...)."""

    exit_code = 4
    api_code = "range"


class DegenerateDerivative(RangeError):
    """Numeric derivative too close to zero to divide by."""


class NonIntegrable(RangeError):
    """Density has a non-integrable endpoint singularity."""
