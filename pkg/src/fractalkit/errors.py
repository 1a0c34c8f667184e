"""Exception taxonomy shared across the package.

The CLI maps these onto its exit-code contract: structural/contract problems
are usage errors (exit 2), capacity and numeric failures exit 3.
"""


class StructuralError(ValueError):
    """Inputs have the wrong shape, labels, or ranges for the operation."""


class ContractError(ValueError):
    """Inputs are structurally fine but violate an operation's contract."""


class CapacityError(RuntimeError):
    """A configured size cap would be exceeded (raise the cap or enable snapping)."""


class NumericError(ArithmeticError):
    """Iteration produced non-finite values or failed to contract."""


class UnsupportedConfigurationError(ValueError):
    """The requested check lies outside the supported configuration class."""
