"""Exception hierarchy shared by all cfmoll modules.

Two failure classes are distinguished because they map to distinct CLI
exit codes: bad user input (exit 2) versus a numerical breach detected
at run time (exit 3).
"""


class CfmollError(Exception):
    """Base class for all cfmoll errors."""


class ValidationError(CfmollError):
    """Invalid input: malformed spec, dimension mismatch, bad parameter."""


class NumericFailure(CfmollError):
    """A numerical guarantee was breached (normalization, negativity,
    symmetry residual, or quadrature budget)."""
