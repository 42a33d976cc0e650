"""Shared exception types."""


class NumericError(RuntimeError):
    """A numerical routine failed to converge or produced inconsistent output.

    Raised with diagnostics attached to the message; distinct from ValueError,
    which signals invalid inputs.
    """
