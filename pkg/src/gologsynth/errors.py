"""Error taxonomy shared across the package.

The CLI maps these onto exit codes: InputError -> 2, everything else
that escapes -> 3.  UnrealizableError is not an error of the tool but a
verdict of synthesis; the CLI maps it to exit 1.
"""


class InputError(Exception):
    """Malformed or undeclared input: parse failures, unknown names, arity
    mismatches, non-ground formulas where ground ones are required."""


class DeclarationError(InputError):
    """A symbol is used in a way that contradicts its declaration."""


class GranularityError(InputError):
    """A clock constant or interval endpoint does not fit the granularity."""


class BoundExceededError(Exception):
    """A bounded construction ran out of its expansion or node budget."""

    def __init__(self, message, frontier=None):
        super().__init__(message)
        self.frontier = frontier


class UnrealizableError(Exception):
    """No controller satisfies the constraints on the given plant."""


class InternalError(Exception):
    """An invariant the pipeline guarantees was found broken."""
