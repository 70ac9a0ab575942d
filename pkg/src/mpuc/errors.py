"""Exception taxonomy.

ValidationError is for malformed inputs (CLI exit code 2); NumericalError
for tolerance/consistency failures in otherwise well-formed problems (CLI
exit code 1); ObstructionError for topological obstructions that make a
requested deformation impossible.
"""


class MpucError(Exception):
    pass


class ValidationError(MpucError):
    pass


class NumericalError(MpucError):
    pass


class ObstructionError(MpucError):
    """A requested continuous deformation is blocked by a nonzero invariant."""

    def __init__(self, message: str, invariants: dict | None = None):
        super().__init__(message)
        self.invariants = invariants or {}
