"""Exception types shared across the library."""


class PrecourantError(Exception):
    """Base class for all library errors."""


class ChartMismatchError(PrecourantError):
    """Two values built over different charts were combined."""


class RankMismatchError(PrecourantError):
    """A section's length does not match the bundle rank."""


class DegreeError(PrecourantError):
    """A form or cochain has an inadmissible degree for the operation."""


class SingularMetricError(PrecourantError):
    """The bundle metric is not invertible."""


class MembershipError(PrecourantError):
    """A cochain fails the contraction-membership test required here."""


class ConstructionError(PrecourantError):
    """Builder input fails one of its stated preconditions.

    Carries a short machine-readable code and a witness description.
    """

    def __init__(self, code: str, witness: str = ""):
        self.code = code
        self.witness = witness
        msg = code if not witness else f"{code}: {witness}"
        super().__init__(msg)


class ParseError(PrecourantError):
    """Positioned syntax error for the literal grammars and the manifest."""

    def __init__(self, line: int, column: int, expected: str, found: str = ""):
        self.line = line
        self.column = column
        self.expected = expected
        self.found = found
        msg = f"line {line}, column {column}: expected {expected}"
        if found:
            msg += f", found {found!r}"
        super().__init__(msg)
