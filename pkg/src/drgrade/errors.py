"""Exception hierarchy.

Two families matter to the CLI exit-code contract: ConfigError maps to
exit 1, DataError (and subclasses) to exit 2. Anything else escaping a
command is an internal invariant violation (exit 3).
"""


class DrGradeError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(DrGradeError):
    """Malformed configuration or unusable command invocation."""


class DataError(DrGradeError):
    """Input data violates a documented contract."""


# --- probability vectors ---------------------------------------------------

class NonFiniteEntry(DataError):
    pass


class NegativeEntry(DataError):
    pass


class SumOutOfRange(DataError):
    pass


# --- panel assembly --------------------------------------------------------

class MissingCell(DataError):
    pass


class ConflictingLabel(DataError):
    pass


class DuplicateRecord(DataError):
    pass


# --- metrics ---------------------------------------------------------------

class LengthMismatch(DataError):
    pass


class LabelOutOfRange(DataError):
    pass


class DegenerateDistribution(DataError):
    """All truth mass and all prediction mass sit in one identical class."""


class EmptyClass(DataError):
    pass


class SingleClassTruth(DataError):
    pass


# --- splitting -------------------------------------------------------------

class InfeasibleFractions(DataError):
    pass


class IncompleteAssignment(DataError):
    pass


# --- losses / fusion net ---------------------------------------------------

class NonFiniteInput(DataError):
    pass


class ZeroCount(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class WidthMismatch(DataError):
    pass


class EmptySubset(DataError):
    pass


class CorruptModelFile(DataError):
    pass


class DimensionMismatch(DataError):
    pass


# --- simulator / selection -------------------------------------------------

class InfeasibleAccuracy(DataError):
    pass


class PoolTooSmall(DataError):
    pass
