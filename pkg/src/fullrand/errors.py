"""Exception hierarchy.

Everything raised on bad data or a failed estimation derives from
``DataError``; the CLI maps those to exit code 1.
"""


class FullRandError(Exception):
    """Base class for all package errors."""


class DataError(FullRandError):
    """Input data or estimation problem (CLI exit code 1)."""


class EmptyGroup(DataError):
    pass


class DuplicateCell(DataError):
    pass


class RaggedRegressors(DataError):
    pass


class IndexOutOfRange(DataError):
    pass


class InsufficientData(DataError):
    pass


class Unidentifiable(DataError):
    pass


class Singular(DataError):
    pass


class RankDeficient(DataError):
    pass


class TooManyChunks(DataError):
    pass


class InsufficientChunks(DataError):
    pass


class ChunkEstimationFailed(DataError):
    """A base estimator failed on one chunk.

    ``chunk`` is the failing chunk index and ``cause`` the original error.
    """

    def __init__(self, chunk, cause):
        self.chunk = chunk
        self.cause = cause
        super().__init__(f"chunk {chunk}: {type(cause).__name__}: {cause}")


class BadSpec(DataError):
    pass


class DegenerateDraw(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class InconsistentRegressor(DataError):
    pass


class EmptyFile(DataError):
    pass


class NotConvergedWarning(RuntimeWarning):
    """The iterative solver hit ``max_iter`` before meeting its tolerance."""
