"""Exception hierarchy shared across the package.

Every error raised by the library derives from :class:`FrcStrengthError` so
callers can catch one base class.  Validation problems additionally derive
from :class:`ValidationFailed`; numerical problems from :class:`FitError`.
"""

from __future__ import annotations


class FrcStrengthError(Exception):
    """Base class for all library errors."""


class InvalidArgument(FrcStrengthError, ValueError):
    """An argument violates a documented precondition."""


# --- snapshot validation -------------------------------------------------


class ValidationFailed(FrcStrengthError, ValueError):
    """A snapshot or report violates the data-model invariants."""


class DuplicateRobot(ValidationFailed):
    def __init__(self, key: str):
        super().__init__(f"robot {key!r} appears more than once in the roster")
        self.key = key


class DuplicateMatchNo(ValidationFailed):
    def __init__(self, match_no: int, stage: str):
        super().__init__(f"match_no {match_no} duplicated in {stage} matches")
        self.match_no = match_no


class MalformedAlliance(ValidationFailed):
    def __init__(self, match_no: int, detail: str):
        super().__init__(f"match {match_no}: {detail}")
        self.match_no = match_no


class UnknownRobotInMatch(ValidationFailed):
    def __init__(self, match_no: int, key: str):
        super().__init__(f"match {match_no}: robot {key!r} is not in the roster")
        self.match_no = match_no
        self.key = key


class NegativeScore(ValidationFailed):
    def __init__(self, match_no: int, score: int):
        super().__init__(f"match {match_no}: negative score {score}")
        self.match_no = match_no


# --- design / estimation -------------------------------------------------


class EmptySelection(FrcStrengthError, ValueError):
    """No matches selected for design construction."""


class EmptyCluster(FrcStrengthError, ValueError):
    def __init__(self, label: int):
        super().__init__(f"cluster {label} has no members")
        self.label = label


class LabelOutOfRange(FrcStrengthError, ValueError):
    def __init__(self, label: int, c: int):
        super().__init__(f"cluster label {label} outside 1..{c}")
        self.label = label


class FitError(FrcStrengthError):
    """Base class for numerical fitting failures."""


class RobotNeverPlayed(FitError):
    def __init__(self, key: str):
        super().__init__(f"robot {key!r} appears in no selected match")
        self.key = key


class RankDeficient(FitError):
    """The design matrix is numerically rank deficient.

    ``columns`` holds the labels of the offending columns (cluster labels,
    or robot keys when the design is uncollapsed).
    """

    def __init__(self, columns):
        cols = list(columns)
        super().__init__(f"design matrix rank deficient in columns {cols}")
        self.columns = cols


class LeverageSingular(FitError):
    def __init__(self, match_index: int):
        super().__init__(
            f"match {match_index} is pivotal: deleting it leaves the fit unidentifiable"
        )
        self.match_index = match_index


class NonFiniteInput(FrcStrengthError, ValueError):
    """Clustering input contains NaN or infinite values."""


# --- evaluation ----------------------------------------------------------


class LengthMismatch(FrcStrengthError, ValueError):
    pass


class InsufficientRanking(FrcStrengthError, ValueError):
    pass


class UnknownRobot(FrcStrengthError, KeyError):
    def __init__(self, key: str):
        super().__init__(f"unknown robot {key!r}")
        self.key = key


class EmptyPlayoff(FrcStrengthError, ValueError):
    pass


class RosterMismatch(FrcStrengthError, ValueError):
    """A fit report does not belong to the supplied snapshot."""


class InsufficientMatches(FrcStrengthError, ValueError):
    pass


# --- ingestion -----------------------------------------------------------


class SnapshotIoError(FrcStrengthError, OSError):
    """A snapshot file could not be read or decoded.

    ``offset`` carries the byte offset of the decoding failure when known.
    """

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset


class SchemaVersionMismatch(FrcStrengthError, ValueError):
    def __init__(self, found, expected: int):
        super().__init__(f"snapshot schema_version {found!r}, expected {expected}")
        self.found = found
        self.expected = expected


class ParseError(FrcStrengthError, ValueError):
    def __init__(self, row: int, column: str, detail: str):
        super().__init__(f"row {row}, column {column!r}: {detail}")
        self.row = row
        self.column = column


class AuthFailed(FrcStrengthError):
    pass


class EventNotFound(FrcStrengthError):
    def __init__(self, event_key: str):
        super().__init__(f"event {event_key!r} not found")
        self.event_key = event_key


class RateLimited(FrcStrengthError):
    def __init__(self, retry_after: float | None = None):
        super().__init__("rate limited by the upstream API")
        self.retry_after = retry_after


class SchemaDrift(FrcStrengthError):
    def __init__(self, detail: str):
        super().__init__(f"unexpected API payload: {detail}")
        self.detail = detail


class PortInUse(FrcStrengthError, OSError):
    def __init__(self, port: int):
        super().__init__(f"port {port} is already in use")
        self.port = port
