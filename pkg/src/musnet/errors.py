"""Exception hierarchy shared across the package."""


class MusnetError(Exception):
    """Base class for all errors raised by musnet."""


class DomainError(MusnetError, ValueError):
    """An input lies outside the domain of an operation."""


class OperatorParseError(DomainError):
    """A distance-operator name does not follow the ``O(n1,n2,...)`` grammar."""


class ScoreParseError(MusnetError):
    """A score file could not be parsed."""


class SchemaError(MusnetError):
    """A persisted file does not match the expected schema."""
