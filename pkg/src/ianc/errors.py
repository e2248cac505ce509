"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class IancError(Exception):
    """Base class for every error raised by this package."""


# field arithmetic
class ZeroInverse(IancError, ZeroDivisionError):
    pass


class Singular(IancError):
    pass


# network parsing
class ParseError(IancError):
    pass


class ValidationError(IancError):
    pass


# identity tests and classification
class PreconditionViolated(IancError):
    pass


class MincutViolation(IancError):
    pass


# code construction
class SingularBlock(IancError):
    pass


class RankFailure(IancError):
    pass


class InvalidPair(IancError):
    pass


class CaseRejected(IancError):
    def __init__(self, tag, reason: str = ""):
        self.tag = tag
        msg = f"network rejected: {tag.kind.value}"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)


class Exhausted(IancError):
    def __init__(self, max_attempts: int, last_failure: str):
        self.max_attempts = max_attempts
        self.last_failure = last_failure
        super().__init__(
            f"no valid design after {max_attempts} attempts; last failure: {last_failure}"
        )


# simulation
class DimensionMismatch(IancError, ValueError):
    pass


class DigestMismatch(IancError):
    pass
