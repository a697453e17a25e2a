"""Exception family for the laboratory.

Every error carries an ``exit_code`` so the CLI can map failures onto its
contract: 2 for precondition failures, 3 for verification failures, 4 for
stage exhaustion (the finite stage cannot answer the query; build deeper).
"""

from __future__ import annotations


class MixlabError(Exception):
    """Base class for all package errors."""

    exit_code = 2


class PreconditionError(MixlabError):
    """An operation was called outside its contract."""

    exit_code = 2


class VerificationError(MixlabError):
    """An exact check that the construction promises to satisfy failed."""

    exit_code = 3


class StageExhausted(MixlabError):
    """The finite stage cannot resolve the query; a deeper stage is needed."""

    exit_code = 4


class PartiallyUndefined(StageExhausted):
    """A set operation touched the undefined residual of a finite-stage map.

    Carries the measure of the blocking overlap when known.
    """

    def __init__(self, message, blocking_measure=None, n=None):
        super().__init__(message)
        self.blocking_measure = blocking_measure
        self.n = n


class EmptySetError(PreconditionError):
    pass


class StageTooLarge(PreconditionError):
    pass


class NotRigid(PreconditionError):
    pass


class CoverageUnattainable(StageExhausted):
    pass


class TargetTooLarge(PreconditionError):
    pass


class NotFoundWithinStage(StageExhausted):
    def __init__(self, message, stage=None, reach=None):
        super().__init__(message)
        self.stage = stage
        self.reach = reach


class MarginViolated(VerificationError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ToleranceUnmet(PreconditionError):
    pass


class DegenerateScale(PreconditionError):
    pass


class CaseMismatch(PreconditionError):
    pass


class LedgerViolation(VerificationError):
    pass


class HypothesisUnmet(PreconditionError):
    pass


class LemmaViolated(VerificationError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class WindowExhausted(StageExhausted):
    pass


class BoundNotMetWarning(UserWarning):
    """The pair-search hypothesis N > alpha/eps failed; result is best effort."""
