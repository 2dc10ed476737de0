"""Exception hierarchy for pipeline-doctor.

Every error carries an ``exit_code`` used by the CLI: 1 for I/O and
validation problems, 2 for domain errors (no explanation, unsatisfiable
remediation, ...).
"""

from typing import Optional, Sequence


class PipelineDoctorError(Exception):
    """Base exception for pipeline-doctor errors"""

    exit_code = 2


# -- validation (exit 1) -----------------------------------------------------

class SchemaError(PipelineDoctorError):
    """A pipeline, domain or constraint is structurally invalid."""

    exit_code = 1


class TraceError(PipelineDoctorError):
    """An evaluation trace does not validate against its pipeline."""

    exit_code = 1


class ConfigError(PipelineDoctorError):
    exit_code = 1


class ConstraintParseError(PipelineDoctorError):
    """Malformed constraint JSON; ``path`` points at the offending node."""

    exit_code = 1

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class DslParseError(PipelineDoctorError):
    exit_code = 1

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(f"{where}{message}")
        self.line = line
        self.column = column


class UnknownDomainLiteral(DslParseError):
    pass


# -- domain errors (exit 2) --------------------------------------------------

class TypeMismatch(PipelineDoctorError):
    """A numeric comparison was applied to a non-numeric value."""


class EmptyDomain(PipelineDoctorError):
    """A restriction eliminated every value of a domain."""


class NotNumeric(PipelineDoctorError):
    pass


class NotInChoice(PipelineDoctorError):
    pass


class WouldEmptyChoice(PipelineDoctorError):
    pass


class UnrepresentableRestriction(PipelineDoctorError):
    """The restricted value set has no domain form (e.g. a hole in a float range)."""


class NoExplanation(PipelineDoctorError):
    """No constraint within the search depth separates the trace."""

    def __init__(self, message: str, best: Optional[object] = None,
                 misclassified: Sequence[str] = ()):
        super().__init__(message)
        self.best = best
        self.misclassified = tuple(misclassified)


class AllFailed(NoExplanation):
    pass


class RemediationError(PipelineDoctorError):
    pass


class UnsatisfiableBranch(RemediationError):
    pass


class LitFalseConstraint(RemediationError):
    pass


class AllBucketsEmpty(RemediationError):
    pass
