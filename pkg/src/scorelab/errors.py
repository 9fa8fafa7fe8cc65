"""Exception hierarchy shared across the toolkit."""


class ScorelabError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(ScorelabError, ValueError):
    """An operation received inputs that violate its contract."""


class LoadError(ScorelabError):
    """A matrix or model file is malformed or fails validation."""


class TrainingError(ScorelabError):
    """Classifier training diverged (non-finite loss)."""


class AttackError(ScorelabError):
    """Sample optimization produced a non-finite gradient or sample."""


class UsageError(ScorelabError):
    """Bad command-line flags; maps to exit code 1."""
