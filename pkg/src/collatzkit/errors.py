"""Exception types shared across the toolkit."""


class NotInDomainError(ValueError):
    """A partial map was applied outside its domain."""


class TrivialLoopError(ValueError):
    """Position 1 maps to itself; chain walking would not terminate."""


class StepCapExceededError(RuntimeError):
    """A walk exceeded its step cap before reaching a terminal element."""


class InsufficientRangeError(ValueError):
    """A recurrence scan needs at least two full windows."""


class InsufficientRootError(ValueError):
    """Audit depth exceeds what the chosen root can support."""


class VersionMismatchError(RuntimeError):
    """Checkpoint file header is missing, corrupt, or from another version."""
