"""Exception types shared across the package.

The CLI maps these onto exit codes: usage and configuration problems
exit with 2, failures inside a model evaluation exit with 3.
"""


class ReachkitError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(ReachkitError):
    """Caller passed arguments that violate an operation's contract."""


class ConfigError(UsageError):
    """A run configuration (file or parameter dict) failed validation."""


class ModelError(ReachkitError):
    """A vector-field evaluation produced an unusable result.

    Carries the offending state and, when raised from inside a grid
    sweep, the flat node index it belongs to.
    """

    def __init__(self, message, state=None, node_index=None):
        super().__init__(message)
        self.state = state
        self.node_index = node_index

    def __str__(self):
        base = super().__str__()
        if self.node_index is not None:
            base += f" (node index {self.node_index})"
        if self.state is not None:
            base += f" at state {list(self.state)}"
        return base
