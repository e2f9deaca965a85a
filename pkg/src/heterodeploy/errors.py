"""Shared exception hierarchy.

The command line maps these families onto distinct process exit codes:
bad input and schema problems, provisioning failures, lifecycle
violations, and internal invariant breaches are reported separately.
"""


class HeterodeployError(Exception):
    """Base class for every error raised by this package."""


class InputError(HeterodeployError):
    """Bad user input: unreadable files, schema violations, unknown ids."""


class SchemaError(InputError):
    """A JSON document does not match its expected schema."""


class LifecycleError(HeterodeployError):
    """An operation was attempted in a state that forbids it."""


class WrongState(LifecycleError):
    """The target deployment or stack is not in a state that allows the
    requested operation."""


class InternalError(HeterodeployError):
    """An internal invariant was violated. Indicates a bug, not bad input."""
