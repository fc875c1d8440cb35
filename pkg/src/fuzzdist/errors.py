"""Error types shared across the toolkit.

Every error raised while reading or validating user-supplied input derives
from ``InputError`` so the CLI can map it to exit code 1 uniformly. Messages
must name the offending file (and identifier or line where one exists);
callers rely on that for diagnostics.
"""


class InputError(Exception):
    """A problem with user-supplied input files or values."""

    def __init__(self, message: str, *, path: str | None = None):
        if path is not None:
            message = f"{path}: {message}"
        super().__init__(message)
        self.path = path


class ParseError(InputError):
    """Input could not be parsed at all (malformed JSON, bad CSV row, ...)."""


class ValidationError(InputError):
    """Input parsed but violates a structural or value constraint."""
