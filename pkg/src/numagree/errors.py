"""Exception hierarchy shared by all numagree modules.

Exit-code mapping for the CLI lives in cli.py: ConfigError and plain I/O
problems exit 2, every other NumagreeError exits 1.
"""


class NumagreeError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(NumagreeError):
    """Invalid run configuration or unusable input path."""


class DataFormatError(NumagreeError):
    """Malformed input file. Carries the offending location when known."""

    def __init__(self, message, *, path=None, line=None):
        loc = ""
        if path is not None:
            loc += f"{path}"
        if line is not None:
            loc += f":{line}"
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = path
        self.line = line


class EmptyLexiconError(NumagreeError):
    """Lemma loading or filtering produced an empty lexicon."""


class MissingFormError(NumagreeError):
    """A required inflection form is absent from a distribution."""


class DistributionInvariantError(DataFormatError):
    """A probability record violates a distribution invariant."""

    def __init__(self, message, *, template_id=None, field=None, path=None, line=None):
        prefix = ""
        if template_id is not None:
            prefix += f"template {template_id!r}: "
        if field is not None:
            prefix += f"field {field!r}: "
        super().__init__(prefix + message, path=path, line=line)
        self.template_id = template_id
        self.field = field


class BackendError(NumagreeError):
    """A probability backend failed to produce a distribution."""


class IncompleteDistributionError(BackendError):
    """Backend response is missing one or more requested candidates."""


class UnsupportedOperationError(BackendError):
    """Backend does not implement an optional capability (e.g. top-k)."""
