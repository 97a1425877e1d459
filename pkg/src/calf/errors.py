"""Error taxonomy shared by the core, the service, and the CLI.

The ``kind`` attribute drives the HTTP error envelope and the CLI exit
code: usage -> 1, data -> 2, numeric -> 3.
"""


class CalfError(Exception):
    """Base class for all toolkit errors."""

    kind = "usage"


class DataError(CalfError):
    """Corpus or input data cannot be used as requested."""

    kind = "data"


class NumericError(CalfError):
    """A numeric precondition failed or a computation cannot succeed."""

    kind = "numeric"
