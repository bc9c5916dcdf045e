"""Exception taxonomy.

Every error raised by this package derives from :class:`FfelError` and
carries a short machine-parsable ``kind`` slug used by the CLI.
"""


class FfelError(Exception):
    kind = "error"


class DimensionError(FfelError):
    """Vector/matrix length does not match what the operation requires."""

    kind = "dimension-error"


class ParameterError(FfelError):
    """A parameter is outside its legal range."""

    kind = "parameter-error"


class InputError(FfelError):
    """Input data is unusable (non-finite, empty, unlabeled, ...)."""

    kind = "input-error"


class OracleSizeError(FfelError):
    """A dense-oracle operation would exceed the configured memory cap."""

    kind = "oracle-size-error"


class FormatError(FfelError):
    """A file does not conform to the expected format (magic, version, ...)."""

    kind = "format-error"


class CorruptionError(FormatError):
    """A file is truncated or internally inconsistent."""

    kind = "corruption-error"


class ParseError(FfelError):
    """Textual input (CSV, flag values) could not be parsed."""

    kind = "parse-error"


class ConsistencyError(FfelError):
    """Two inputs that must agree (shapes, labels, class sets) do not."""

    kind = "consistency-error"


class InsufficientSamplesError(FfelError):
    """A class has fewer samples than the protocol requires."""

    kind = "insufficient-samples-error"


class SplitError(FfelError):
    """A cross-validation split cannot be formed."""

    kind = "split-error"
