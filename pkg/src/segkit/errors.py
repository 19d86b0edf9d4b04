"""Exception hierarchy for segkit.

Encoding failures are reported as the built-in ``UnicodeDecodeError`` (it
already carries the offending byte offset); everything else derives from
:class:`SegkitError`.
"""


class SegkitError(Exception):
    """Base class for all segkit errors."""


class ContractViolation(SegkitError):
    """An API precondition was violated by the caller."""


class ConfigError(SegkitError):
    """Invalid training or CLI configuration."""


class CorpusFormatError(SegkitError):
    """Malformed corpus content (e.g. a POS token without a separator)."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class AlignmentError(SegkitError):
    """Gold/predicted streams disagree in sentence or character counts."""


class DegenerateLatticeError(SegkitError):
    """The transition mask admits no legal tag path for this lattice."""


class TrainingDivergenceError(SegkitError):
    """A non-finite gradient or likelihood was produced during training."""


class IncompatibleModelError(SegkitError):
    """A warm-start model does not match the training corpus (POS vs plain)."""


class UnknownModelError(SegkitError):
    """A model name did not resolve to a file; carries the known names."""


class ModelFormatError(SegkitError):
    """Base class for model-file parsing failures."""


class BadMagicError(ModelFormatError):
    """The file does not start with the model magic bytes."""


class TruncatedModelError(ModelFormatError):
    """The file ends before its declared blocks do."""


class ChecksumError(ModelFormatError):
    """The trailing checksum does not match the file content."""


class UnsupportedVersionError(ModelFormatError):
    """The file declares a format version this build cannot read."""
