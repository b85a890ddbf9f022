"""Exception types raised by the engine.

Everything raised on purpose derives from QvcError so callers (and the CLI)
can catch one type and map it to an exit code. Loader failures get their own
subtypes because "bad magic" and "checksum mismatch" call for different fixes.
"""


class QvcError(Exception):
    """Base class for all engine errors."""


class InvalidArgument(QvcError):
    """An argument value is outside its documented domain."""


class ShapeError(InvalidArgument):
    """An array has the wrong rank or an incompatible dimension."""


class ConfigError(QvcError):
    """A model configuration is inconsistent or violates an invariant."""


class LoadError(QvcError):
    """A serialized container could not be read."""


class BadMagicError(LoadError):
    """The file does not start with the expected magic bytes."""


class UnsupportedVersionError(LoadError):
    """The container version is not one this engine understands."""


class HeaderError(LoadError):
    """The container header is malformed or self-inconsistent."""


class ChecksumError(LoadError):
    """The payload checksum does not match the stored value."""


class TruncatedFileError(LoadError):
    """The file ends before the declared payload or trailer."""


class NumericalError(QvcError):
    """A computation degenerated (non-finite values, singular normalizer)."""


class UsageError(QvcError):
    """The operation was invoked in a way the workflow does not support."""
