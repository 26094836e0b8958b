"""Exception hierarchy shared across the toolkit.

Every error category raised by library code derives from ``WavecloakError``
so CLI entry points can map failures to exit codes uniformly.
"""


class WavecloakError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class InvalidParameterError(WavecloakError, ValueError):
    """An argument is outside its documented domain."""

    exit_code = 2


class InvalidLengthError(InvalidParameterError):
    """A sequence has a length incompatible with the operation."""


class UnsupportedSchemeError(InvalidParameterError):
    """The modulation scheme cannot be handled by this code path."""


class DegenerateInputError(WavecloakError, ValueError):
    """Input is structurally valid but degenerate (all-zero, zero gain, ...)."""

    exit_code = 2


class MissingPayloadRangeError(WavecloakError, ValueError):
    """The operation requires a frame with payload_range set."""

    exit_code = 2


class FrameTooShortError(InvalidParameterError):
    """The frame has too few samples for a statistically meaningful result."""


class StateSpaceTooLargeError(WavecloakError, RuntimeError):
    """Trellis search would exceed the configured state budget."""

    exit_code = 2


class InsufficientDataError(WavecloakError, ValueError):
    """Not enough training examples to fit a model."""

    exit_code = 2


class InvalidConfigError(WavecloakError, ValueError):
    """A configuration file or profile is malformed."""

    exit_code = 3


class MissingManifestError(WavecloakError, FileNotFoundError):
    """Dataset directory has no readable manifest."""

    exit_code = 4


class FormatMismatchError(WavecloakError, RuntimeError):
    """Dataset files disagree with their manifest (version, offsets, sizes)."""

    exit_code = 4


class IoFailureError(WavecloakError, OSError):
    """Filesystem read/write failed."""

    exit_code = 5
