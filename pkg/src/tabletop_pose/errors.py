"""Exception hierarchy for tabletop-pose.

Every error raised by the library derives from TabletopError and also from the
closest builtin, so `except ValueError` style handling keeps working.
"""

from __future__ import annotations


class TabletopError(Exception):
    """Base class for all tabletop-pose errors."""


class DimensionError(TabletopError, ValueError):
    """Tensor shapes do not agree."""


class StateError(TabletopError, RuntimeError):
    """A layer or object is not in the state an operation needs."""


class NumericError(TabletopError, ArithmeticError):
    """A loss, gradient or activation became non-finite.

    Carries the offending parameter name, or the epoch/batch where training
    diverged, when known.
    """

    def __init__(
        self,
        message: str,
        *,
        parameter: str | None = None,
        epoch: int | None = None,
        batch: int | None = None,
    ):
        super().__init__(message)
        self.parameter = parameter
        self.epoch = epoch
        self.batch = batch


class ParseError(TabletopError, ValueError):
    """Malformed input: filenames, images, manifests, checkpoints."""


class ConfigError(TabletopError, ValueError):
    """Invalid configuration or dataset layout."""


class NoObjectError(TabletopError, ValueError):
    """An image or mask has no nonzero pixel to locate an object from."""


class CheckpointError(ParseError):
    """A checkpoint file could not be read."""


class BadMagicError(CheckpointError):
    """The file does not start with the checkpoint magic."""


class PayloadLengthError(CheckpointError):
    """The payload size disagrees with the header."""


class CheckpointHeaderError(CheckpointError):
    """The JSON header is missing, truncated or inconsistent."""
