"""Exception types shared across the package."""

from __future__ import annotations


class SatmosaicError(Exception):
    """Base class for all package errors."""


class ConfigError(SatmosaicError):
    """Invalid or inconsistent configuration."""


class MapParseError(SatmosaicError):
    """Malformed map document; carries position info when available."""

    def __init__(self, message: str, line: int | None = None, offset: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, offset {offset})"
        super().__init__(message)
        self.line = line
        self.offset = offset


class MapValidationError(SatmosaicError):
    """Structurally valid document that violates map invariants."""


class GenerationError(SatmosaicError):
    """Generator backend failure; carries the failing evaluation id."""

    def __init__(self, message: str, eval_id=None):
        if eval_id is not None:
            message = f"{message} [eval {eval_id}]"
        super().__init__(message)
        self.eval_id = eval_id


class ModelError(GenerationError):
    """Serialized-model adapter failure (missing file, shape mismatch)."""


class RegionTooLargeError(SatmosaicError):
    """Requested render region exceeds the configured max_pixels."""


class EditError(SatmosaicError):
    """Malformed or out-of-extent map edit."""
