"""Exception hierarchy shared by every module."""


class ArtifactError(Exception):
    """Base class for all library errors."""


class DimensionError(ArtifactError, ValueError):
    """Operands live in incompatible spaces or algebras."""


class DomainError(ArtifactError, ValueError):
    """Evaluation outside a declared box or at a pole."""


class ParityError(ArtifactError, ValueError):
    """An element has the wrong parity for the requested operation."""


class ValidationError(ArtifactError):
    """A structural law does not hold; carries a witness payload."""

    def __init__(self, message: str, witness: dict | None = None):
        super().__init__(message)
        self.witness = witness or {}


class InputError(ArtifactError, ValueError):
    """A document could not be parsed into a library object."""
