"""Shared exception types."""


class NumericalError(RuntimeError):
    """A NaN or infinity surfaced where finite numbers are required."""


class ArtifactMismatch(RuntimeError):
    """A checkpoint does not match the configured action spaces."""
