"""Shared exception types."""


class ArtifactError(ValueError):
    """A persisted artifact (prototype/assignment/checkpoint/dataset file)
    is malformed or violates a format invariant."""


class DegenerateVectorError(ValueError):
    """A vector that must be normalizable came out with (near-)zero norm."""
