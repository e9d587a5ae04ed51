"""Exception types shared across the package."""


class ShrinkMorphError(Exception):
    """Base class for all package errors."""


class ParameterDomainError(ShrinkMorphError, ValueError):
    """A pattern or solver parameter is outside its admissible range."""


class GeometryConflictError(ShrinkMorphError):
    """A transform produced overlapping polygons or escaped the footprint."""


class DegenerateGeometryError(ShrinkMorphError):
    """Zero-area or otherwise unusable geometry."""


class PolygonFormatError(ShrinkMorphError):
    """A polygon/mesh text file failed to parse or violated ring invariants."""


class MeshingError(ShrinkMorphError):
    """Triangulation or extrusion failed on valid-looking input."""


class InvertedElementError(ShrinkMorphError):
    """An element Jacobian became non-positive during evaluation."""

    def __init__(self, element_id: int, detail: str = ""):
        self.element_id = element_id
        msg = f"non-positive Jacobian in element {element_id}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class SingularSystemError(ShrinkMorphError):
    """The constrained tangent could not be solved (typically an unseeded
    bifurcation or a mechanism)."""


class ContinuationStallError(ShrinkMorphError):
    """Continuation made no progress at the minimum step size.

    Carries the partial result converged so far in ``.result``.
    """

    def __init__(self, message: str, result):
        super().__init__(message)
        self.result = result


class MaterialDataError(ShrinkMorphError, ValueError):
    """Stress-strain or temperature-log data violates its preconditions."""


class ConfigError(ShrinkMorphError):
    """A run configuration failed validation; message carries the field path."""
