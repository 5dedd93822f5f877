"""Exception types raised by the geometry routines."""

from __future__ import annotations


class GeometryError(Exception):
    """Base class for all failures signalled by this package."""


class DegenerateMetricError(GeometryError):
    def __init__(self, eigenvalue: float, where=None):
        self.eigenvalue = float(eigenvalue)
        self.where = where
        super().__init__(f"degenerate metric: smallest eigenvalue {self.eigenvalue:.3e}")


class JetConsistencyError(GeometryError):
    def __init__(self, mismatch: float):
        self.mismatch = float(mismatch)
        super().__init__(f"metric field not C2-consistent (relative jet/difference mismatch {mismatch:.3e})")


class NotAlmostComplexError(GeometryError):
    def __init__(self, defect: float):
        self.defect = float(defect)
        super().__init__(f"not an almost-complex structure (|J^2 + Id| = {defect:.3e})")


class DimensionError(GeometryError):
    pass


class DomainError(GeometryError):
    """A point lies outside the domain of a potential, chart or map."""


class QuadratureError(GeometryError):
    pass


class ODEError(GeometryError):
    pass


class NotALEError(GeometryError):
    pass


class ConeAngleError(GeometryError):
    pass


class SingularFactorError(GeometryError):
    pass


class ExpressionError(ValueError):
    """Malformed potential expression or corpus line."""
