"""Exception types shared across the package."""


class MeshError(ValueError):
    """Invalid mesh geometry or topology."""


class TopologyError(MeshError):
    """Edge/face incidence violates the closed 2-manifold requirements."""


class UnsupportedGeometryError(MeshError):
    """Mesh is valid but outside the supported class (open surface, genus > 0)."""


class OffParseError(ValueError):
    """Malformed OFF payload."""


class SingularBasisError(ValueError):
    """A basis column degenerates (zero diagonal in a rescaling, empty column)."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to reach the requested tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
