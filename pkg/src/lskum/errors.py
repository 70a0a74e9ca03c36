"""Exception hierarchy shared by the solver modules."""


class LskumError(Exception):
    """Base class for solver errors."""


class DomainError(LskumError, ValueError):
    """A state lies outside the domain of a transform (e.g. non-positive pressure)."""


class CloudFormatError(LskumError, ValueError):
    """A grid file could not be parsed."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SingularStencilError(LskumError):
    """Least-squares normal matrix is (numerically) singular."""

    def __init__(self, message, point=None):
        self.point = point
        super().__init__(message)


class ReconstructionError(LskumError):
    """A modified q-state lost positivity (q3 >= 0) on an edge."""

    def __init__(self, point, neighbor):
        self.point = int(point)
        self.neighbor = int(neighbor)
        super().__init__(
            f"q-tilde reconstruction failed on edge ({self.point}, {self.neighbor}): q3 >= 0"
        )


class PositivityError(LskumError):
    """Density or pressure became non-positive after a state update."""

    def __init__(self, point, iteration=None):
        self.point = int(point)
        self.iteration = iteration
        where = f"point {self.point}"
        if iteration is not None:
            where += f", iteration {iteration}"
        super().__init__(f"positivity failure at {where}")


class ProtocolError(LskumError, RuntimeError):
    """A task observed neighbour data from an incomplete producing phase."""
