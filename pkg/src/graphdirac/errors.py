"""Exception hierarchy shared by every module of the package."""


class GraphDiracError(Exception):
    """Base class for all errors raised by graphdirac."""


# graph construction
class UnknownVertex(GraphDiracError, KeyError):
    pass


class UnknownEdge(GraphDiracError, KeyError):
    pass


class NonPositiveLength(GraphDiracError, ValueError):
    pass


class IsolatedVertex(GraphDiracError, ValueError):
    pass


class SelfLoopPresent(GraphDiracError, ValueError):
    pass


class MultiEdgePresent(GraphDiracError, ValueError):
    pass


class IsolatedEdge(GraphDiracError, ValueError):
    pass


# vertex spaces
class BadProjection(GraphDiracError, ValueError):
    pass


class DimensionMismatch(GraphDiracError, ValueError):
    pass


class NotContinuous(GraphDiracError, ValueError):
    pass


# numerical checks
class RankAmbiguous(GraphDiracError, ArithmeticError):
    """A singular value sits too close to the rank cut-off to decide."""


class SpectraMismatch(GraphDiracError, AssertionError):
    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class IsoFailed(GraphDiracError, AssertionError):
    pass


class PhiNotBijective(GraphDiracError, AssertionError):
    pass


class NotRegular(GraphDiracError, ValueError):
    pass


class PreconditionViolated(GraphDiracError, ValueError):
    pass


# metric graphs
class BadProblem(GraphDiracError, ValueError):
    pass


class GridTooCoarse(GraphDiracError, RuntimeError):
    pass


# problem files
class SchemaError(GraphDiracError, ValueError):
    pass
