"""Exception hierarchy shared by all jetrig modules."""


class EngineError(Exception):
    """Base class for every error raised by jetrig."""


# --- Lie algebra validation -------------------------------------------------

class NotAntisymmetric(EngineError):
    pass


class JacobiViolation(EngineError):
    def __init__(self, quadruple, residual):
        self.quadruple = quadruple
        self.residual = residual
        super().__init__(
            f"Jacobi identity fails at (i,j,k,l)={quadruple}: residual {residual:.3e}"
        )


class KillingNotNegativeDefinite(EngineError):
    """The Killing form is not negative definite: the algebra is not
    semisimple of compact type, so the rigidity hypotheses fail."""


class UnknownAlgebra(EngineError):
    pass


# --- Jet arithmetic and norms -----------------------------------------------

class DimensionMismatch(EngineError):
    pass


class IndexOutOfRange(EngineError):
    pass


class BadSmoothingParameter(EngineError):
    pass


class BadOrders(EngineError):
    pass


# --- Cohomology --------------------------------------------------------------

class DegreeTooHigh(EngineError):
    pass


class DegreeMismatch(EngineError):
    pass


class NotLinear(EngineError):
    pass


class WhiteheadViolation(EngineError):
    """A degree block Laplacian is singular where vanishing first or second
    cohomology requires invertibility.  Either the algebra is not compact
    semisimple or the block assembly is wrong."""


class EquivarianceViolated(EngineError):
    pass


# --- Jet group ----------------------------------------------------------------

class RadiusExhausted(EngineError):
    pass


class NotInvertible(EngineError):
    pass


class SmallnessViolated(EngineError):
    pass


class FlowNotFixingOrigin(EngineError):
    pass


class SeriesNotConverged(EngineError):
    pass


# --- Iteration driver ---------------------------------------------------------

class InfeasibleParameters(EngineError):
    pass


class MonitorViolated(EngineError):
    pass


class NoConvergence(EngineError):
    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)
