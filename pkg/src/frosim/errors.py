"""Exception hierarchy shared by all modules."""


class FroError(Exception):
    """Base class for every error raised by frosim."""


# coefficient generation
class DegenerateArgument(FroError, ValueError):
    pass


class DenominatorUnderflow(FroError, ArithmeticError):
    pass


class SingularSystem(FroError, ArithmeticError):
    pass


class NonRealSolution(FroError, ArithmeticError):
    pass


# stepping kernels
class InsufficientHistory(FroError, LookupError):
    pass


class StaleHistory(InsufficientHistory):
    """History spans a discontinuity and cannot feed a multistep kernel."""


class StepMismatch(FroError, ValueError):
    pass


class MissingInputDerivative(FroError, ValueError):
    pass


# simulation loop
class NoConvergence(FroError, RuntimeError):
    def __init__(self, message, record=None, partial=None):
        super().__init__(message)
        self.record = record
        self.partial = partial


class SingularJacobian(FroError, ArithmeticError):
    pass


class ConfigInvalid(FroError, ValueError):
    pass


class EventOffGrid(ConfigInvalid):
    pass
