class GBOLabError(Exception):
    """Base class for every error raised by gbolab"""


class ConfigurationError(GBOLabError):
    """Bad sizes, malformed run configs, incompatible parameters"""


class NumericDomainError(GBOLabError):
    """A symbol or weight evaluated to a non-finite value"""


class ContractViolationError(GBOLabError):
    """An input broke a documented precondition (e.g. a non-real field)"""


class DivergenceError(GBOLabError):
    def __init__(self, message, step=None, time=None):
        super().__init__(message)
        self.step = step
        self.time = time


class CoverageError(GBOLabError):
    """The lambda window does not contain the dispersive surface or a convolution support"""


class WeightUnresolvableError(GBOLabError):
    """Too much mass near the domain edge to apply the x or t weight"""


class DegenerateInputError(GBOLabError):
    pass


class ResolutionError(GBOLabError):
    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


class FitDomainError(GBOLabError):
    pass
