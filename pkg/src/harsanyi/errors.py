"""Exception types shared across the package."""


class HarsanyiError(Exception):
    """Base class for all errors raised by this package."""


class FormulaSyntaxError(HarsanyiError, ValueError):
    def __init__(self, message, line=1, column=1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = line
        self.column = column


class ModelError(HarsanyiError, ValueError):
    """Malformed model, partition or algebra, or a formula the model cannot interpret."""


class BudgetExceeded(HarsanyiError):
    """The requested enumeration is outside the supported size."""


class InfeasibleSystem(HarsanyiError):
    pass


class UnboundedObjective(HarsanyiError):
    pass


class UnsupportedFormula(HarsanyiError, ValueError):
    """Formula outside the fragment an operation decides (multi-agent, K, depth...)."""


class NotHarsanyi(HarsanyiError, ValueError):
    pass


class NotNormal(HarsanyiError, ValueError):
    pass
