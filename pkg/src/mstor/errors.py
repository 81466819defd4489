"""Exception hierarchy shared by all modules."""


class MstorError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(MstorError, ValueError):
    pass


class DomainError(MstorError, ValueError):
    """An input lies outside the mathematical domain of an operation (e.g. a negative entry)."""


class ParameterError(MstorError, ValueError):
    pass


class PartitionError(MstorError, ValueError):
    pass


class SingularMatrixError(MstorError, ArithmeticError):
    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class CapacityError(MstorError, ValueError):
    pass


class IterationLimitError(MstorError, RuntimeError):
    def __init__(self, message, estimates=None):
        super().__init__(message)
        self.estimates = estimates


class EvaluationError(MstorError, ArithmeticError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DivergenceError(MstorError, ArithmeticError):
    def __init__(self, message, iteration=None, index=None):
        super().__init__(message)
        self.iteration = iteration
        self.index = index


class GenerationError(MstorError, ValueError):
    def __init__(self, message, max_safe_coupling=None):
        super().__init__(message)
        self.max_safe_coupling = max_safe_coupling


class ParseError(MstorError, ValueError):
    def __init__(self, message, path=None, line=None):
        if line is not None:
            message = f"{path or '<input>'}:{line}: {message}"
        super().__init__(message)
        self.path = path
        self.line = line


class OracleFailure(MstorError, RuntimeError):
    pass
