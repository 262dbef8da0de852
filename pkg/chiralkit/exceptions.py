class ChiralkitException(Exception):
    """Base class for chiralkit exceptions.

    Attributes
    ----------
    message : string
        Explanation of the error
    category : string
        Classification of the type of chiralkit error
    """

    def __init__(self, message, category='Numeric'):
        super().__init__(message)
        self.message = message
        self.category = category


class ContractViolation(ChiralkitException):
    """Raised when an operation is called outside its degree contract, e.g. d of a 3-form"""

    def __init__(self, message=None):
        super().__init__(message, 'Contract')


class NotClosed(ChiralkitException):
    """Raised by the homotopy operator when its input form is not closed"""

    def __init__(self, message=None):
        super().__init__(message, 'Algebra')


class NotHarmonic(ChiralkitException):
    """Raised when a construction requires a Euclidean-harmonic germ"""

    def __init__(self, message=None):
        super().__init__(message, 'Algebra')


class NonCriticalOrigin(ChiralkitException):
    """Raised when a germ's gradient does not vanish at the origin"""

    def __init__(self, message=None):
        super().__init__(message, 'Germ')


class UnknownGerm(ChiralkitException):
    """Raised when a catalog lookup fails"""

    def __init__(self, message=None):
        super().__init__(message, 'Germ')


class ZeroOnSphere(ChiralkitException):
    """Raised when a field vanishes (numerically) on a sampling sphere"""

    def __init__(self, message=None):
        super().__init__(message, 'Numeric')


class NonIntegralDegree(ChiralkitException):
    """Raised when the degree quadrature does not settle on an integer"""

    def __init__(self, message=None, residual=None):
        super().__init__(message, 'Numeric')
        self.residual = residual


class NewtonDivergence(ChiralkitException):
    """Raised when a Newton solve fails to converge from its seed"""

    def __init__(self, message=None):
        super().__init__(message, 'Numeric')


class StepFailure(ChiralkitException):
    """Raised when the ODE integrator cannot take a step"""

    def __init__(self, message=None):
        super().__init__(message, 'Numeric')


class IndefiniteDefect(ChiralkitException):
    """Raised when a 1-form is not a singular contact form (defect changes sign)"""

    def __init__(self, message=None):
        super().__init__(message, 'Contact')


class WrongSign(ChiralkitException):
    """Raised when alpha ^ beta is negative at the point of a star construction"""

    def __init__(self, message=None):
        super().__init__(message, 'Metric')


class NonRegularValue(ChiralkitException):
    """Raised when a level set passes through (numerically) critical points"""

    def __init__(self, message=None):
        super().__init__(message, 'Surface')


class TransversalityFailure(ChiralkitException):
    """Raised when the surface-field data of a surface construction are not transverse"""

    def __init__(self, message=None):
        super().__init__(message, 'Surface')


class ParseError(ChiralkitException):
    """Raised on malformed polynomial or form input.

    Attributes
    ----------
    line : int
        1-based line of the offending input
    column : int
        1-based column of the offending input
    """

    def __init__(self, message=None, line=1, column=1):
        super().__init__(f'{message} (line {line}, column {column})', 'Input')
        self.line = line
        self.column = column


class ConfigurationError(ChiralkitException):
    """Raised when environment configuration values are invalid"""

    def __init__(self, message=None):
        super().__init__(message, 'Configuration')
