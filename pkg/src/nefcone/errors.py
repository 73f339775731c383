"""Exception hierarchy. Every error carries a stable ``code`` used by the CLI."""


class NefConeError(ValueError):
    code = "ERROR"

    def __str__(self):
        msg = super().__str__()
        return f"{self.code}: {msg}" if msg else self.code


class DomainError(NefConeError):
    code = "DOMAIN_ERROR"


class ParseError(NefConeError):
    code = "PARSE_ERROR"


class IncompatibleFieldError(NefConeError):
    code = "INCOMPATIBLE_FIELD"


class QuadDivisionByZero(NefConeError, ZeroDivisionError):
    code = "DIVISION_BY_ZERO"


class FactorizationLimitError(NefConeError):
    code = "FACTORIZATION_LIMIT"


class LatticeMismatchError(NefConeError):
    code = "LATTICE_MISMATCH"


class NonpositiveNormError(NefConeError):
    code = "NONPOSITIVE_NORM"


class PreconditionViolated(NefConeError):
    code = "PRECONDITION_VIOLATED"


class NotProductLatticeError(NefConeError):
    code = "NOT_PRODUCT_LATTICE"
