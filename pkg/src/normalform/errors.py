"""Exception hierarchy shared by all modules."""


class NormalFormError(Exception):
    """Base class for every error raised by this package."""


class NonFinite(NormalFormError, ValueError):
    pass


class SingularBlock(NormalFormError):
    pass


class BaseNotRegular(NormalFormError):
    pass


class ExtendedSingular(NormalFormError):
    def __init__(self, message, sample_index=None):
        super().__init__(message)
        self.sample_index = sample_index


class NotAComplex(NormalFormError):
    pass


class DimensionMismatch(NormalFormError, ValueError):
    pass


class DomainError(NormalFormError, ValueError):
    """A point lies outside the declared domain box, or evaluation is undefined."""


class ParseError(NormalFormError, ValueError):
    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UndeclaredVariable(ParseError):
    def __init__(self, name, position):
        super().__init__(f"undeclared variable {name!r}", position)
        self.name = name


class NewtonFailure(NormalFormError):
    """Newton iteration did not produce a solution."""


class SingularJacobian(NewtonFailure):
    def __init__(self, iteration, message="singular Jacobian"):
        super().__init__(f"{message} at iteration {iteration}")
        self.iteration = iteration


class NoConvergence(NewtonFailure):
    def __init__(self, residuals, message="Newton iteration did not converge"):
        last = residuals[-1] if residuals else float("nan")
        super().__init__(f"{message} (last residual {last:.3e})")
        self.residuals = list(residuals)


class VerificationFailure(NormalFormError):
    def __init__(self, message, sample=None, residual=None):
        super().__init__(message)
        self.sample = sample
        self.residual = residual


class NotFixedPoint(NormalFormError):
    pass


class EquivarianceViolation(NormalFormError):
    def __init__(self, message, witness=None, residual=None):
        super().__init__(message)
        self.witness = witness
        self.residual = residual


class NotInvariantInput(NormalFormError):
    pass


class RadiusNotFound(NormalFormError):
    pass


class CorrespondenceFailure(NormalFormError):
    def __init__(self, message, witness=None, residual=None):
        super().__init__(message)
        self.witness = witness
        self.residual = residual


class SchemaError(NormalFormError, ValueError):
    def __init__(self, message, pointer=""):
        super().__init__(f"{message} (at {pointer or '/'})")
        self.pointer = pointer


class UnknownBuiltin(NormalFormError, KeyError):
    def __init__(self, name, valid):
        self.name = name
        self.valid = sorted(valid)
        super().__init__(f"unknown builtin {name!r}; valid ids: {', '.join(self.valid)}")

    def __str__(self):
        return self.args[0]
