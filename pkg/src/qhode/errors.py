"""Exception hierarchy.

Every error carries a stable ``name`` used in structured JSON error output
and an ``exit_code`` used by the command-line front end.
"""


class QHODEError(Exception):
    exit_code = 1

    @property
    def name(self):
        return type(self).__name__

    def to_dict(self):
        return {"error": self.name, "message": str(self)}


class DivisionByZero(QHODEError, ZeroDivisionError):
    exit_code = 3


class DSLSyntaxError(QHODEError):
    """Malformed system file, with 1-based line and column."""

    def __init__(self, line, col, expected, got=None):
        self.line = line
        self.col = col
        self.expected = expected
        msg = f"line {line}, col {col}: expected {expected}"
        if got is not None:
            msg += f", got {got!r}"
        super().__init__(msg)

    def to_dict(self):
        d = super().to_dict()
        d.update(line=self.line, col=self.col, expected=self.expected)
        return d


class UnboundIdentifier(QHODEError):
    pass


class ArityMismatch(QHODEError):
    pass


class UnsupportedDerivativeOrder(QHODEError):
    pass


class DimensionMismatch(QHODEError):
    pass


class MissingPoisson(QHODEError):
    pass


class NoBalanceFound(QHODEError):
    exit_code = 3


class IllConditioned(QHODEError):
    exit_code = 3


class CompatibilityObstruction(QHODEError):
    """Nonzero projection of the recursion RHS onto the left nullspace at a resonance."""

    exit_code = 2

    def __init__(self, k, witness):
        self.k = k
        self.witness = witness
        super().__init__(f"compatibility condition fails at resonance k={k} "
                         f"(projection modulus {witness:.3e})")

    def to_dict(self):
        d = super().to_dict()
        d.update(k=self.k, witness=self.witness)
        return d


class NotExpandedFarEnough(QHODEError):
    pass


class NoPositiveRoot(QHODEError):
    exit_code = 3


class NotConstant(QHODEError):
    exit_code = 2

    def __init__(self, order, monomial, modulus):
        self.order = order
        self.monomial = monomial
        self.modulus = modulus
        super().__init__(f"coefficient of z^{order} does not vanish "
                         f"(monomial {monomial}, modulus {modulus:.3e})")


class FamilyAmbiguous(QHODEError):
    pass


class PoleTooDeep(QHODEError):
    def __init__(self, index, exponent):
        self.index = index
        self.exponent = exponent
        super().__init__(f"function {index} has a pole of order {-exponent} > 1")


class BlowUp(QHODEError):
    exit_code = 3

    def __init__(self, z):
        self.z = z
        super().__init__(f"solution blows up near z = {z}")


class StiffnessFailure(QHODEError):
    exit_code = 3


class ModulusOutOfRange(QHODEError):
    pass


class InvalidRegime(QHODEError):
    exit_code = 3
