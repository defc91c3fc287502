"""Exception hierarchy shared by all modules."""


class LpgpdError(Exception):
    """Base class for domain errors (the CLI maps these to exit code 2)."""


# groupoids and slices
class NotComposable(LpgpdError):
    pass


class InvalidParams(LpgpdError):
    pass


class NotASlice(LpgpdError):
    pass


class CapExceeded(LpgpdError):
    pass


class GroupoidMismatch(LpgpdError):
    pass


# measures
class NotQuasiInvariant(LpgpdError):
    pass


# linear algebra on weighted l^p
class ShapeMismatch(LpgpdError):
    pass


class ExponentMismatch(LpgpdError):
    pass


class SpaceMismatch(LpgpdError):
    pass


class ZeroSecondArgument(LpgpdError):
    pass


class NotSpatial(LpgpdError):
    pass


class NotAnIsometryOnSupport(NotSpatial):
    """Sparsity pattern is a partial bijection but the weights break isometry."""


# semigroups and tightness
class TooLarge(LpgpdError):
    pass


class NotHermitianIdempotent(LpgpdError):
    pass


class RelationsViolated(LpgpdError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


# disintegration
class NotTight(LpgpdError):
    pass


class InconsistentSlices(LpgpdError):
    pass


class FibrationFailure(LpgpdError):
    pass


# Cuntz / Bratteli
class BudgetTooSmall(LpgpdError):
    pass


class LevelOutOfRange(LpgpdError):
    pass


class LevelMismatch(LpgpdError):
    pass


# expressions
class ExpressionSyntaxError(LpgpdError):
    def __init__(self, msg, pos):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


class UnknownName(LpgpdError):
    pass
