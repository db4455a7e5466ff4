"""Exception hierarchy.

Every error carries its class name as a stable identifier so the CLI can
report it on stderr; ``exit_code`` groups them into validation (2),
numeric (3) and usage (4) failures.
"""


class FiberBergmanError(Exception):
    exit_code = 2


# polyalg
class ParseError(FiberBergmanError):
    pass


class NotHomogeneous(FiberBergmanError):
    pass


class DivisionByZeroPoly(FiberBergmanError, ZeroDivisionError):
    pass


# family
class FactorizationMismatch(FiberBergmanError):
    pass


class ComponentDividesF1(FiberBergmanError):
    pass


class ComponentReducible(FiberBergmanError):
    pass


class NonEquivariant(FiberBergmanError):
    pass


class BaseActionTrivial(FiberBergmanError):
    pass


class CentralFiberRequested(FiberBergmanError):
    pass


# fibergeom
class DegreeMismatch(FiberBergmanError):
    pass


class CurveDegenerate(FiberBergmanError):
    exit_code = 3


class ResolutionTooLow(FiberBergmanError):
    pass


class GridComponentMismatch(FiberBergmanError):
    pass


class BadBasePoint(FiberBergmanError):
    pass


class OrderMismatch(FiberBergmanError):
    pass


class TrackingFailed(FiberBergmanError):
    exit_code = 3


class PointOffFiber(FiberBergmanError):
    pass


# bergman
class NotPositiveDefinite(FiberBergmanError):
    exit_code = 3


# rees
class BoundExceeded(FiberBergmanError):
    exit_code = 3


# cli
class GridSpecError(FiberBergmanError):
    exit_code = 4


class UsageError(FiberBergmanError):
    exit_code = 4
