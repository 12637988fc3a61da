"""Exception hierarchy shared by all modules."""


class CpsplitError(Exception):
    """Base class for all package-specific errors."""


# --- series / numerics ---

class ZeroLeadingCoefficient(CpsplitError):
    pass


class OrderMismatch(CpsplitError):
    pass


class NegativeRadicand(CpsplitError):
    pass


# --- models ---

class CollisionSingularity(CpsplitError):
    pass


class ChartMismatch(CpsplitError):
    pass


class DegenerateCircle(CpsplitError):
    pass


class NotAnEquilibrium(CpsplitError):
    pass


class NoRealUnstableDirection(CpsplitError):
    pass


# --- flow ---

class StepUnderflow(CpsplitError):
    pass


class CollisionApproach(CpsplitError):
    pass


class NoCrossing(CpsplitError):
    pass


# --- manifold ---

class ResonantOrder(CpsplitError):
    pass


class SingularSolve(CpsplitError):
    pass


class DomainCollapse(CpsplitError):
    pass


# --- charts ---

class CollisionPoint(CpsplitError):
    pass


class HyperbolicState(CpsplitError):
    pass


class NearParabolic(CpsplitError):
    pass


class NegativeAction(CpsplitError):
    pass


# --- melnikov / singularity ---

class PipelineDomainError(CpsplitError):
    """Parameter outside the validity domain of a pipeline (e.g. 4*sqrt(3)*eps^2 >= 1)."""


class RouteMismatch(CpsplitError):
    pass


# --- splitting ---

class BelowDeskFloor(CpsplitError):
    pass


class BranchMisidentified(CpsplitError):
    pass


# --- asymptotics ---

class NonpositiveValue(CpsplitError):
    pass


class DegenerateAbscissae(CpsplitError):
    pass


class DuplicateAbscissae(CpsplitError):
    pass


class IllConditioned(CpsplitError):
    pass


# --- cli ---

class ConfigInvalid(CpsplitError):
    pass
