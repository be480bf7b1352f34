"""Exception types raised across the package."""


class SwmeError(Exception):
    """Base class for all package errors."""


class NonPositiveDepth(SwmeError, ValueError):
    pass


class UnsupportedOrder(SwmeError, ValueError):
    pass


class NotUnreduced(SwmeError, ValueError):
    """A superdiagonal entry of a lower Hessenberg matrix vanishes."""


class SimplicityUnverifiable(SwmeError):
    """Roots of the final associated polynomial are too clustered to trust."""


class ConvergenceFailure(SwmeError, RuntimeError):
    pass


class DegreeMismatch(SwmeError, ValueError):
    pass


class SingularMatch(SwmeError, ValueError):
    pass


class DryInterface(SwmeError):
    pass


class DryCell(SwmeError):
    def __init__(self, i, j, h):
        super().__init__(f"non-positive depth h={h!r} in cell ({i}, {j})")
        self.i, self.j, self.h = i, j, h


class NonFinite(SwmeError):
    def __init__(self, i, j, time):
        super().__init__(f"non-finite value in cell ({i}, {j}) at t={time!r}")
        self.i, self.j, self.time = i, j, time


class ConfigError(SwmeError, ValueError):
    pass
