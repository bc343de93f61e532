"""Exception hierarchy shared by all solvers."""


class YamabeTorusError(Exception):
    """Base class for every error raised by this package."""


class DomainError(YamabeTorusError, ValueError):
    """An argument lies outside the admissible parameter range."""


class DegenerateError(DomainError):
    """The requested quantity only exists as a limit (K = lambda/2)."""


class NoBranchError(YamabeTorusError):
    """No non-constant branch exists for the requested period or winding."""


class ToleranceError(YamabeTorusError):
    """A computed quantity misses its accuracy budget."""


class UnderflowError(ToleranceError):
    """The first-integral constant is too small to represent in double precision."""


class ConvergenceError(YamabeTorusError):
    """An iterative solver exhausted its budget."""


class BracketError(YamabeTorusError):
    """No interior maximum was found on a ray search bracket."""


class BoundViolation(YamabeTorusError):
    """A volume inequality failed by more than the quadrature error."""

    def __init__(self, inequality: str, margin: float):
        super().__init__(f"{inequality} violated (margin {margin:.6g})")
        self.inequality = inequality
        self.margin = margin
