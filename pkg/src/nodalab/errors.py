"""Exception types raised across the package."""


class NodalabError(Exception):
    """Base class for all package errors."""


class DomainError(NodalabError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegreeMismatchError(NodalabError, ValueError):
    """A polynomial is not homogeneous of the requested degree."""

    def __init__(self, expected, found):
        self.expected = expected
        self.found = sorted(found)
        super().__init__(
            f"expected homogeneous degree {expected}, found term degrees {self.found}"
        )


class NotCaloricError(NodalabError, ValueError):
    """The heat residual of a polynomial is not identically zero."""


class UndefinedFrequencyError(NodalabError, ArithmeticError):
    """Frequency requested for a function whose weighted mass vanishes."""


class InconsistencyError(NodalabError):
    """Input data contradict the stated precondition."""


class EllipticityError(NodalabError, ValueError):
    """Coefficient matrix violates the declared ellipticity bounds."""

    def __init__(self, node, value, bounds):
        self.node = node
        self.value = value
        self.bounds = bounds
        super().__init__(
            f"ellipticity violated at node {node}: eigenvalue {value:.6g} "
            f"outside [{bounds[0]:.6g}, {bounds[1]:.6g}]"
        )


class SolverError(NodalabError, RuntimeError):
    """Linear solve failed to reach the requested residual."""

    def __init__(self, message, residual):
        self.residual = residual
        super().__init__(f"{message} (residual {residual:.3e})")


class VanishingCylinderError(NodalabError, ArithmeticError):
    """Mean square on a cylinder is below the underflow threshold."""


class InapplicableError(NodalabError):
    """Preconditions of a check are not met, so it does not apply."""


class DegenerateWindowError(NodalabError, ArithmeticError):
    """Least-squares normal equations are rank deficient or the window vanishes."""
