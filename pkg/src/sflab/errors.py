"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input lies outside the domain of the requested operation."""


class ConfigError(ValueError):
    """A run configuration file could not be parsed or validated."""


class NoConvergence(RuntimeError):
    """Newton iteration did not converge.

    The optional ``label`` identifies the failing task (e.g. the ladder
    index of a fixed-point seed).
    """

    def __init__(self, message, label=None):
        super().__init__(message)
        self.label = label


class SignFlip(RuntimeError):
    """A Newton iterate crossed x = 0; the seed does not match its branch."""


class Marginal(RuntimeError):
    """A multiplier sits on the unit circle within tolerance; the orbit is
    at a bifurcation and its index is undefined."""


class NoBracket(RuntimeError):
    """A bracketing root search found no sign change."""


class NoRoot(RuntimeError):
    """A root solve failed on an otherwise valid bracket."""


class InconsistentBranch(RuntimeError):
    """A solved quantity violates its branch constraint (e.g. a spiral
    parameter beyond the base fixed point)."""


class OutOfRange(RuntimeError):
    """The closing coefficient of the index-2 system falls outside (-1, 1);
    no index-2 pair exists at these winding numbers and this rho."""

    def __init__(self, message, c=None, rho_hint=None):
        super().__init__(message)
        self.c = c
        self.rho_hint = rho_hint


class StallError(RuntimeError):
    """The expansion walk failed to double its reach for several rounds."""


class ConeViolation(RuntimeError):
    """Backward cone iteration left the admissible cone; the leaf base
    point is too far from the section core."""


class NotSaddleFocus(RuntimeError):
    """The linearization at the origin is not a saddle-focus with the
    required eigenvalue ordering."""


class NoReturn(RuntimeError):
    """A trajectory produced no qualifying section crossing before the
    time horizon."""


class StepFailure(RuntimeError):
    """The ODE integrator failed; carries the last valid time."""

    def __init__(self, message, t_last=None):
        super().__init__(message)
        self.t_last = t_last
