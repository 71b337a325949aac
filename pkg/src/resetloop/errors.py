"""Exception hierarchy shared by all resetloop modules."""


class ResetLoopError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ResetLoopError, ValueError):
    """An input violates a documented precondition or type invariant."""


class SingularityError(ResetLoopError, ArithmeticError):
    """Evaluation hit a pole (denominator magnitude below the machine guard)."""

    def __init__(self, omega: float, message: str | None = None):
        self.omega = omega
        super().__init__(message or f"transfer function singular at omega={omega!r} rad/s")


class FrfRangeError(ResetLoopError, ValueError):
    """A frequency-response table was queried outside its measured band.

    Carries the offending frequency so callers can decide whether to
    truncate a harmonic series instead of failing.
    """

    def __init__(self, omega: float, omega_min: float, omega_max: float):
        self.omega = omega
        self.omega_min = omega_min
        self.omega_max = omega_max
        super().__init__(
            f"omega={omega!r} rad/s outside measured band [{omega_min!r}, {omega_max!r}]"
        )


class SingularMatrixError(ResetLoopError, ArithmeticError):
    """A matrix inverse inside the harmonic computation does not exist."""


class NonConvergenceError(ResetLoopError, RuntimeError):
    """A steady-state simulation failed to settle into a periodic orbit."""

    def __init__(self, message: str, periods_run: int | None = None, residual: float | None = None):
        super().__init__(message)
        self.periods_run = periods_run
        self.residual = residual


class NonFiniteSignalError(ResetLoopError, ArithmeticError):
    """A simulation input or internal signal became non-finite."""


class DivergenceError(ResetLoopError, RuntimeError):
    """A closed-loop simulation exceeded its configured output bound."""


class NearSingularLoopError(ResetLoopError, ArithmeticError):
    """|1 + L_1| fell below the guard: the closed loop sits at the
    instability boundary and the sensitivity harmonics are meaningless."""

    def __init__(self, omega: float, magnitude: float):
        self.omega = omega
        self.magnitude = magnitude
        super().__init__(
            f"|1 + L_1| = {magnitude:.3e} at omega={omega!r} rad/s; loop near-singular"
        )


class InfeasiblePhaseError(ResetLoopError, ValueError):
    """Requested phase lies outside (0, theta_max) at the target frequency."""

    def __init__(self, theta: float, theta_max: float, omega: float):
        self.theta = theta
        self.theta_max = theta_max
        self.omega = omega
        super().__init__(
            f"requested phase {theta:.6g} rad at omega={omega!r} rad/s is outside the "
            f"feasible range (0, {theta_max:.6g}) rad"
        )


class NoSolutionError(ResetLoopError, ArithmeticError):
    """The backward corner-frequency solve produced no admissible root.

    Unreachable for targets inside the feasible phase range; signals a
    numerical inconsistency.
    """


class InsufficientDataError(ResetLoopError, ValueError):
    """A spectral estimate was requested on too short a record."""


class BudgetExceededError(ResetLoopError, RuntimeError):
    """A simulation exceeded its configured wall-clock budget."""


class ConfigError(ResetLoopError, ValueError):
    """A project/run configuration file is malformed.

    ``context`` names the offending file/field/row for CLI reporting.
    """

    def __init__(self, message: str, context: str | None = None):
        self.context = context
        super().__init__(message if context is None else f"{context}: {message}")
