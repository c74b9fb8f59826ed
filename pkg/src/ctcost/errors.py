"""Exception hierarchy shared across the package."""


class CtcostError(Exception):
    """Base class for all errors raised by ctcost."""


class InvalidInputError(CtcostError, ValueError):
    """An argument violates a documented precondition."""


class NumericalError(CtcostError, RuntimeError):
    """A numerical routine failed (non-convergence, divergence, ...)."""


class DegenerateCrossingError(NumericalError):
    """Counterdiabatic driving is undefined because two coupled levels cross."""


class IntegrationDivergedError(NumericalError):
    """The time integrator produced non-finite values."""

    def __init__(self, step, t):
        super().__init__(f"integration diverged at step {step} (t={t:.6g})")
        self.step = step
        self.t = t
