"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Operands have incompatible tensor, chain, or grid shapes."""


class RangeError(IndexError):
    """Index outside the valid grid or digit range."""


class CapacityError(RuntimeError):
    """Requested densification exceeds the configured size cap."""


class ConfigError(ValueError):
    """Invalid run configuration.

    Carries the full list of problems so a caller can report every field
    at once instead of failing on the first one.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class NumericalFailure(RuntimeError):
    """A rollout produced a non-finite state."""

    def __init__(self, step, message=""):
        self.step = step
        super().__init__(message or f"non-finite state after step {step}")


class StiffnessError(RuntimeError):
    """Adaptive integrator step size underflowed before reaching the target."""

    def __init__(self, t, message=""):
        self.t = t
        super().__init__(message or f"step size underflow at t={t:.6g}")
