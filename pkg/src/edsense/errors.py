"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """Input lies outside the mathematical domain of an operation."""


class ConvergenceError(RuntimeError):
    """An iterative numerical routine failed to reach its tolerance."""


class ConditioningError(ArithmeticError):
    """Partial-fraction expansion produced non-finite coefficients."""


class EnumerationSizeError(ValueError):
    """Occupancy enumeration would be too large to compute exactly."""


class ScenarioFormatError(ValueError):
    """A scenario document violates the documented JSON schema."""


class ScaleGapWarning(UserWarning):
    """Mixture scales close enough to make the expansion ill-conditioned.

    Carries the offending gap as attributes so callers can react without
    parsing the message text.
    """

    def __init__(self, min_relative_gap: float, threshold: float):
        self.min_relative_gap = float(min_relative_gap)
        self.threshold = float(threshold)
        super().__init__(
            f"minimum relative scale gap {min_relative_gap:.3e} is below "
            f"{threshold:.0e}; partial-fraction coefficients may be ill-conditioned"
        )
