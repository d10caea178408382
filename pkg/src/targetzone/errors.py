"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Bad input: model parameters, domains, claims or config files."""


class OutOfBandError(ValidationError):
    """A state or quote landed outside its admissible band."""

    def __init__(self, name, value, lower, upper):
        self.name = name
        self.value = value
        self.lower = lower
        self.upper = upper
        super().__init__(f"{name}={value!r} outside [{lower!r}, {upper!r}]")


class NumericalError(RuntimeError):
    """A solver, quadrature or series evaluation failed its tolerance."""
