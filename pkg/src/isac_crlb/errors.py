class ConfigurationError(ValueError):
    """Inconsistent or incomplete waveform, scene or experiment description."""


class SamplingError(ValueError):
    """Sample rate too low for the occupied bandwidth."""


class TruncationError(ValueError):
    """A delay would push the signal outside its zero-padded guard."""


class NumericalError(ArithmeticError):
    """Numerical integration produced a matrix that violates PSD/symmetry."""


class DegenerateSceneError(ArithmeticError):
    """Scene for which the nuisance-phase information vanishes."""
