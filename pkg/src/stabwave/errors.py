"""Failure modes shared across the package.

Everything raised on purpose derives from StabwaveError so callers can
distinguish deliberate diagnostics from programming errors.
"""

__all__ = [
    "StabwaveError",
    "SingularBlock",
    "SingularOperator",
    "SingularSymbol",
    "IncompatibleKind",
    "DegenerateDenominator",
    "NegativeBaseFractionalPower",
    "Breakdown",
    "IllConditioned",
    "NoConvergence",
    "ConfigError",
]


class StabwaveError(Exception):
    """Base class for all deliberate errors."""


class SingularBlock(StabwaveError):
    """A per-mode 2x2 linear block is numerically singular.

    Carries the signed mode number and the determinant magnitude; typically
    signals a resonant choice of wave speed and dispersion coefficients.
    """

    def __init__(self, mode, det_magnitude):
        self.mode = mode
        self.det_magnitude = det_magnitude
        super().__init__(
            "singular 2x2 block at mode %d (|det| = %.3e)" % (mode, det_magnitude)
        )


class SingularOperator(StabwaveError):
    """A dense linear operator factorization detected rank deficiency."""


class SingularSymbol(StabwaveError):
    """A diagonal Fourier symbol vanishes on a retained mode."""

    def __init__(self, mode, magnitude):
        self.mode = mode
        self.magnitude = magnitude
        super().__init__(
            "symbol magnitude %.3e at mode %s is below tolerance" % (magnitude, mode)
        )


class IncompatibleKind(StabwaveError):
    """An initial-guess kind does not fit the target problem's geometry."""


class DegenerateDenominator(StabwaveError):
    """The inner product <N(u), u> in the stabilizing factor is ~ zero."""


class NegativeBaseFractionalPower(StabwaveError):
    """A negative ratio met a non-integer exponent; refusing to go complex."""


class Breakdown(StabwaveError):
    """An extrapolation denominator or coefficient sum collapsed."""


class IllConditioned(StabwaveError):
    """A windowed acceleration system is singular at the rank tolerance."""

    def __init__(self, condition_estimate):
        self.condition_estimate = condition_estimate
        super().__init__(
            "acceleration system ill-conditioned (cond ~ %.3e)" % condition_estimate
        )


class NoConvergence(StabwaveError):
    """An iterative eigensolver stalled; carries the residuals it reached."""

    def __init__(self, residuals):
        self.residuals = residuals
        super().__init__("eigensolver did not converge (best residuals: %s)" % residuals)


class ConfigError(StabwaveError):
    """A config field failed validation; message names the field."""

    def __init__(self, field, message):
        self.field = field
        super().__init__("%s: %s" % (field, message))
