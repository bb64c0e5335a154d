"""
Exception hierarchy for hardyseq.
Library code raises these; only the CLI maps them to exit codes.
"""


class HardySeqError(Exception):
    """Base class for every error raised by hardyseq."""


class InputError(HardySeqError):
    """Invalid user input (expression, parameters, sizes). CLI exit code 2."""


class FunctionSyntaxError(InputError):
    def __init__(self, text: str, position: int, reason: str):
        self.text = text
        self.position = position
        self.reason = reason
        super().__init__(f"{reason} at position {position} in {text!r}")


class PolynomialRejected(InputError):
    """Every term is an integer power without logarithm."""


class NotSubpolynomialType(InputError):
    """The leading term is a pure monomial c*x^m with integer m."""


class DomainError(InputError):
    """An argument falls outside the function's domain."""


class ConstraintViolation(InputError):
    """Progression or shift parameters break the admissibility constraint."""


class SizeGuardExceeded(InputError):
    """An exhaustive computation was requested beyond its size guard."""


class ModeError(InputError):
    """Search mode does not fit the instance (e.g. exact s>=3 with large N)."""


class DerivativeOrderError(InputError):
    """Derivative order above the supported guard."""


class PrecisionError(HardySeqError):
    """Certified evaluation failed. CLI exit code 3."""


class BoundaryUnresolved(PrecisionError):
    def __init__(self, n: int, argument: int, frac: float, err: float, bits: int):
        self.n = n
        self.argument = argument
        self.frac = frac
        self.err = err
        self.bits = bits
        super().__init__(
            f"fractional part at n={n} (argument {argument}) stays within "
            f"tolerance of a boundary at {bits} bits: frac={frac!r}, err={err:.3e}"
        )
