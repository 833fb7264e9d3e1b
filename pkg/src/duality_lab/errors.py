"""Exception types raised across the package."""


class DualityLabError(Exception):
    """Base class for all package errors."""


class IntegerOverflowError(DualityLabError, OverflowError):
    """Checked 64-bit automaton arithmetic would leave the safe range."""


class WrapError(DualityLabError, ValueError):
    """The light cone of a closed-form evaluation wraps around the ring."""


class InconsistentMovers(DualityLabError, ValueError):
    """Left/right mover fields do not come from any automaton state."""


class RuleNotBijective(DualityLabError, ValueError):
    """An interaction rule pair would make the update non-invertible."""


class BasisMismatch(DualityLabError, ValueError):
    """Operators defined on different truncated bases were combined."""


class DimensionTooLarge(DualityLabError, ValueError):
    """A truncated basis would exceed the dense-storage guard."""


class VortexPoint(DualityLabError, ValueError):
    """The phase function is undefined at a corner of the fractional torus."""


class QuadratureFailure(DualityLabError, RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


class PoleAt(DualityLabError, ValueError):
    """A momentum kernel was evaluated at its pole."""


class TableTooShort(DualityLabError, ValueError):
    """A kernel table does not reach the distances a ring needs."""


class NotPermutation(DualityLabError, ValueError):
    """A matrix expected to be a permutation is not one."""


class ConfigError(DualityLabError, ValueError):
    """A run configuration is malformed or out of range."""

    def __init__(self, message, *, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)
