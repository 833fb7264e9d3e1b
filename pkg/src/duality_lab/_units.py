"""Phase convention: ``E = e^{2 pi}``, so ``E^{i a} = exp(2 pi i a)``.

Every factor of 2*pi attached to a phase goes through this module.
"""
import numpy as np

TWO_PI = 2.0 * np.pi


def epow(alpha):
    """``E^{i alpha}`` elementwise."""
    return np.exp(1j * TWO_PI * np.asarray(alpha))


def turns(z):
    """Argument of ``z`` measured in turns, in ``(-1/2, 1/2]``."""
    return wrap_half(np.angle(z) / TWO_PI)


def wrap_half(x):
    """Reduce modulo 1 into ``(-1/2, 1/2]``."""
    x = np.asarray(x, dtype=float)
    r = x - np.floor(x + 0.5)
    # floor puts exact -1/2 at -1/2; the convention keeps +1/2
    return np.where(r <= -0.5, r + 1.0, r)


def mod1_distance(a, b):
    """Distance between ``a`` and ``b`` on the circle of circumference 1."""
    return np.abs(wrap_half(np.asarray(a) - np.asarray(b)))
