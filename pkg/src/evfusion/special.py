"""Digamma, trigamma and log-gamma for positive real arguments.

All three shift the argument upward with the standard recurrences until it
is at least ``SHIFT_TO`` and then evaluate an asymptotic series.  They are
vectorised over numpy arrays and return plain floats for scalar input.
"""

import numpy as np

SHIFT_TO = 10.0
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


def _prepare(x):
    x = np.asarray(x, dtype=np.float64)
    if np.any(~(x > 0)):
        raise ValueError("argument must be positive and finite")
    if np.any(np.isinf(x)):
        raise ValueError("argument must be positive and finite")
    return x


def _finish(value, scalar):
    return float(value) if scalar else value


def digamma(x):
    """Logarithmic derivative of the gamma function, psi(x), for x > 0."""
    scalar = np.ndim(x) == 0
    x = _prepare(x).copy()
    acc = np.zeros_like(x)
    mask = x < SHIFT_TO
    while mask.any():
        acc[mask] -= 1.0 / x[mask]
        x[mask] += 1.0
        mask = x < SHIFT_TO
    inv = 1.0 / x
    z = inv * inv
    # Bernoulli tail: B_2n / (2n x^2n), n = 1..7
    series = z * (1.0 / 12 - z * (1.0 / 120 - z * (1.0 / 252 - z * (
        1.0 / 240 - z * (1.0 / 132 - z * (691.0 / 32760 - z / 12.0))))))
    return _finish(acc + np.log(x) - 0.5 * inv - series, scalar)


def trigamma(x):
    """Second log-derivative of the gamma function, psi'(x), for x > 0."""
    scalar = np.ndim(x) == 0
    x = _prepare(x).copy()
    acc = np.zeros_like(x)
    mask = x < SHIFT_TO
    while mask.any():
        acc[mask] += 1.0 / (x[mask] * x[mask])
        x[mask] += 1.0
        mask = x < SHIFT_TO
    inv = 1.0 / x
    z = inv * inv
    series = inv * (1.0 + inv * (0.5 + inv * (1.0 / 6 - z * (1.0 / 30 - z * (
        1.0 / 42 - z * (1.0 / 30 - z * (5.0 / 66 - z * (691.0 / 2730 - z * 7.0 / 6))))))))
    return _finish(acc + series, scalar)


def lgamma(x):
    """Natural log of the gamma function for x > 0."""
    scalar = np.ndim(x) == 0
    x = _prepare(x).copy()
    shift = np.zeros_like(x)
    mask = x < SHIFT_TO
    while mask.any():
        shift[mask] += np.log(x[mask])
        x[mask] += 1.0
        mask = x < SHIFT_TO
    inv = 1.0 / x
    z = inv * inv
    series = inv * (1.0 / 12 - z * (1.0 / 360 - z * (1.0 / 1260 - z * (
        1.0 / 1680 - z * (1.0 / 1188 - z * (691.0 / 360360 - z / 156.0))))))
    value = (x - 0.5) * np.log(x) - x + _HALF_LOG_2PI + series - shift
    return _finish(value, scalar)
