"""Ricker wavelet, its time derivatives, and bilateral Laplace transforms.

The wavelet is the second derivative of ``g(t) = -(2/alpha^2) exp(-x^2)``
with ``x = alpha (t - t0) / 2``, so every derivative is a Hermite polynomial
times the same Gaussian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import hermite as H

OVERFLOW_EXPONENT = 700.0
_SQRT_PI = np.sqrt(np.pi)


@dataclass(frozen=True)
class RickerParams:
    alpha: float
    t0: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.t0 > 0):
            raise ValueError(f"alpha and t0 must be positive, got alpha={self.alpha}, t0={self.t0}")


def _hermite_derivative(params: RickerParams, t, order: int):
    # d^n/dt^n g = -(2/alpha^2) (alpha/2)^n (-1)^n H_n(x) exp(-x^2)
    x = 0.5 * params.alpha * (np.asarray(t, dtype=float) - params.t0)
    coef = np.zeros(order + 1)
    coef[order] = 1.0
    scale = -(2.0 / params.alpha**2) * (0.5 * params.alpha) ** order * (-1) ** order
    return scale * H.hermval(x, coef) * np.exp(-x * x)


def gaussian_g(params: RickerParams, t):
    """Gaussian whose second derivative is the Ricker wavelet."""
    return _hermite_derivative(params, t, 0)


def ricker_eval(params: RickerParams, t):
    """``q(t) = (1 - alpha^2 (t-t0)^2 / 2) exp(-alpha^2 (t-t0)^2 / 4)``."""
    tau = np.asarray(t, dtype=float) - params.t0
    a2 = params.alpha**2
    return (1.0 - 0.5 * a2 * tau * tau) * np.exp(-0.25 * a2 * tau * tau)


def ricker_dt_eval(params: RickerParams, t):
    return _hermite_derivative(params, t, 3)


def ricker_dt2_eval(params: RickerParams, t):
    """Second time derivative, ``-(alpha^2/8) H_4(x) exp(-x^2)``."""
    return _hermite_derivative(params, t, 4)


def _exponent(params: RickerParams, s):
    return (s / params.alpha) ** 2 - s * params.t0


def _checked_exp(params: RickerParams, s):
    e = _exponent(params, s)
    if np.any(np.real(e) > OVERFLOW_EXPONENT):
        raise OverflowError(
            f"bilateral Laplace transform overflows: Re exponent {np.max(np.real(e)):.1f} > {OVERFLOW_EXPONENT}"
        )
    return np.exp(e)


def bilateral_laplace_g(params: RickerParams, s):
    """``B{g}(s) = -(4 sqrt(pi) / alpha^3) exp((s/alpha)^2 - s t0)``."""
    s = np.asarray(s, dtype=complex)
    return -(4.0 * _SQRT_PI / params.alpha**3) * _checked_exp(params, s)


def bilateral_laplace_q(params: RickerParams, s):
    """Transform of the wavelet itself, ``s^2 B{g}(s)``."""
    s = np.asarray(s, dtype=complex)
    return s**2 * bilateral_laplace_g(params, s)


def bilateral_laplace_d2q(params: RickerParams, s):
    """Transform of the wavelet's second derivative, ``s^4 B{g}(s)``.

    Raises
    ------
    OverflowError
        If ``Re{(s/alpha)^2 - s t0}`` exceeds 700.
    """
    s = np.asarray(s, dtype=complex)
    return s**4 * bilateral_laplace_g(params, s)


def d2q_envelope(params: RickerParams, s):
    """Upper bound on ``|B{q''}(s)|`` separating real and imaginary parts of ``s``."""
    s = np.asarray(s, dtype=complex)
    a = params.alpha
    return (4.0 * _SQRT_PI / a**3) * np.exp(-s.real * params.t0 + s.real**2 / a**2) \
        * np.abs(s) ** 4 * np.exp(-s.imag**2 / a**2)
