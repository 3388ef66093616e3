"""Standard-normal CDF and quantile primitives used by both kernel backends.

The vectorized versions delegate to scipy. The scalar versions are
numba-compilable (math.erfc for the CDF, Wichura's AS241 rational
approximation for the quantile) so the jitted kernels never call into
scipy. Both sides are accurate to well below the 1e-12 absolute target.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.special as sp

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


_SQRT2 = math.sqrt(2.0)

# AS241 (PPND16) coefficients, central region |p - 0.5| <= 0.425.
_A = (3.3871328727963666080e0, 1.3314166789178437745e2,
      1.9715909503065514427e3, 1.3731693765509461125e4,
      4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3)
_B = (1.0, 4.2313330701600911252e1, 6.8718700749205790830e2,
      5.3941960214247511077e3, 2.1213794301586595867e4,
      3.9307895800092710610e4, 2.8729085735721942674e4,
      5.2264952788528545610e3)
# Intermediate region, r = sqrt(-log(min(p, 1-p))) in (1.6, 5].
_C = (1.42343711074968357734e0, 4.63033784615654529590e0,
      5.76949722146069140550e0, 3.64784832476320460504e0,
      1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4)
_D = (1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
      6.89767334985100004550e-1, 1.48103976427480074590e-1,
      1.51986665636164571966e-2, 5.47593808499534494600e-4,
      1.05075007164441684324e-9)
# Far tail, r > 5.
_E = (6.65790464350110377720e0, 5.46378491116411436990e0,
      1.78482653991729133580e0, 2.96560571828504891230e-1,
      2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
      1.48753612908506148525e-2, 7.86869131145613259100e-4,
      1.84631831751005468180e-5, 1.42151175831644588870e-9,
      2.04426310338993978564e-15)


@njit(cache=True)
def ndtr_scalar(x: float) -> float:
    """Standard-normal CDF Phi(x)."""
    return 0.5 * math.erfc(-x / _SQRT2)


@njit(cache=True)
def _poly8(c, r):
    return (((((((c[7] * r + c[6]) * r + c[5]) * r + c[4]) * r + c[3])
              * r + c[2]) * r + c[1]) * r + c[0])


@njit(cache=True)
def ndtri_scalar(p: float) -> float:
    """Standard-normal quantile Phi^-1(p), AS241 double precision."""
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        return q * _poly8(_A, r) / _poly8(_B, r)
    if q < 0.0:
        r = p
    else:
        r = 1.0 - p
    if r <= 0.0:
        return -math.inf if q < 0.0 else math.inf
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        x = _poly8(_C, r) / _poly8(_D, r)
    else:
        r -= 5.0
        x = _poly8(_E, r) / _poly8(_F, r)
    return -x if q < 0.0 else x


def ndtr(x):
    """Vectorized Phi."""
    return sp.ndtr(x)


def ndtri(p):
    """Vectorized Phi^-1."""
    return sp.ndtri(p)


def tnorm_lower_mean(a):
    """Mean of a standard normal truncated to (a, inf): phi(a) / (1 - Phi(a)).

    Uses the scaled complementary error function so the ratio stays
    accurate far into the tail. Reference oracle for sampler tests.
    """
    a = np.asarray(a, dtype=float)
    # phi(a)/Phi(-a) = sqrt(2/pi) / erfcx(a/sqrt(2))
    return np.sqrt(2.0 / np.pi) / sp.erfcx(a / _SQRT2)
