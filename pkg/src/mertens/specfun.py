"""Special functions for the Logan-kernel method.

Contents: the modified Bessel function I0, the Logan kernel pair
K_{c,eps} / l_{c,eps}, the exponential integral Eit, and the integral
contributed by the trivial zeros of zeta.

Everything that would overflow at c ~ 300 or t ~ 1e4 has a log-space twin.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate, special

from .errors import DomainError, ParameterError, PoleError, RangeError

EULER_GAMMA = 0.57721566490153286060651209008240243

# Largest t for which I0(t) is finite in binary64.
_I0_OVERFLOW = 713.0
_I0_MAX_ARG = 1.0e4


@dataclass(frozen=True)
class KernelParams:
    """Concentration ``c`` and half-width ``eps`` of the dilated Logan kernel."""

    c: float
    eps: float

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c >= 3.0):
            raise ParameterError(f"kernel concentration c must satisfy c >= 3, got {self.c}")
        if not (0.0 < self.eps < 1e-3):
            raise ParameterError(f"kernel half-width must satisfy 0 < eps < 1e-3, got {self.eps}")

    @property
    def bandwidth(self) -> float:
        """c / eps: beyond this height l_{c,eps} decays like 1/sinh(c)."""
        return self.c / self.eps


def _loose_params(c: float, eps: float) -> KernelParams:
    # Bypasses the Theorem-range validation; used by identity checks at eps = 1.
    p = object.__new__(KernelParams)
    object.__setattr__(p, "c", float(c))
    object.__setattr__(p, "eps", float(eps))
    return p


def log_sinh(c):
    """log(sinh(c)) for c > 0, without overflow."""
    c = np.asarray(c, dtype=np.float64)
    out = c + np.log1p(-np.exp(-2.0 * c)) - math.log(2.0)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Bessel I0


def log_bessel_i0(t):
    """log I0(t) for 0 <= t <= 1e4."""
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0) or np.any(t > _I0_MAX_ARG) or not np.all(np.isfinite(t)):
        raise RangeError("bessel_i0 argument outside [0, 1e4]")
    out = np.log(special.i0e(t)) + t
    return float(out) if out.ndim == 0 else out


def bessel_i0(t):
    """Modified Bessel function I0(t) for 0 <= t <= 1e4.

    Values beyond ~713 overflow binary64 and raise :class:`RangeError`;
    use :func:`log_bessel_i0` there.
    """
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0) or np.any(t > _I0_MAX_ARG) or not np.all(np.isfinite(t)):
        raise RangeError("bessel_i0 argument outside [0, 1e4]")
    if np.any(t > _I0_OVERFLOW):
        raise RangeError("I0(t) overflows binary64 for t > 713; use log_bessel_i0")
    out = special.i0(t)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Logan kernel pair


def _sinc_sqrt(w):
    """sin(sqrt(w))/sqrt(w) for complex w, returned as (mantissa, log-scale).

    The value equals mantissa * exp(scale).  Splitting off exp(|Im sqrt(w)|)
    keeps c ~ 300 in range.
    """
    w = np.asarray(w, dtype=np.complex128)
    q = np.sqrt(w)
    # principal sqrt gives Im q >= 0
    small = np.abs(w) < 1e-4
    scale = np.where(small, 0.0, np.abs(q.imag))
    # sin(q) * exp(-|Im q|) = (e^{iq - |Im q|} - e^{-iq - |Im q|}) / 2i
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        qs = np.where(small, 1.0, q)
        a = np.exp(1j * qs - scale)
        b = np.exp(-1j * qs - scale)
        m = (a - b) / (2j * qs)
    ws = np.where(small, w, 0.0)
    taylor = 1.0 - ws / 6.0 + ws * ws / 120.0 - ws * ws * ws / 5040.0
    m = np.where(small, taylor, m)
    return m, scale


def logan(params: KernelParams, x):
    """l_{c,eps}(x) = l_c(eps x), the Fourier transform of K_{c,eps}.

    Accepts real or complex scalars/arrays; returns a float for real scalar
    input, a complex for complex scalar input, and an array otherwise.
    """
    c = params.c
    arr = np.asarray(x)
    is_complex = np.iscomplexobj(arr)
    u = params.eps * arr.astype(np.complex128)
    m, scale = _sinc_sqrt(u * u - c * c)
    val = m * np.exp(scale + math.log(c) - log_sinh(c))
    if not is_complex:
        val = val.real
    if arr.ndim == 0:
        return complex(val) if is_complex else float(val)
    return val


def log_abs_logan(params: KernelParams, x):
    """log|l_{c,eps}(x)| for real x; finite even where l underflows."""
    c = params.c
    u = params.eps * np.asarray(x, dtype=np.float64)
    m, scale = _sinc_sqrt((u * u - c * c).astype(np.complex128))
    with np.errstate(divide="ignore"):
        out = np.log(np.abs(m)) + scale + math.log(c) - log_sinh(c)
    return float(out) if np.ndim(out) == 0 else out


def kernel_k(params: KernelParams, y):
    """K_{c,eps}(y) = (1/eps) K_c(y/eps); zero for |y| >= eps."""
    c, eps = params.c, params.eps
    y = np.asarray(y, dtype=np.float64)
    s = y / eps
    inside = np.abs(s) < 1.0
    arg = c * np.sqrt(np.where(inside, 1.0 - s * s, 0.0))
    logv = np.log(special.i0e(arg)) + arg + math.log(c / 2.0) - log_sinh(c) - math.log(eps)
    out = np.where(inside, np.exp(logv), 0.0)
    return float(out) if out.ndim == 0 else out


def kernel_nodes(params: KernelParams, n: int = 64):
    """Gauss-Legendre nodes and K-weighted weights on [-eps, eps].

    K_c(y) is analytic in y on [-1, 1] (I0 is even), so the rule converges
    geometrically.
    """
    t, w = np.polynomial.legendre.leggauss(n)
    y = params.eps * t
    return y, w * params.eps * kernel_k(params, y)


# ---------------------------------------------------------------------------
# Exponential integral


def _e1_series(w):
    """E1(w) by the convergent power series; |w| <= 6 (principal branch)."""
    term = -w
    total = term.copy()
    k = 1
    while True:
        term = term * (-w) * k / ((k + 1) ** 2)
        k += 1
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)) or k > 200:
            break
    # sum_{k>=1} (-w)^k / (k k!) ; the recurrence above carries 1/k via k/(k+1)^2
    return -EULER_GAMMA - np.log(w) - total


def _e1_scaled_cf(w, max_iter=20000):
    """e^w E1(w) by the Lentz-evaluated continued fraction."""
    tiny = 1e-300
    # 1/(w+1- 1/(w+3- 4/(w+5- ...)))
    b = w + 1.0
    f = np.where(b == 0, tiny, b)
    C = f.copy()
    D = np.zeros_like(f)
    done = np.zeros(f.shape, dtype=bool)
    for n in range(1, max_iter):
        an = -float(n * n)
        b = b + 2.0
        D = b + an * D
        D = np.where(D == 0, tiny, D)
        C = b + an / C
        C = np.where(C == 0, tiny, C)
        D = 1.0 / D
        delta = C * D
        f = np.where(done, f, f * delta)
        done |= np.abs(delta - 1.0) < 1e-16
        if np.all(done):
            break
    else:
        raise RangeError("E1 continued fraction did not converge")
    return 1.0 / f


def _e1_scaled_asym(w):
    """e^w E1(w) ~ (1/w) sum (-1)^k k!/w^k, truncated at the smallest term."""
    term = np.ones_like(w)
    total = term.copy()
    active = np.ones(w.shape, dtype=bool)
    for k in range(1, 200):
        new = term * (-k) / w
        shrink = np.abs(new) < np.abs(term)
        active &= shrink
        term = np.where(active, new, term)
        total = total + np.where(active, new, 0.0)
        active &= np.abs(new) > 1e-17 * np.abs(total)
        if not np.any(active):
            break
    return total / w


def _eit_scaled_core(z):
    """e^{-z} Eit(z) for complex z off the positive real axis."""
    w = -z
    out = np.empty_like(z)
    r = np.abs(z)
    # the series cancels badly once Re w is large, so it is kept to the
    # half-plane where its terms do not alternate much
    ser = (r <= 1.0) | ((r <= 6.0) & (w.real <= 0.0))
    asym = r > 40.0
    cf = ~ser & ~asym
    if np.any(ser):
        ws = w[ser]
        out[ser] = -np.exp(ws) * _e1_series(ws)
    if np.any(cf):
        out[cf] = -_e1_scaled_cf(w[cf])
    if np.any(asym):
        out[asym] = -_e1_scaled_asym(w[asym])
    return out


def _ei_real_pos(x):
    """Ei(x) for real x > 0 (series up to 40, asymptotic beyond)."""
    out = np.empty_like(x)
    small = x <= 40.0
    if np.any(small):
        xs = x[small]
        term = xs.copy()
        total = xs.copy()
        for k in range(1, 400):
            term = term * xs * k / ((k + 1) ** 2)
            total += term
            if np.all(term <= 1e-17 * total):
                break
        out[small] = EULER_GAMMA + np.log(xs) + total
    if np.any(~small):
        xl = x[~small]
        term = np.ones_like(xl)
        total = np.ones_like(xl)
        active = np.ones(xl.shape, dtype=bool)
        for k in range(1, 200):
            new = term * k / xl
            active &= new < term
            term = np.where(active, new, term)
            total += np.where(active, new, 0.0)
            active &= new > 1e-17 * total
            if not np.any(active):
                break
        out[~small] = np.exp(xl) / xl * total
    return out


def eit_scaled(z):
    """e^{-z} Eit(z); finite where Eit itself over- or underflows."""
    arr = np.asarray(z, dtype=np.complex128)
    scalar = arr.ndim == 0
    z = np.atleast_1d(arr).copy()
    if np.any(z == 0):
        raise PoleError("Eit has a logarithmic pole at z = 0")
    out = np.empty_like(z)
    pos_real = (z.imag == 0) & (z.real > 0)
    if np.any(pos_real):
        x = z.real[pos_real]
        out[pos_real] = _ei_real_pos(x) * np.exp(-x)
    if np.any(~pos_real):
        out[~pos_real] = _eit_scaled_core(z[~pos_real])
    neg_real = (z.imag == 0) & (z.real < 0)
    out[neg_real] = out[neg_real].real
    return complex(out[0]) if scalar else out


def eit(z):
    """Eit(z) = int_0^inf e^{z-t}/(z-t) dt.

    Agrees with Ei on the real line minus 0 and equals -E1(-z) elsewhere.
    Raises :class:`PoleError` at z = 0.
    """
    arr = np.asarray(z)
    real_in = not np.iscomplexobj(arr)
    zc = arr.astype(np.complex128)
    s = eit_scaled(zc)
    val = np.exp(zc) * s
    if real_in:
        val = np.real(val)
    if np.ndim(val) == 0:
        return float(val) if real_in else complex(val)
    return val


# ---------------------------------------------------------------------------
# Trivial zeros


class TrivialIntegral(NamedTuple):
    value: float
    bound: float


def trivial_zero_integral(x: float) -> TrivialIntegral:
    """int_x^inf dt / (t^2 log t (t^2 - 1)) together with an upper bound.

    The bound is x^-3 for x >= e^0.52 and slightly wider below.  Both are returned as floats;
    when they underflow the value is reported as 0 and the bound as the
    smallest positive subnormal.
    """
    if not (x > 1.0):
        raise DomainError("trivial_zero_integral requires x > 1")
    y0 = math.log(x)
    # t = e^{y0+s}: e^{-3 y0} * int_0^inf e^{-3s} / ((y0+s)(1-e^{-2(y0+s)})) ds
    def f(s):
        u = y0 + s
        return math.exp(-3.0 * s) / (u * -math.expm1(-2.0 * u))

    inner, _ = integrate.quad(f, 0.0, math.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    scale = -3.0 * y0
    value = math.exp(scale) * inner if scale > -745.0 else 0.0
    # x^-3 dominates once 3y(1 - e^{-2y}) >= 1 (y >= ~0.52); below that the
    # cruder e^{-3y} / (3y(1 - e^{-2y})) is the valid one.
    widen = max(1.0, 1.0 / (3.0 * y0 * -math.expm1(-2.0 * y0)))
    bound = math.exp(scale) * widen if scale > -745.0 else 0.0
    if bound == 0.0:
        bound = 5e-324
    else:
        bound *= 1.0 + 2.0**-48  # covers the rounding of log x and exp
    return TrivialIntegral(value, bound)


def complex_point(re: float, im: float = 0.0) -> complex:
    """Build the complex argument used throughout (finite components only)."""
    z = complex(re, im)
    if not cmath.isfinite(z):
        raise ParameterError("complex point must have finite components")
    return z
