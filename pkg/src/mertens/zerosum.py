"""Sums over zeta zeros.

* the locator ``sigma_T(y) = sum_{|gamma|<=T} e^{i gamma y} / (1/2 - i gamma)``
  on uniform grids, by direct summation or through a type-1 NUFFT;
* the kernel-weighted certification sum
  ``sum e^{-i gamma w} l_{c,eps}(gamma) (1/rho - 1/(w rho^2))``;
* the integral ``Phi_{w,rho,a}`` by quadrature and by its asymptotic expansion;
* the truncated explicit formula for the weighted prime-power count.

Every phase ``gamma * y`` is reduced modulo 2*pi in double-double arithmetic,
so grid abscissae and ``omega`` should be passed as decimal strings (or
:class:`~mertens.ddarith.DD`) when they are not exact binary fractions.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from decimal import Decimal, localcontext
from pathlib import Path
from typing import Iterable, Iterator, TextIO

import numpy as np

from .ddarith import DD, TWO_PI_HI, TWO_PI_LO, TWO_PI_MID, fsum, quick_two_sum, reduce_phase, two_prod, two_sum
from .errors import AccuracyError, DomainError, ParameterError
from .primes import EULER_C0
from .specfun import KernelParams, eit_scaled, kernel_nodes, logan, trivial_zero_integral
from .zeros import ZeroSet

# Zeros per block in direct summation; partial sums are combined in block order.
ZERO_BLOCK = 1 << 16
# Grid points per NUFFT chunk in fast mode.
FAST_CHUNK = 1 << 23
FAST_EPS = 1e-12
# Budget for the first-order error caused by rounding gamma * dy to a double.
FAST_BLOCK_BUDGET = 1e-11


def _as_dd(v) -> DD:
    if isinstance(v, DD):
        return v
    return DD.from_value(v if not isinstance(v, float) else repr(v))


# ---------------------------------------------------------------------------
# Grids


@dataclass(frozen=True)
class GridSpec:
    """Points ``y0 + k dy`` for ``0 <= k < n``.

    ``y0`` and ``dy`` may be floats, decimal strings or :class:`Decimal`;
    strings are converted exactly, so ``dy="1e-7"`` is the decimal lattice
    and not its nearest double.
    """

    y0: float | str | Decimal
    dy: float | str | Decimal
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"grid needs n >= 1 points, got {self.n}")
        if not float(self.dy) > 0:
            raise ParameterError(f"grid step must be positive, got {self.dy}")
        if not float(self.y0) >= 1.0:
            raise ParameterError(f"grid must start at y0 >= 1, got {self.y0}")

    @classmethod
    def lattice(cls, y_lo, y_hi, step="1e-7") -> "GridSpec":
        """All points of ``step * Z`` inside ``[y_lo, y_hi]`` (anchored at 0, not at y_lo)."""
        s = Decimal(str(step))
        k0 = int((Decimal(str(y_lo)) / s).to_integral_value(rounding="ROUND_CEILING"))
        k1 = int((Decimal(str(y_hi)) / s).to_integral_value(rounding="ROUND_FLOOR"))
        if k1 < k0:
            raise ParameterError(f"no lattice points of step {step} in [{y_lo}, {y_hi}]")
        return cls(str(k0 * s), str(s), k1 - k0 + 1)

    @property
    def y0_dd(self) -> DD:
        return _as_dd(self.y0)

    @property
    def dy_dd(self) -> DD:
        return _as_dd(self.dy)

    def points_dd(self, start: int = 0, stop: int | None = None):
        """(hi, lo) arrays of the grid abscissae with index in [start, stop)."""
        stop = self.n if stop is None else stop
        k = np.arange(start, stop, dtype=np.float64)
        y0, dy = self.y0_dd, self.dy_dd
        ph, pl = two_prod(k, dy.hi)
        pl = pl + k * dy.lo
        s, e = two_sum(y0.hi, ph)
        e = e + (pl + y0.lo)
        return quick_two_sum(s, e)

    def points(self) -> np.ndarray:
        hi, lo = self.points_dd()
        return hi + lo


# ---------------------------------------------------------------------------
# sigma_T on grids


def _sigma_weights(g: np.ndarray):
    # 2 Re(e^{i phi} / (1/2 - i g)) = (cos phi - 2 g sin phi) / (1/4 + g^2)
    d = 1.0 / (0.25 + g * g)
    return d, 2.0 * g * d


def _sigma_direct_block(g, wc, ws, yh, yl):
    out = np.zeros(yh.size)
    parts = []
    for s in range(0, g.size, ZERO_BLOCK):
        gb = g[s : s + ZERO_BLOCK]
        ph = reduce_phase(gb[None, :], yh[:, None], yl[:, None])
        t = np.cos(ph) * wc[None, s : s + ZERO_BLOCK] - np.sin(ph) * ws[None, s : s + ZERO_BLOCK]
        parts.append(t.sum(axis=1))
    if parts:
        stacked = np.stack(parts, axis=1)
        out = np.array([fsum(row) for row in stacked])
    return out


def sigma_direct(gammas: np.ndarray, y_hi, y_lo=None, threads: int = 1) -> np.ndarray:
    """sigma at arbitrary points by direct summation over ``gammas``.

    The reduction order is fixed (blocks of :data:`ZERO_BLOCK` zeros summed
    pairwise, block sums combined with fsum), so results do not depend on
    ``threads``.
    """
    g = np.asarray(gammas, dtype=np.float64)
    yh = np.atleast_1d(np.asarray(y_hi, dtype=np.float64))
    yl = np.zeros_like(yh) if y_lo is None else np.atleast_1d(np.asarray(y_lo, dtype=np.float64))
    wc, ws = _sigma_weights(g)
    pts = max(1, min(64, (1 << 22) // max(1, min(g.size, ZERO_BLOCK))))
    starts = list(range(0, yh.size, pts))

    def work(s):
        return _sigma_direct_block(g, wc, ws, yh[s : s + pts], yl[s : s + pts])

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(threads) as ex:
            res = list(ex.map(work, starts))
    else:
        res = [work(s) for s in starts]
    return np.concatenate(res) if res else np.zeros(0)


def _reduce_dd(x_hi, x_lo):
    """Reduce x_hi + x_lo mod 2 pi; returns (r, r_lo) with r + r_lo the reduced value."""
    n = np.rint(x_hi / TWO_PI_HI)
    qh, ql = two_prod(n, TWO_PI_HI)
    r1 = x_hi - qh
    rest = (x_lo - ql) - n * TWO_PI_MID - n * TWO_PI_LO
    r = r1 + rest
    return r, (r1 - r) + rest


class _FastPlan:
    """NUFFT plans for one (zeros, dy, chunk length) combination."""

    def __init__(self, g: np.ndarray, dy: DD, length: int, threads: int):
        import finufft

        self.g = g
        self.length = length
        xh, xl = two_prod(g, dy.hi)
        xl = xl + g * dy.lo
        self.x, self.x_lo = _reduce_dd(xh, xl)
        self.w = 2.0 / (0.5 - 1j * g)
        self.abs_wr = float(np.sum(np.abs(self.w) * np.abs(self.x_lo)))
        opts = dict(eps=FAST_EPS, isign=1, modeord=0, nthreads=max(1, threads))
        self.plan = finufft.Plan(1, (length,), **opts)
        self.plan.setpts(self.x)
        drift = 0.5 * length * self.abs_wr
        self.corr = None
        if drift > FAST_BLOCK_BUDGET:
            eps2 = min(1e-2, max(1e-12, FAST_BLOCK_BUDGET / drift))
            self.corr = finufft.Plan(1, (length,), eps=eps2, isign=1, modeord=0, nthreads=max(1, threads))
            self.corr.setpts(self.x)

    def chunk(self, yc: DD) -> np.ndarray:
        """sigma at yc + k dy for k in [-L/2, L/2)."""
        ph = reduce_phase(self.g, yc.hi, yc.lo)
        c = self.w * np.exp(1j * ph)
        f = self.plan.execute(c)
        out = f.real
        if self.corr is not None:
            b = self.corr.execute(c * self.x_lo)
            k = np.arange(-(self.length // 2), self.length - self.length // 2, dtype=np.float64)
            out = out - k * b.imag
        return out


def iter_sigma_grid(
    zs: ZeroSet, T: float, grid: GridSpec, mode: str = "direct", threads: int = 1, chunk: int | None = None
) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(start, values)`` blocks of sigma_T over the grid, in index order."""
    if mode not in ("direct", "fast"):
        raise ParameterError(f"unknown sigma mode {mode!r}")
    g = zs.up_to(T)
    if mode == "direct" or g.size == 0:
        step = chunk or 4096
        for s in range(0, grid.n, step):
            stop = min(grid.n, s + step)
            if g.size == 0:
                yield s, np.zeros(stop - s)
                continue
            yh, yl = grid.points_dd(s, stop)
            yield s, sigma_direct(g, yh, yl, threads=threads)
        return
    length = min(chunk or FAST_CHUNK, grid.n + (grid.n & 1))
    length += length & 1
    plan = _FastPlan(g, grid.dy_dd, length, threads)
    y0, dy = grid.y0_dd, grid.dy_dd
    half = length // 2
    for s in range(0, grid.n, length):
        vals = plan.chunk(y0 + dy * float(s + half))
        yield s, vals[: min(length, grid.n - s)]


def sigma_grid(zs: ZeroSet, T: float, grid: GridSpec, mode: str = "direct", threads: int = 1) -> np.ndarray:
    """sigma_T at every grid point; ``mode`` is ``"direct"`` or ``"fast"``.

    Fast mode evaluates chunks of the grid with a type-1 NUFFT centred on each
    chunk; it agrees with direct summation to about 1e-11.
    """
    out = np.empty(grid.n)
    for s, vals in iter_sigma_grid(zs, T, grid, mode, threads):
        out[s : s + vals.size] = vals
    return out


def sigma_point(zs: ZeroSet, T: float, y) -> float:
    """sigma_T(y) at a single point (y as float, decimal string or DD)."""
    yd = _as_dd(y)
    return float(sigma_direct(zs.up_to(T), [yd.hi], [yd.lo])[0])


def write_grid_csv(out: TextIO | str | Path, grid: GridSpec, values: Iterable[float]) -> None:
    """CSV ``y,value`` with 15 significant digits."""
    ys = grid.points()
    rows = [("y", "value")] + [(f"{y:.15g}", f"{v:.15g}") for y, v in zip(ys, values)]
    if isinstance(out, (str, Path)):
        with open(out, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
    else:
        csv.writer(out, lineterminator="\n").writerows(rows)


# ---------------------------------------------------------------------------
# Certification sum


@dataclass(frozen=True)
class WeightedZeroSum:
    value: float
    T: float
    omega: float
    params: KernelParams
    phase_precision: float
    count: int = 0


def _phase_precision(gmax: float, w: DD) -> float:
    # few ulps of pi from the reduction plus the double-double product error
    return 8 * math.ulp(math.pi) + gmax * abs(w.hi) * 2.0**-100


def kernel_weighted_sum(zs: ZeroSet, omega, params: KernelParams, T: float) -> WeightedZeroSum:
    """``sum_{0<|gamma|<=T} e^{-i gamma w} l(gamma) (1/rho - 1/(w rho^2))`` with rho = 1/2 + i gamma."""
    w = _as_dd(omega)
    wf = float(w)
    if T > params.bandwidth:
        raise ParameterError(f"T = {T:g} exceeds c/eps = {params.bandwidth:g}")
    if not wf - params.eps > 200:
        raise ParameterError("need omega - eps > 200")
    g = zs.up_to(T)
    if g.size == 0:
        return WeightedZeroSum(0.0, float(T), wf, params, _phase_precision(0.0, w), 0)
    ph = reduce_phase(g, w.hi, w.lo)
    rho = 0.5 + 1j * g
    u = 1.0 / rho - 1.0 / (wf * rho * rho)
    terms = 2.0 * (np.exp(-1j * ph) * u).real * logan(params, g)
    return WeightedZeroSum(fsum(terms), float(T), wf, params, _phase_precision(float(g[-1]), w), int(g.size))


# ---------------------------------------------------------------------------
# Phi: quadrature oracle and asymptotic expansion


def _check_phi_args(omega: float, params: KernelParams, rho: complex, a: float):
    if not (0 < params.eps < omega):
        raise ParameterError("need 0 < eps < omega")
    if not (0.0 <= a <= 1.0):
        raise ParameterError(f"a must lie in [0, 1], got {a}")
    if rho.imag == 0:
        raise ParameterError("rho must have nonzero imaginary part")


def _phi_rule(w: DD, params: KernelParams, rho: complex, a: float, n: int) -> complex:
    t, wt = kernel_nodes(params, n)
    wf = float(w)
    y = wf + t
    beta, gam = rho.real, rho.imag
    # e^{(1/2 - rho) y} with the oscillating factor reduced in double-double
    ph = reduce_phase(gam, w.hi, w.lo + t)
    mod = np.exp((0.5 - beta) * y)
    z = (a - rho) * y
    vals = y * mod * np.exp(-1j * ph) * eit_scaled(z)
    return complex(np.sum(wt * vals))


def phi_quadrature(omega, params: KernelParams, rho: complex, a: float = 0.0, rtol: float = 1e-10) -> complex:
    """``int K(y - w) y e^{(1/2-a)y} Eit((a-rho)y) dy`` by Gauss-Legendre with K-weights.

    The node count doubles until two successive rules agree to ``rtol``.
    """
    w = _as_dd(omega)
    rho = complex(rho)
    _check_phi_args(float(w), params, rho, a)
    n = 32
    prev = _phi_rule(w, params, rho, a, n)
    while n < 8192:
        n *= 2
        cur = _phi_rule(w, params, rho, a, n)
        if abs(cur - prev) <= rtol * abs(cur):
            return cur
        prev = cur
    raise AccuracyError(f"Phi quadrature did not converge to {rtol:g} with {n} nodes")


def _moments(params: KernelParams, z0: complex, m: int) -> list[complex]:
    """M_n = int K(t) t^n e^{-i z0 t} dt for n <= m (M_0 in closed form)."""
    out = [complex(logan(params, complex(z0)))]
    if m == 0:
        return out
    n, prev = 64, None
    while True:
        t, wt = kernel_nodes(params, n)
        base = wt * np.exp(-1j * z0 * t)
        cur = [complex(np.sum(base * t**k)) for k in range(1, m + 1)]
        if prev is not None and all(abs(x - y) <= 1e-12 * max(abs(x), params.eps**k * 1e-300) for k, (x, y) in enumerate(zip(cur, prev), 1)):
            break
        if n >= 4096:
            break
        prev = cur
        n *= 2
    return out + cur


def phi_expansion(omega, params: KernelParams, rho: complex, k: int, m: int, a: float = 0.0):
    """Terms ``(j-1)! F^{(-j)}(0) / (rho - a)^j`` for j = 1..k and the total remainder bound.

    ``F^{(-j)}`` is expanded in powers of ``t / w`` up to order ``m``; the
    bound covers both the truncated Eit asymptotics and the truncated
    expansion.  Valid for ``a <= Re rho``.
    """
    if int(k) != k or k < 1:
        raise ParameterError(f"k must be a positive integer, got {k}")
    if int(m) != m or m < 0:
        raise ParameterError(f"m must be a nonnegative integer, got {m}")
    w = _as_dd(omega)
    wf = float(w)
    rho = complex(rho)
    eps = params.eps
    if not math.e * eps < wf:
        raise ParameterError("need e * eps < omega")
    _check_phi_args(wf, params, rho, a)
    beta, gam = rho.real, rho.imag
    z0 = complex(gam, -(beta - 0.5))
    ph = float(reduce_phase(gam, w.hi, w.lo))
    pre = math.exp((0.5 - beta) * wf) * complex(math.cos(ph), -math.sin(ph))
    M = _moments(params, z0, m)
    d = rho - a
    terms = [-pre * M[0] / d]
    for j in range(2, k + 1):
        s = sum(math.comb(n + j - 2, n) * (-1) ** n * M[n] / wf ** (n + j - 1) for n in range(m + 1))
        terms.append(math.factorial(j - 1) * (-1) ** j * pre * s / d**j)
    amp = math.exp((0.5 - beta) * wf + eps / 2)
    theta = math.factorial(k) * amp / ((wf - eps) ** k * abs(gam) ** (k + 1))
    q = math.e * eps / wf
    for j in range(2, k + 1):
        theta += (
            math.factorial(j - 1) / abs(d) ** j * math.exp(j - 2) * amp / wf ** (j - 1) * q ** (m + 1) / (1 - q)
        )
    return np.array(terms, dtype=np.complex128), theta


# ---------------------------------------------------------------------------
# Explicit formula


def _log_dd(x) -> DD:
    with localcontext() as ctx:
        ctx.prec = 50
        return DD.from_value(Decimal(str(x)).ln())


@dataclass(frozen=True)
class ExplicitFormula:
    value: float
    zero_sum: float
    trivial: float
    count: int


def explicit_pi_star(x, zs: ZeroSet | None, T: float) -> ExplicitFormula:
    """Truncated explicit formula for the weighted prime-power count.

    ``loglog x + C0 - sum_{|gamma|<=T} Eit(-rho log x) + int_x^inf dt/(t^2 log t (t^2-1))``
    with rho = 1/2 + i gamma.
    """
    xf = float(x)
    if not xf > 1.0:
        raise DomainError("explicit formula needs x > 1")
    L = _log_dd(x)
    Lf = float(L)
    g = np.zeros(0) if zs is None or T < 14 else zs.up_to(T)
    zsum = 0.0
    if g.size:
        rho = 0.5 + 1j * g
        ph = reduce_phase(g, L.hi, L.lo)
        # Eit(-rho L) = x^{-1/2} e^{-i gamma L} e^{rho L} Eit(-rho L)
        vals = np.exp(-1j * ph) * eit_scaled(-rho * Lf)
        zsum = 2.0 * math.exp(-0.5 * Lf) * fsum(vals.real)
    triv = trivial_zero_integral(xf).value
    value = fsum([math.log(Lf), float(EULER_C0), -zsum, triv])
    return ExplicitFormula(value, zsum, triv, int(g.size))
