"""Sieve-side ground truth for the Mertens sums.

Everything here is computed directly from the primes, with no zeros of zeta
involved; it is the reference the analytic code is checked against.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from functools import cached_property
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .ddarith import two_sum
from .errors import CorruptionError, CoverageError, ParameterError, PrecisionError

MAX_LIMIT = 10**9

# Euler's constant to 30 digits (OEIS A001620).
EULER_C0 = Decimal("0.577215664901532860606512090082")

# Rosser-Schoenfeld (1962), (3.6): pi(t) < 1.25506 t / log t for t > 1.
_RS_PI_CONSTANT = 1.25506

_TABLE_MAGIC = b"MHPT"
_TABLE_VERSION = 1


@dataclass(frozen=True, eq=False)
class PrimeTable:
    """All primes up to ``limit``, ascending, as a read-only int64 array."""

    limit: int
    primes: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.primes.setflags(write=False)

    def __len__(self):
        return int(self.primes.size)

    @cached_property
    def reciprocal_prefix(self) -> tuple[np.ndarray, np.ndarray]:
        """Compensated prefix sums of 1/p as (hi, lo) arrays.

        ``hi[k] + lo[k]`` equals sum_{j<=k} 1/p_j to ~1e-30 relative; the
        plain running sum would drift by ~1e-10 over 1e8 terms.
        """
        t = 1.0 / self.primes.astype(np.float64)
        s = np.cumsum(t)
        prev = np.concatenate(([0.0], s[:-1]))
        _, err = two_sum(prev, t)
        lo = np.cumsum(err)
        return s, lo

    def reciprocal_sum_below(self, x: float, inclusive: bool) -> float:
        """sum 1/p over p < x (or p <= x)."""
        side = "right" if inclusive else "left"
        k = int(np.searchsorted(self.primes, x, side=side))
        if k == 0:
            return 0.0
        hi, lo = self.reciprocal_prefix
        return float(hi[k - 1]) + float(lo[k - 1])

    def is_prime(self, n: float) -> bool:
        if n != int(n) or n > self.limit:
            return False
        k = int(np.searchsorted(self.primes, int(n)))
        return k < self.primes.size and int(self.primes[k]) == int(n)

    def save(self, path: str | Path) -> None:
        """Binary cache: magic, u32 version, u64 limit, then u64 primes (LE)."""
        with open(path, "wb") as fh:
            fh.write(_TABLE_MAGIC)
            fh.write(struct.pack("<IQ", _TABLE_VERSION, self.limit))
            fh.write(self.primes.astype("<u8").tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "PrimeTable":
        raw = Path(path).read_bytes()
        if len(raw) < 16 or raw[:4] != _TABLE_MAGIC:
            raise CorruptionError(f"{path}: not a prime table (bad magic)")
        version, limit = struct.unpack_from("<IQ", raw, 4)
        if version != _TABLE_VERSION:
            raise CorruptionError(f"{path}: unsupported prime table version {version}")
        payload = raw[16:]
        if len(payload) % 8:
            raise CorruptionError(f"{path}: truncated prime table payload")
        primes = np.frombuffer(payload, dtype="<u8").astype(np.int64)
        if primes.size and (primes[0] != 2 or primes[-1] > limit or np.any(np.diff(primes) <= 0)):
            raise CorruptionError(f"{path}: prime table payload fails order checks")
        return cls(int(limit), primes)


def _small_primes(n: int) -> np.ndarray:
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(math.isqrt(n)) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve).astype(np.int64)


def sieve_primes(limit: int, segment: int = 1 << 23) -> PrimeTable:
    """Segmented odd-only sieve of Eratosthenes up to ``limit`` (<= 1e9)."""
    if not isinstance(limit, (int, np.integer)) or isinstance(limit, bool):
        if float(limit) != int(limit):
            raise ParameterError("sieve limit must be an integer")
    limit = int(limit)
    if not (2 <= limit <= MAX_LIMIT):
        raise ParameterError(f"sieve limit must lie in [2, 1e9], got {limit}")
    root = math.isqrt(limit)
    base = _small_primes(max(root, 2))
    odd_base = base[base > 2]
    chunks = [np.array([2], dtype=np.int64)]
    # segment covers odd numbers lo, lo+2, ..., lo + 2*(segment-1)
    lo = 3
    while lo <= limit:
        hi = min(lo + 2 * segment - 2, limit if limit % 2 else limit - 1)
        n = (hi - lo) // 2 + 1
        if n <= 0:
            break
        mark = np.ones(n, dtype=bool)
        for p in odd_base:
            p = int(p)
            if p * p > hi:
                break
            start = max(p * p, ((lo + p - 1) // p) * p)
            if start % 2 == 0:
                start += p
            mark[(start - lo) // 2 :: p] = False
        chunks.append(lo + 2 * np.flatnonzero(mark).astype(np.int64))
        lo = hi + 2
    return PrimeTable(limit, np.concatenate(chunks))


def _check_cover(x: float, table: PrimeTable) -> None:
    if x > table.limit:
        raise CoverageError(f"x = {x} exceeds the sieve limit {table.limit}")


def pi_m(x: float, table: PrimeTable, normalized: bool = True) -> float:
    """Sum of 1/p over primes p < x, with weight 1/2 on p = x when normalized.

    With ``normalized=False`` the sum runs over p <= x with full weight.
    """
    if x < 2:
        raise ParameterError("pi_m requires x >= 2")
    _check_cover(x, table)
    below = table.reciprocal_sum_below(x, inclusive=False)
    if table.is_prime(x):
        below += (0.5 if normalized else 1.0) / float(x)
    return below


def delta_m(x: float, table: PrimeTable, consts: "MertensConstants", normalized: bool = False) -> float:
    """Mertens deviation sum_{p<=x} 1/p - log log x - M."""
    return pi_m(x, table, normalized=normalized) - math.log(math.log(x)) - float(consts.mertens_m)


class JumpProfile(NamedTuple):
    primes: np.ndarray
    at_prime: np.ndarray  # Delta_M(p), full weight at p
    left_limit: np.ndarray  # lim_{x -> p-} Delta_M(x), the local infimum


def delta_m_jumps(table: PrimeTable, consts: "MertensConstants", upto: int | None = None) -> JumpProfile:
    """Delta_M at and just before every prime p <= upto.

    Between consecutive primes Delta_M decreases (log log x grows), so the
    left limits are the infima of Delta_M over [2, upto].
    """
    upto = table.limit if upto is None else upto
    _check_cover(upto, table)
    k = int(np.searchsorted(table.primes, upto, side="right"))
    p = table.primes[:k]
    hi, lo = table.reciprocal_prefix
    m = float(consts.mertens_m)
    lll = np.log(np.log(p.astype(np.float64)))
    # full-weight sum at p minus loglog p
    at = (hi[:k] - lll - m) + lo[:k]
    before_hi = np.concatenate(([0.0], hi[: k - 1]))
    before_lo = np.concatenate(([0.0], lo[: k - 1]))
    left = (before_hi - lll - m) + before_lo
    return JumpProfile(p, at, left)


def _floor_root(x: float, m: int) -> int:
    """Largest integer r with r^m <= x (exact comparison)."""
    r = int(x ** (1.0 / m))
    while (r + 1) ** m <= x:
        r += 1
    while r > 0 and r**m > x:
        r -= 1
    return r


def _prime_power_terms(x: float, table: PrimeTable, strict: bool):
    """(p, m) arrays over all prime powers p^m < x (p^m <= x if not strict)."""
    ps, ms = [], []
    m = 1
    while True:
        r = _floor_root(x, m)
        if r < 2:
            break
        if strict and r**m == x:
            r -= 1
        base = table.primes[: int(np.searchsorted(table.primes, r, side="right"))]
        ps.append(base)
        ms.append(np.full(base.size, m, dtype=np.int64))
        m += 1
    if not ps:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.concatenate(ps), np.concatenate(ms)


def _is_prime_power(x: float, table: PrimeTable) -> tuple[int, int] | None:
    if x != int(x):
        return None
    n = int(x)
    for m in range(1, n.bit_length() + 1):
        r = round(n ** (1.0 / m))
        for cand in (r - 1, r, r + 1):
            if cand >= 2 and cand**m == n and table.is_prime(cand):
                return cand, m
    return None


def chebyshev_psi_r(x: float, r: float, table: PrimeTable) -> float:
    """Normalized sum of log p / p^{m r} over prime powers p^m < x."""
    if x < 2:
        raise ParameterError("chebyshev_psi_r requires x >= 2")
    _check_cover(x, table)
    p, m = _prime_power_terms(x, table, strict=True)
    pf = p.astype(np.float64)
    terms = np.log(pf) * np.exp(-r * m * np.log(pf))
    total = math.fsum(terms.tolist())
    pp = _is_prime_power(x, table)
    if pp is not None:
        q, k = pp
        total += 0.5 * math.log(q) * math.exp(-r * k * math.log(q))
    return total


def pi_star_m(x: float, table: PrimeTable) -> float:
    """Normalized sum of 1/(m p^m) over prime powers p^m < x.

    This is the left-hand side of the explicit formula (the integral over r
    of psi(x, r) from 1 to infinity).
    """
    if x < 2:
        raise ParameterError("pi_star_m requires x >= 2")
    _check_cover(x, table)
    p, m = _prime_power_terms(x, table, strict=True)
    terms = 1.0 / (m * p.astype(np.float64) ** m)
    total = math.fsum(terms.tolist())
    pp = _is_prime_power(x, table)
    if pp is not None:
        q, k = pp
        total += 0.5 / (k * float(q) ** k)
    return total


def _higher_power_term(p: np.ndarray) -> np.ndarray:
    """-(log(1-1/p) + 1/p) = sum_{m>=2} 1/(m p^m), without cancellation."""
    u = 1.0 / p.astype(np.float64)
    series = u * u * (0.5 + u * (1 / 3 + u * (0.25 + u * (0.2 + u * (1 / 6 + u / 7)))))
    direct = -(np.log1p(-u) + u)
    return np.where(u < 1e-3, series, direct)


def prime_tail_bound(P: int) -> float:
    """Upper bound for sum_{p>P} sum_{m>=2} 1/(m p^m), P >= 2.

    Each prime contributes at most 1/(2p(p-1)); partial summation against
    pi(t) < 1.25506 t/log t bounds sum_{p>P} 1/p^2 by 2.51012/(P log P).
    """
    return _RS_PI_CONSTANT / ((P - 1) * math.log(P)) * (1 + 2.0**-40)


@dataclass(frozen=True)
class MertensConstants:
    euler_c0: Decimal
    mertens_m: Decimal
    tail_bound: Decimal
    prime_limit: int = 0


def required_prime_limit(precision_goal: float) -> int:
    """Smallest sieve limit whose tail half-width meets ``precision_goal``."""
    lo, hi = 3, 10**13
    while lo < hi:
        mid = (lo + hi) // 2
        if prime_tail_bound(mid) / 2 <= precision_goal:
            hi = mid
        else:
            lo = mid + 1
    return lo


def mertens_constant(
    precision_goal: float = 1e-9, table: PrimeTable | None = None
) -> MertensConstants:
    """M = C0 - sum_p sum_{m>=2} 1/(m p^m) from a sieve plus a rigorous tail.

    The unknown tail lies in [0, B]; the midpoint is returned with
    ``tail_bound = B/2``.  A caller-supplied ``table`` fixes the prime cutoff;
    otherwise the smallest sufficient cutoff (at most 1e9) is sieved.
    """
    goal = float(precision_goal)
    if not goal >= 1e-12:
        raise ParameterError("precision goal must be >= 1e-12")
    if table is None:
        P = required_prime_limit(goal)
        if P > MAX_LIMIT:
            raise PrecisionError(
                f"precision {goal:g} needs primes up to {P:.3g}, beyond the 1e9 sieve cap"
            )
        table = sieve_primes(max(P, 3))
    P = table.limit
    half = prime_tail_bound(P) / 2
    if half > goal:
        raise PrecisionError(
            f"sieve limit {P} gives tail half-width {half:.3g} > goal {goal:.3g}; "
            f"need limit >= {required_prime_limit(goal)}"
        )
    partial = math.fsum(_higher_power_term(table.primes).tolist())
    with localcontext() as ctx:
        ctx.prec = 40
        m = EULER_C0 - Decimal(partial) - Decimal(half)
        tb = Decimal(half) + Decimal(2.0**-52)  # float partial sum is correctly rounded
    return MertensConstants(EULER_C0, m, tb, P)


class RMValue(NamedTuple):
    value: float
    tail_bound: float


def r_m_exact(x: float, table: PrimeTable) -> RMValue:
    """r_M(x): normalized sum of 1/(m p^m) over p^m > x with m >= 2.

    Primes up to ``table.limit`` are summed exactly; primes beyond it have
    p^2 > x (x <= limit^2 is required) and contribute at most
    :func:`prime_tail_bound`.  The returned ``tail_bound`` also covers the
    powers m > m_max cut off below.
    """
    if x < 1:
        raise ParameterError("r_m_exact requires x >= 1")
    if x > float(table.limit) ** 2:
        raise CoverageError(f"x = {x} exceeds the square of the sieve limit {table.limit}")
    primes = table.primes
    root2 = _floor_root(x, 2)
    big = primes[primes > root2]
    terms = [math.fsum(_higher_power_term(big).tolist())]
    small = primes[primes <= root2]
    m_max = 120
    if small.size:
        lp = np.log(small.astype(np.float64))
        for m in range(2, m_max + 1):
            r = _floor_root(x, m)
            sel = small > r
            if np.any(sel):
                terms.extend(np.exp(-m * lp[sel] - math.log(m)).tolist())
            if r >= 2 and r**m == x and table.is_prime(r) and r <= root2:
                terms.append(0.5 / (m * float(r) ** m))
        # powers beyond m_max: sum_p p^{-m}/m over m > m_max, all p >= 2
        cut = 2.0 ** -(m_max + 1) * 4.0 / (m_max + 1)
    else:
        cut = 0.0
    value = math.fsum(terms)
    return RMValue(value, prime_tail_bound(table.limit) + cut + 1e-17 * value)
